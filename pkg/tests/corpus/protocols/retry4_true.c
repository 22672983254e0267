// Retransmission loop with a bounded retry counter.
int main() {
    int retries = 0;
    int acked = 0;
    int phase = 0;
    while (acked == 0 && retries < 3) {
        int r = __VERIFIER_nondet_int();
        phase = 1;
        if (r > 0) {
            acked = 1;
        } else {
            retries = retries + 1;
        }
        phase = 2;
    }
    assert(retries <= 3);
    assert(phase == 0 || phase == 2);
    return 0;
}
