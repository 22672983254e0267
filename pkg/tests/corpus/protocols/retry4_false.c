// Retransmission loop whose error path bumps the counter twice.
int main() {
    int retries = 0;
    int acked = 0;
    while (acked == 0 && retries < 3) {
        int r = __VERIFIER_nondet_int();
        if (r > 0) {
            acked = 1;
        } else if (r < 0) {
            retries = retries + 2;
        } else {
            retries = retries + 1;
        }
    }
    assert(retries <= 3);
    return 0;
}
