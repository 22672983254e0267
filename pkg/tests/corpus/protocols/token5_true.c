// Token ring with three stations passing a single token.
int main() {
    int t1 = 1;
    int t2 = 0;
    int t3 = 0;
    while (1) {
        int ev = __VERIFIER_nondet_int();
        if (ev == 0) {
            break;
        }
        if (ev == 1 && t1 == 1) {
            t1 = 0;
            t2 = 1;
        } else if (ev == 2 && t2 == 1) {
            t2 = 0;
            t3 = 1;
        } else if (ev == 3 && t3 == 1) {
            t3 = 0;
            t1 = 1;
        }
        assert(t1 + t2 + t3 <= 1);
    }
    return 0;
}
