// Lock/unlock discipline guarded by a nondeterministic request flag.
int main() {
    int locked = 0;
    int req = __VERIFIER_nondet_int();
    int n = 0;
    while (1) {
        int go = __VERIFIER_nondet_int();
        if (go == 0) {
            break;
        }
        if (req != 0) {
            assert(locked == 0);
            locked = 1;
        }
        n = n + 1;
        if (req != 0) {
            assert(locked == 1);
            locked = 0;
        }
    }
    assert(locked == 0);
    return 0;
}
