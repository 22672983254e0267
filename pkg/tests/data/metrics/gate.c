// Two assertions over a gate that opens once a nondeterministic key matches.
int main() {
    int key = __VERIFIER_nondet_int();
    int open = 0;
    int tries = 0;
    while (tries < 3) {
        if (key == 7) {
            open = 1;
        }
        tries = tries + 1;
    }
    assert(tries == 3);
    assert(open == 0 || key == 7);
    return 0;
}
