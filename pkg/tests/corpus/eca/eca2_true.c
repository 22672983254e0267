// Mode machine with an output channel; mode 3 is never entered.
int mode = 0;
int out = 0;
int armed = 0;

void step(int ev) {
    if (ev == 1) {
        if (mode == 0) {
            mode = 1;
            out = 10;
        }
    } else if (ev == 2) {
        if (mode == 1) {
            mode = 2;
            armed = 1;
        }
    } else if (ev == 3) {
        if (mode == 2 && armed == 0) {
            mode = 3;
        } else {
            mode = 0;
            armed = 0;
        }
    }
}

int main() {
    while (1) {
        int ev = __VERIFIER_nondet_int();
        if (ev == 0) {
            break;
        }
        step(ev);
        assert(mode != 3);
        assert(out == 0 || out == 10);
    }
    return 0;
}
