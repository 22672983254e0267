// Session layer where closing forgets to clear the open flag.
int opened = 0;
int closed = 0;

void open_session() {
    if (opened == 0) {
        opened = 1;
        closed = 0;
    }
}

void close_session() {
    if (opened == 1) {
        closed = 1;
    }
}

int main() {
    int sent = 0;
    while (1) {
        int op = __VERIFIER_nondet_int();
        if (op == 0) {
            break;
        } else if (op == 1) {
            open_session();
        } else if (op == 2) {
            close_session();
        } else if (op == 3) {
            if (opened == 1) {
                sent = sent + 1;
                assert(closed == 0);
            }
        }
    }
    assert(opened == 0 || closed == 0);
    return 0;
}
