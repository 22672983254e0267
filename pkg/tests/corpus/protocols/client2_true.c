// Client state machine driven by a switch; the key is only sent once it was received.
int main() {
    int st = 0;
    int have_key = 0;
    int sent_key = 0;
    while (st != 5) {
        int msg = __VERIFIER_nondet_int();
        switch (st) {
        case 0:
            if (msg == 1) {
                st = 1;
            }
            break;
        case 1:
            if (msg == 2) {
                have_key = 1;
                st = 2;
            } else if (msg == 9) {
                st = 0;
            }
            break;
        case 2:
            if (have_key == 1) {
                sent_key = 1;
            }
            st = 3;
            break;
        case 3:
            if (msg == 0) {
                st = 5;
            } else {
                st = 2;
            }
            break;
        default:
            st = 5;
        }
        assert(sent_key == 0 || have_key == 1);
    }
    return 0;
}
