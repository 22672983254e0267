// Server handshake skeleton: re-entering 8512 after the flag reached 2 bumps it to 3.
int main() {
    int state = 8464;
    int blastFlag = 0;
    int got_session = 0;
    int ret = 0;
    while (1) {
        if (state == 8464) {
            got_session = 1;
            state = 8496;
        } else if (state == 8496) {
            if (blastFlag == 0) {
                blastFlag = 1;
            }
            ret = __VERIFIER_nondet_int();
            if (ret <= 0) {
                break;
            }
            state = 8512;
        } else if (state == 8512) {
            if (blastFlag == 1) {
                blastFlag = 2;
            } else if (blastFlag == 2) {
                blastFlag = 3;
            }
            state = 8528;
        } else if (state == 8528) {
            ret = __VERIFIER_nondet_int();
            if (ret == 0) {
                state = 8512;
            } else {
                state = 3;
            }
        } else {
            break;
        }
        assert(blastFlag != 3);
    }
    return 0;
}
