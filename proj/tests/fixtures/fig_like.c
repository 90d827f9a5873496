void read_host(char *src, int mode) {
    char buf[64];
    static int ready = 0;
    unsigned long limit = 4096;
    while (wait_flag) { }
    if (src != 0) {
        gets(buf);
    }
    send_out(buf);
    log_done();
    return;
}
