int p06(int n) {
    int k = 0;
    while (k < n) {
        k = k + 2;
    }
    return k;
}
