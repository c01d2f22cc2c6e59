int nest4(int n) {
    int a = 0;
    int b = 0;
    int c = 0;
    int d = 0;
    while (a < n) {
        while (b < n) {
            while (c < n) {
                while (d < n) {
                    d = d + 1;
                }
                c = c + 1;
            }
            b = b + 1;
        }
        a = a + 1;
    }
    return a + b + c + d;
}
