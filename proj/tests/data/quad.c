int quad(int n) {
    int a = 0;
    int b = 0;
    int i = 0;
    int j = 0;
    while (i < n) {
        j = 0;
        while (j < n) {
            a = a + 1;
            j = j + 1;
        }
        i = i + 1;
    }
    i = 0;
    while (i < n) {
        j = 0;
        while (j < n) {
            b = b + 1;
            j = j + 1;
        }
        i = i + 1;
    }
    return a + b;
}
