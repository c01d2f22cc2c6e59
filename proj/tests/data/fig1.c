int main() {
    int i = 0;
    int n = 30;
    while (i < n) {
        i = i + 1;
    }
    return 0;
}
