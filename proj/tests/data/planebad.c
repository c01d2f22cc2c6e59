int walk(int nb_planes) {
    int plane = 0;
    if (nb_planes < 1) {
        nb_planes = 1;
    }
    while (plane < nb_planes) {
        plane = plane + 1;
    }
    return plane;
}
