#include <cstdio>
int main() { std::puts("phaselab cli placeholder"); return 0; }
