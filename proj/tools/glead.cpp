#include <cstdio>

int main() {
    std::puts("glead: placeholder");
    return 0;
}
