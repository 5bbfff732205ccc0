#include <cstdio>

int main() {
    std::puts("signa: subcommands not wired yet");
    return 1;
}
