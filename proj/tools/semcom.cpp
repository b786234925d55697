// Placeholder entry point; subcommands land with the sweep harness.
#include <cstdio>

int main() {
    std::puts("semcom: subcommands not wired yet");
    return 1;
}
