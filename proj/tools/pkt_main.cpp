// CLI entry point. Placeholder until the pipeline lands.
#include <cstdio>

int main() {
    std::puts("pkt: pipeline not wired yet");
    return 0;
}
