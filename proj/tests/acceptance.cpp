// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include <cstdio>

#include "masslab/acceptance.hpp"

int main() {
    using namespace masslab::acceptance;
    Options opt;
    int failed = 0;
    for (const auto& e : registry()) {
        const auto r = run_guarded(e, opt);
        std::printf("%s\n", line(r).c_str());
        for (const auto& d : r.details) std::printf("    %s\n", d.c_str());
        std::fflush(stdout);
        failed += !r.pass;
    }
    std::printf("%d of %zu criteria failed\n", failed, registry().size());
    return failed ? 1 : 0;
}
