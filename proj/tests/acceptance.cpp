// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "husimi/checks.hpp"

int main(int argc, char** argv) {
    int only = argc > 1 ? std::atoi(argv[1]) : 0;
    auto checks = husimi::acceptance_checks();
    int failed = 0;
    for (size_t k = 0; k < checks.size(); ++k) {
        if (only && only != static_cast<int>(k) + 1) continue;
        husimi::CheckResult r = checks[k]();
        std::printf("%s criterion %d (%s): %s [%.1f s / %.0f s]\n", r.passed() ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.detail.c_str(), r.seconds, r.budget_seconds);
        std::fflush(stdout);
        if (!r.passed()) ++failed;
    }
    return failed ? 1 : 0;
}
