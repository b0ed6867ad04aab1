// Acceptance suite: runs every verification group of the toolkit in order,
// prints one line per check with its measured value and pinned window, then a
// per-criterion roll-up.  Exits nonzero if any check fails.
//
// The heavy groups (the curved-edge eigenvalue fits) dominate the runtime;
// the whole suite is sized to finish well inside the test timeout on one
// core.
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "magstep/io.hpp"
#include "magstep/verify.hpp"

using namespace magstep;

namespace {

void print_check(const VerifyCheck& c) {
    const std::string lo = c.lo <= -kVerifyUnbounded ? "-inf" : format_double(c.lo);
    const std::string hi = c.hi >= kVerifyUnbounded ? "inf" : format_double(c.hi);
    std::printf("  [%s] %-32s value=%-13s window=[%s, %s]  (%.2fs)%s%s\n",
                c.pass ? "PASS" : "FAIL", c.name.c_str(),
                format_double(c.value).c_str(), lo.c_str(), hi.c_str(),
                c.seconds, c.note.empty() ? "" : "  -- ", c.note.c_str());
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    VerifyContext ctx;
    std::vector<VerifyCheck> checks;

    for (const std::string& group : known_verify_groups()) {
        std::printf("== %s\n", group.c_str());
        const std::size_t before = checks.size();
        try {
            run_verify_group(group, ctx, checks);
        } catch (const std::exception& e) {
            std::printf("  [FAIL] group aborted: %s\n", e.what());
            VerifyCheck c;
            c.group = group;
            c.criterion = 0;
            c.name = group + "_aborted";
            c.value = 0.0;
            c.lo = 1.0;
            c.hi = 1.0;
            c.pass = false;
            c.note = e.what();
            checks.push_back(c);
        }
        for (std::size_t i = before; i < checks.size(); ++i)
            print_check(checks[i]);
    }

    // roll up by criterion index
    std::map<int, std::pair<std::size_t, std::size_t>> tally;  // passed, total
    for (const auto& c : checks) {
        auto& t = tally[c.criterion];
        t.second += 1;
        if (c.pass) t.first += 1;
    }
    std::printf("\n-- criteria --\n");
    std::size_t failed_criteria = 0;
    for (const auto& [crit, t] : tally) {
        if (crit == 0) continue;  // group-abort sentinel rows
        const bool ok = t.first == t.second;
        if (!ok) ++failed_criteria;
        std::printf("criterion %2d: %s (%zu/%zu checks)\n", crit,
                    ok ? "PASS" : "FAIL", t.first, t.second);
    }

    std::size_t passed = 0;
    for (const auto& c : checks) passed += c.pass ? 1 : 0;
    std::printf("\n%zu/%zu checks passed, %zu criteria failing\n", passed,
                checks.size(), failed_criteria);
    return passed == checks.size() ? 0 : 1;
}
