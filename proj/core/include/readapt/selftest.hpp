#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace readapt {

// Reduced-size property suites covering the numerical core: Monte-Carlo
// agreement of the closed-form conditional entropy, the non-negativity
// of domain uncertainty, entropy order relations, finite-difference
// gradient checks and brute-force equivalence of the combinatorial
// pieces. Deep mode raises the Monte-Carlo draw count to 1e6 and the
// sweep sizes; the default finishes in a few seconds.
struct SelftestOptions {
    bool deep = false;
    // Deliberate fault for exercising the harness itself. "udom-sign"
    // negates every domain-uncertainty value inside the non-negativity
    // sweep, which must make exactly that suite fail. Unknown names are
    // rejected.
    std::string inject;
    std::uint64_t seed = 90210;
};

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SelftestReport {
    std::vector<SuiteResult> suites;
    bool all_passed() const;
};

SelftestReport run_selftest(const SelftestOptions& options);

} // namespace readapt
