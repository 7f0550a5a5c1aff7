#ifndef QDB_SELFTEST_HPP
#define QDB_SELFTEST_HPP

#include <cstdint>
#include <string>
#include <vector>

// Named invariant suites over seeded random instances. The CLI selftest
// command runs them all; individual suites are also exercised from the unit
// tests.

namespace qdb::selftest {

struct InvariantResult {
    std::string name;
    int trials = 0;
    double max_residual = 0.0;
    double tol = 0.0;
    bool pass = false;
};

struct Report {
    std::vector<InvariantResult> results;
    bool all_pass = true;
};

Report run_all(std::uint64_t seed, int trials);
std::string format_report(const Report& rep, std::uint64_t seed, int trials);

}  // namespace qdb::selftest

#endif
