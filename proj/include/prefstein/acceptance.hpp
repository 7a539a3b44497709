#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "prefstein/attachment.hpp"

namespace prefstein {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double time_limit = 0.0;  // 0: none
};

// The six-rule battery: Constant 0.5/0.9/1.0, Affine(0.5,0.5), Affine(1,0.5), Power(0.8,0.5,0.8).
std::vector<std::pair<std::string, AttachmentRule>> test_battery();

struct AcceptanceOptions {
    std::vector<int> only;      // empty: all ten
    std::uint64_t seed = 20240611;
    std::uint64_t trials = 100000;
};

// Runs the criteria in order and writes one "PASS"/"FAIL" line per criterion to `log`.
std::vector<CriterionResult> run_acceptance(std::ostream& log, const AcceptanceOptions& options = {});

}  // namespace prefstein
