#pragma once

#include <string>
#include <vector>

namespace sfh::suite {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string details;
    double seconds = 0.0;
};

// Runs the acceptance battery (criteria 1-11, or the subset in `only`).
// tolerance_scale multiplies every tolerance; 1.0 is the pinned default.
std::vector<CriterionResult> run_acceptance(int workers, double tolerance_scale = 1.0,
                                            const std::vector<int>& only = {});

} // namespace sfh::suite
