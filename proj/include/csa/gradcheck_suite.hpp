#pragma once

#include <string>
#include <vector>

#include "csa/autodiff.hpp"

namespace csa::ad {

struct GradcheckRow {
    std::string name;
    double max_rel_err = 0.0;
    bool pass = false;
};

// Central-difference checks for every differentiable op (5 seeds each) plus
// a one-layer encoder with the SBM mask frozen all-true, plus a negative
// control whose backward rule is wrong on purpose (pass == bug detected).
std::vector<GradcheckRow> run_gradcheck_suite(uint64_t seed, double tolerance = 1e-4);

} // namespace csa::ad
