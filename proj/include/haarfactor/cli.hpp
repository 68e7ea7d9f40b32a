#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "haarfactor/json_io.hpp"

namespace haarfactor {

// Exit codes: 0 success, 1 certificate/suite/replay failure, 2 usage or input error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::vector<std::string> suite_names();

struct REstimateSuiteOptions {
    std::vector<std::pair<double, double>> grid = {{1.5, 1.5}, {1.5, 3}, {3, 1.5}, {3, 5}, {1, 3}};
    int sequences = 200;
    int depth = 3;  // 2D H^p(H^q) depth
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

// Lower max(2,p,q)- and upper min(2,p,q)-estimates with constant 1; one case per (p, q, direction),
// one row per sequence at its worst prefix.
SuiteReport run_r_estimate_suite(const REstimateSuiteOptions& opt);

struct CurvatureSuiteOptions {
    std::vector<double> ps = {1, 1.5, 2, 3, 5};
    int depth = 10;
    int n_max = 64;
    int samples = 4;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double fit_tolerance = 0.05;
};

// Per H^p component: "bound" case (n^{1/s-1} never exceeded by more than 1e-9) and "fit" case
// (fitted decay exponent within fit_tolerance of 1 - 1/min(2,p)).
SuiteReport run_curvature_suite(const CurvatureSuiteOptions& opt);

}  // namespace haarfactor
