#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "haarfactor/sumspace.hpp"

namespace haarfactor {

// Blocks with pairwise disjoint spectra, each occupying a contiguous ordinal range, ranges
// increasing along the sequence.
struct BlockSequence {
    SpaceSpec host;
    std::vector<HaarExpansion> blocks;
};

void validate_blocks(const BlockSequence& seq);

enum class Direction { Upper, Lower };
enum class Profile { Flat, Gaussian, Spike };

std::string direction_name(Direction d);
std::string profile_name(Profile p);
Profile profile_from_name(const std::string& name);

struct EstimateRow {
    std::int64_t n = 0;
    double value = 0.0;   // ||f_1 + ... + f_n||
    double bound = 0.0;   // c (sum ||f_j||^r)^{1/r}
    double margin = 0.0;  // positive when the inequality holds
};

struct BlockEstimateReport {
    Direction direction = Direction::Upper;
    double r = 2.0;
    double c = 1.0;
    double worst_margin = 0.0;
    std::optional<std::int64_t> violating_prefix;  // first prefix with margin < -tolerance
    std::vector<EstimateRow> rows;
};

// r may be +infinity.  Upper: ||sum|| <= c (sum ||f||^r)^{1/r}; lower: ||sum|| >= c (...).
BlockEstimateReport check_block_estimate(const BlockSequence& seq, Direction dir, double r, double c,
                                         double tolerance = 1e-9);

BlockSequence random_blocks(const SpaceSpec& spec, int count, Profile profile, std::uint64_t seed,
                            bool normalize = true);

struct CurvatureRow {
    int component = 0;
    std::int64_t n = 0;
    double value = 0.0;   // sampled sup of ||(1/n) sum x_j||
    double bound = 0.0;   // n^{1/s - 1}, NaN when no constant-1 upper estimate is known
    double margin = 0.0;  // bound - value (NaN with bound)
    std::string profile;  // profile attaining the value
};

struct CurvatureTable {
    std::vector<CurvatureRow> rows;
    std::vector<double> fitted_exponent;  // per component, -slope of log value vs log n
    std::vector<double> target_exponent;  // 1 - 1/s, NaN when s is unknown
    std::vector<double> s;                // upper-estimate exponent, NaN when unknown
};

// Upper s-estimate exponent with constant 1: min(2,p) for H^p, min(2,p,q) for H^p(H^q).
std::optional<double> upper_estimate_exponent(const SpaceSpec& spec);

CurvatureTable curvature_profile(const ZTrunc& array, int n_max, int samples, std::uint64_t seed,
                                 unsigned threads = 1);

// Smallest tails found by the greedy monotone search (advance the component with the
// largest l1 contribution) so that the restricted dual norm upper bound is <= eta.
std::vector<std::int64_t> tail_profile(const ZTrunc& t, const ZFunctional& f, double eta);
std::vector<std::int64_t> tail_profile_coords(const ZTrunc& t, const Eigen::VectorXd& r, double eta);

}  // namespace haarfactor
