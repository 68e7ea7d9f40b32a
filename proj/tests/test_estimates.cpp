#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "haarfactor/estimates.hpp"
#include "haarfactor/util.hpp"

using namespace haarfactor;

TEST_CASE("two disjoint half-interval Haar functions in H^2 give equality") {
    const auto h2 = SpaceSpec::hp(2, 3);
    BlockSequence seq{h2, {}};
    HaarExpansion a = HaarExpansion::zero_like(h2), b = HaarExpansion::zero_like(h2);
    a.set({DyadicInterval{1, 0}, 0}, 1.0);
    b.set({DyadicInterval{1, 1}, 0}, 1.0);
    seq.blocks = {a, b};
    const auto rep = check_block_estimate(seq, Direction::Upper, 2, 1);
    // oracle: disjoint square-function supports, ||f1+f2||^2 = ||f1||^2 + ||f2||^2
    const double direct = std::sqrt(std::pow(norm(h2, a), 2) + std::pow(norm(h2, b), 2));
    CHECK(rep.rows.back().value == doctest::Approx(direct).epsilon(1e-14));
    CHECK(std::fabs(rep.worst_margin) <= 1e-15);
    CHECK_FALSE(rep.violating_prefix.has_value());
}

TEST_CASE("single block has zero margin both ways") {
    const auto s = SpaceSpec::hphq(1.5, 3, 2);
    const auto seq = random_blocks(s, 1, Profile::Gaussian, 4);
    for (auto dir : {Direction::Upper, Direction::Lower})
        for (double r : {1.0, 2.0, 3.0, std::numeric_limits<double>::infinity()})
            CHECK(std::fabs(check_block_estimate(seq, dir, r, 1).worst_margin) <= 1e-14);
    CHECK_THROWS(check_block_estimate(BlockSequence{s, {}}, Direction::Upper, 2, 1));
}

TEST_CASE("random_blocks: singleton, disjointness, normalization, capacity") {
    const auto s = SpaceSpec::hp(3, 5);
    CHECK(random_blocks(s, 1, Profile::Flat, 1).blocks.size() == 1);
    for (auto prof : {Profile::Flat, Profile::Gaussian, Profile::Spike})
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto seq = random_blocks(s, 7, prof, seed);
            std::set<std::size_t> used;
            for (const auto& b : seq.blocks) {
                CHECK(norm(s, b) == doctest::Approx(1.0).epsilon(1e-12));
                for (std::size_t i = 0; i < b.coeffs.size(); ++i)
                    if (b.coeffs[i] != 0.0) {
                        CHECK_FALSE(used.contains(i));
                        used.insert(i);
                    }
            }
            CHECK_NOTHROW(validate_blocks(seq));
        }
    CHECK_THROWS_AS(random_blocks(SpaceSpec::hp(2, 2), 8, Profile::Spike, 1), std::length_error);
    CHECK(random_blocks(s, 5, Profile::Gaussian, 3).blocks[2].coeffs == random_blocks(s, 5, Profile::Gaussian, 3).blocks[2].coeffs);
}

TEST_CASE("non-successive blocks are rejected") {
    const auto s = SpaceSpec::hp(2, 2);
    HaarExpansion a = HaarExpansion::zero_like(s), b = HaarExpansion::zero_like(s);
    a.coeffs[3] = 1.0;
    b.coeffs[1] = 1.0;
    CHECK_THROWS(check_block_estimate(BlockSequence{s, {a, b}}, Direction::Upper, 2, 1));
}

TEST_CASE("r-estimates with constant 1 across the case splits") {
    const std::vector<std::pair<double, double>> grid = {{1, 3}, {1.5, 5}, {3, 1.5}, {1.5, 1.5}, {3, 5}};
    for (auto [p, q] : grid) {
        const auto s = SpaceSpec::hphq(p, q, 3);
        const double lo = std::max({2.0, p, q}), up = std::min({2.0, p, q});
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            const auto prof = static_cast<Profile>(seed % 3);
            const auto seq = random_blocks(s, 2 + static_cast<int>(seed % 7), prof, seed);
            CHECK(check_block_estimate(seq, Direction::Lower, lo, 1).worst_margin >= -1e-9);
            CHECK(check_block_estimate(seq, Direction::Upper, up, 1).worst_margin >= -1e-9);
        }
    }
}

TEST_CASE("a wrong exponent is caught") {
    // In H^1 the lower 1-estimate fails for disjointly supported square functions.
    const auto s = SpaceSpec::hp(1, 4);
    BlockSequence seq{s, {}};
    HaarExpansion a = HaarExpansion::zero_like(s), b = HaarExpansion::zero_like(s);
    a.coeffs[0] = 1.0;
    b.coeffs[1] = 2.0;  // overlaps a's support in the square function
    seq.blocks = {a, b};
    const auto rep = check_block_estimate(seq, Direction::Lower, 1, 1);
    CHECK(rep.worst_margin < -1e-3);
    CHECK(rep.violating_prefix == 2);
}

TEST_CASE("duality transfer in H^2: primal upper 2 and dual lower 2 estimates") {
    const auto s = SpaceSpec::hp(2, 5);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto seq = random_blocks(s, 6, Profile::Gaussian, seed);
        CHECK(check_block_estimate(seq, Direction::Upper, 2, 1).worst_margin >= -1e-12);
        // dual blocks with the same spectra, measured by the dual norm
        std::vector<double> acc(static_cast<std::size_t>(s.dim()), 0.0);
        double sumsq = 0.0;
        for (const auto& b : seq.blocks) {
            std::vector<double> r(b.coeffs.size());
            const auto& bn = basis_norms(s);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = b.coeffs[i] * bn[i];
            const double dn = component_dual_norm(s, r).lower;
            sumsq += dn * dn;
            for (std::size_t i = 0; i < r.size(); ++i) acc[i] += r[i];
        }
        CHECK(component_dual_norm(s, acc).lower >= std::sqrt(sumsq) - 1e-12);
    }
}

TEST_CASE("curvature of H^2 is exactly n^{-1/2}") {
    const ZTrunc t({SpaceSpec::hp(2, 7)});
    const auto tab = curvature_profile(t, 32, 2, 1);
    for (const auto& row : tab.rows) CHECK(row.value == doctest::Approx(std::pow(static_cast<double>(row.n), -0.5)).epsilon(1e-12));
    CHECK(tab.rows.front().value == doctest::Approx(1.0));
    CHECK(tab.fitted_exponent[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("upper-s bound holds and p <= 2 exponents are exact") {
    const ZTrunc t({SpaceSpec::hp(1, 7), SpaceSpec::hp(1.5, 7), SpaceSpec::hp(3, 7), SpaceSpec::hphq(1.5, 3, 3)});
    const auto tab = curvature_profile(t, 32, 2, 7, 2);
    for (const auto& row : tab.rows) CHECK(row.value <= row.bound + 1e-9);
    CHECK(tab.fitted_exponent[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(tab.fitted_exponent[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK_THROWS_AS(curvature_profile(ZTrunc({SpaceSpec::hp(2, 2)}), 64, 1, 1), std::length_error);
}

TEST_CASE("tail_profile examples and monotonicity") {
    const ZTrunc t({SpaceSpec::hp(2, 2), SpaceSpec::hphq(2, 2, 1), SpaceSpec::vmo(2)});
    const auto e = ZFunctional::coordinate(t, 1, 0);
    CHECK(tail_profile(t, e, 0.5) == std::vector<std::int64_t>{0, 1, 0});
    Rng rng(3);
    auto f = ZFunctional::zero(t);
    for (auto& p : f.parts)
        for (auto& c : p) c = rng.normal();
    const double full = restricted_dual_norm(t, f, {0, 0, 0}).upper;
    CHECK(tail_profile(t, f, full + 1.0) == std::vector<std::int64_t>{0, 0, 0});
    std::vector<std::int64_t> prev = {0, 0, 0};
    for (double eta = full; eta > 1e-3; eta *= 0.7) {
        const auto m = tail_profile(t, f, eta);
        CHECK(restricted_dual_norm(t, f, m).upper <= eta);
        for (std::size_t k = 0; k < 3; ++k) CHECK(m[k] >= prev[k]);
        prev = m;
    }
    CHECK_THROWS(tail_profile(t, f, 0.0));
}
