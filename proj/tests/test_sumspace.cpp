#include <doctest.h>

#include <cmath>

#include "haarfactor/sumspace.hpp"
#include "haarfactor/util.hpp"

using namespace haarfactor;

namespace {

ZTrunc mixed() { return ZTrunc({SpaceSpec::hp(2, 2), SpaceSpec::hphq(1.5, 3, 1), SpaceSpec::vmo(2)}); }

ZVector random_vector(const ZTrunc& t, Rng& rng) {
    auto v = ZVector::zero(t);
    for (auto& p : v.parts)
        for (auto& c : p.coeffs) c = rng.normal();
    return v;
}

ZFunctional random_functional(const ZTrunc& t, Rng& rng) {
    auto f = ZFunctional::zero(t);
    for (auto& p : f.parts)
        for (auto& c : p) c = rng.normal();
    return f;
}

}  // namespace

TEST_CASE("global enumeration follows pair_encode and skips exhausted components") {
    const ZTrunc t({SpaceSpec::hp(2, 0), SpaceSpec::hp(2, 1)});  // dims 1 and 3
    REQUIRE(t.size() == 4);
    // nu(1,1)=1, nu(1,2)=2 skipped, nu(2,1)=3, nu(2,2)=5, nu(2,3)=8
    CHECK(t.coord(0) == std::pair<int, std::int64_t>{0, 0});
    CHECK(t.coord(1) == std::pair<int, std::int64_t>{1, 0});
    CHECK(t.coord(2) == std::pair<int, std::int64_t>{1, 1});
    CHECK(t.coord(3) == std::pair<int, std::int64_t>{1, 2});
    const auto tm = mixed();
    for (std::int64_t g = 0; g < tm.size(); ++g) {
        const auto [k, j] = tm.coord(g);
        CHECK(tm.global(k, j) == g);
        if (g > 0) {
            const auto [k0, j0] = tm.coord(g - 1);
            CHECK(pair_encode(k0 + 1, j0 + 1) < pair_encode(k + 1, j + 1));
        }
    }
    CHECK_THROWS(ZTrunc(std::vector<SpaceSpec>{}));
}

TEST_CASE("z_norm is the max of component norms") {
    const ZTrunc t({SpaceSpec::hp(2, 1), SpaceSpec::hp(2, 1), SpaceSpec::hp(2, 1)});
    auto v = ZVector::zero(t);
    CHECK(z_norm(t, v) == 0.0);
    v.parts[0].coeffs[0] = 1.0;
    v.parts[1].coeffs[0] = 3.0;
    v.parts[2].coeffs[0] = 2.0;
    CHECK(z_norm(t, v) == 3.0);
    const ZTrunc one({SpaceSpec::hp(3, 2)});
    Rng rng(1);
    auto w = random_vector(one, rng);
    CHECK(z_norm(one, w) == norm(one.spec(0), w.parts[0]));
    auto bad = ZVector::zero(one);
    bad.parts.push_back(bad.parts[0]);
    CHECK_THROWS(z_norm(one, bad));
}

TEST_CASE("projections") {
    const auto t = mixed();
    Rng rng(2);
    const auto v = random_vector(t, rng);
    const auto all = project({0, 1, 2}, v);
    for (std::size_t k = 0; k < 3; ++k) CHECK(all.parts[k].coeffs == v.parts[k].coeffs);
    CHECK(z_norm(t, project({}, v)) == 0.0);
    for (int i = 0; i < 100; ++i) {
        const auto w = random_vector(t, rng);
        std::set<int> N;
        for (int k = 0; k < 3; ++k)
            if (rng.uniform() < 0.5) N.insert(k);
        const auto p = project(N, w);
        CHECK(z_norm(t, p) <= z_norm(t, w));
        const auto pp = project(N, p);
        for (std::size_t k = 0; k < 3; ++k) CHECK(pp.parts[k].coeffs == p.parts[k].coeffs);
    }
}

TEST_CASE("pairing: biorthogonality and bilinearity") {
    const auto t = mixed();
    for (int k = 0; k < t.K(); ++k)
        for (std::int64_t j = 0; j < t.dim(k); ++j)
            for (std::int64_t i = 0; i < t.dim(k); ++i)
                CHECK(pair(ZFunctional::coordinate(t, k, j), basis_vector(t, k, i)) ==
                      doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-15));
    Rng rng(3);
    for (int n = 0; n < 50; ++n) {
        const auto f = random_functional(t, rng), g = random_functional(t, rng);
        const auto v = random_vector(t, rng), w = random_vector(t, rng);
        const double a = rng.normal(), b = rng.normal();
        auto lin = ZVector::zero(t);
        auto flin = ZFunctional::zero(t);
        for (std::size_t k = 0; k < 3; ++k) {
            for (std::size_t j = 0; j < lin.parts[k].coeffs.size(); ++j)
                lin.parts[k].coeffs[j] = a * v.parts[k].coeffs[j] + b * w.parts[k].coeffs[j];
            for (std::size_t j = 0; j < flin.parts[k].size(); ++j) flin.parts[k][j] = a * f.parts[k][j] + b * g.parts[k][j];
        }
        CHECK(std::fabs(pair(f, lin) - (a * pair(f, v) + b * pair(f, w))) <= 1e-12 * (1 + std::fabs(pair(f, lin))));
        CHECK(std::fabs(pair(flin, v) - (a * pair(f, v) + b * pair(g, v))) <= 1e-12 * (1 + std::fabs(pair(flin, v))));
        // oracle: expand by definition over normalized coordinates
        const double viaCoords = functional_coords(t, f).dot(to_coords(t, v));
        CHECK(pair(f, v) == doctest::Approx(viaCoords).epsilon(1e-12));
    }
}

TEST_CASE("coordinate round trips") {
    const auto t = mixed();
    Rng rng(4);
    const auto v = random_vector(t, rng);
    const auto back = from_coords(t, to_coords(t, v));
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t j = 0; j < v.parts[k].coeffs.size(); ++j)
            CHECK(back.parts[k].coeffs[j] == doctest::Approx(v.parts[k].coeffs[j]).epsilon(1e-15));
    CHECK(z_norm_coords(t, to_coords(t, v)) == doctest::Approx(z_norm(t, v)).epsilon(1e-13));
}

TEST_CASE("restricted dual norm examples") {
    const auto t = mixed();
    const auto e11 = ZFunctional::coordinate(t, 0, 0);
    auto r = restricted_dual_norm(t, e11, {1, 0, 0});
    CHECK(r.upper == 0.0);
    CHECK(r.lower == 0.0);
    r = restricted_dual_norm(t, e11, {0, 0, 0});
    CHECK(r.lower == doctest::Approx(1.0));
    CHECK(r.upper == doctest::Approx(1.0));
    CHECK_THROWS(restricted_dual_norm(t, e11, {0, 0}));
    CHECK_THROWS(restricted_dual_norm(t, e11, {0, 0, 99}));
}

TEST_CASE("restricted dual norm of a component-1 functional ignores other tails") {
    const auto t = mixed();
    Rng rng(5);
    auto f = ZFunctional::zero(t);
    for (auto& c : f.parts[0]) c = rng.normal();
    const auto base = restricted_dual_norm(t, f, {2, 0, 0});
    for (std::int64_t m1 = 0; m1 <= t.dim(1); ++m1)
        for (std::int64_t m2 = 0; m2 <= t.dim(2); m2 += 3) {
            const auto r = restricted_dual_norm(t, f, {2, m1, m2});
            CHECK(r.lower == base.lower);
            CHECK(r.upper == base.upper);
        }
    // oracle: random search over the unit ball of the tail in H^2 never beats the upper bound,
    // and for H^2 (orthonormal normalized basis) the lower bound is the exact l2 norm.
    const auto r = functional_coords(t, f);
    double l2 = 0.0;
    for (std::int64_t j = 2; j < t.dim(0); ++j) l2 += r[t.global(0, j)] * r[t.global(0, j)];
    CHECK(base.lower == doctest::Approx(std::sqrt(l2)).epsilon(1e-12));
    CHECK(base.lower <= base.upper + 1e-15);
}

TEST_CASE("restricted dual norm is non-increasing in every tail start") {
    const auto t = mixed();
    Rng rng(6);
    for (int n = 0; n < 20; ++n) {
        const auto f = random_functional(t, rng);
        std::vector<std::int64_t> m = {0, 0, 0};
        double prev = restricted_dual_norm(t, f, m).upper;
        for (int step = 0; step < 15; ++step) {
            const int k = static_cast<int>(rng.below(3));
            if (m[static_cast<std::size_t>(k)] < t.dim(k)) ++m[static_cast<std::size_t>(k)];
            const double cur = restricted_dual_norm(t, f, m).upper;
            CHECK(cur <= prev + 1e-15);
            prev = cur;
        }
    }
}
