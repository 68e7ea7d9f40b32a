#include <doctest.h>

#include <cmath>

#include "haarfactor/funcspace.hpp"
#include "haarfactor/util.hpp"

using namespace haarfactor;

namespace {

// Independent oracle: evaluate every Haar function pointwise at cell midpoints and
// integrate the resulting step functions naively.
struct GridOracle {
    int depth;
    int res;
    std::vector<HaarIndex> idx;

    GridOracle(SpaceKindDim dim, int d) : depth(d), res(d + 1), idx(space_index_order(dim, d)) {}

    double mid(std::int64_t c) const { return (static_cast<double>(c) + 0.5) / static_cast<double>(std::int64_t{1} << res); }

    double norm1d(Kind kind, double p, const std::vector<double>& a) const {
        const std::int64_t cells = std::int64_t{1} << res;
        const double w = 1.0 / static_cast<double>(cells);
        if (kind == Kind::VMO) {
            double best = 0.0;
            for (const auto& I : idx) {
                double s = 0.0;
                for (std::size_t j = 0; j < idx.size(); ++j)
                    if (I.interval().contains(idx[j].interval())) s += a[j] * a[j] * idx[j].interval().measure();
                best = std::max(best, s / I.interval().measure());
            }
            return std::sqrt(best);
        }
        double total = 0.0;
        for (std::int64_t c = 0; c < cells; ++c) {
            double f = 0.0, s2 = 0.0;
            for (std::size_t j = 0; j < idx.size(); ++j) {
                const int h = haar_eval(idx[j].interval(), mid(c));
                f += a[j] * h;
                s2 += a[j] * a[j] * h * h;
            }
            total += w * std::pow(kind == Kind::Hp ? std::sqrt(s2) : std::fabs(f), p);
        }
        return std::pow(total, 1.0 / p);
    }

    double norm2d(Kind kind, double p, double q, const std::vector<double>& a) const {
        const std::int64_t cells = std::int64_t{1} << res;
        const double w = 1.0 / static_cast<double>(cells);
        if (kind == Kind::VMOHr) {
            const auto xs = space_index_order(SpaceKindDim::OneParam, depth);
            double best = 0.0;
            for (const auto& I0 : xs) {
                double acc = 0.0;
                for (std::int64_t cx = 0; cx < cells; ++cx) {
                    if (haar_eval(I0.interval(), mid(cx)) == 0) continue;
                    double inner = 0.0;
                    for (std::int64_t cy = 0; cy < cells; ++cy) {
                        // square function in y of g_x = sum_{J subset I0} f_J h_J(x)
                        double s2 = 0.0;
                        for (const auto& K : xs) {
                            const int hk = haar_eval(K.interval(), mid(cy));
                            if (hk == 0) continue;
                            double ck = 0.0;
                            for (std::size_t j = 0; j < idx.size(); ++j) {
                                const auto& R = idx[j].rect();
                                if (!(R.y == K.interval()) || !I0.interval().contains(R.x)) continue;
                                ck += a[j] * haar_eval(R.x, mid(cx));
                            }
                            s2 += ck * ck;
                        }
                        inner += w * std::pow(std::sqrt(s2), p);
                    }
                    const double hr = std::pow(inner, 1.0 / p);
                    acc += w * hr * hr;
                }
                best = std::max(best, acc / I0.interval().measure());
            }
            return std::sqrt(best);
        }
        double total = 0.0;
        for (std::int64_t cx = 0; cx < cells; ++cx) {
            double inner = 0.0;
            for (std::int64_t cy = 0; cy < cells; ++cy) {
                double f = 0.0, s2 = 0.0;
                for (std::size_t j = 0; j < idx.size(); ++j) {
                    const int h = rect_haar_eval(idx[j].rect(), mid(cx), mid(cy));
                    f += a[j] * h;
                    s2 += a[j] * a[j] * h * h;
                }
                inner += w * std::pow(kind == Kind::HpHq ? std::sqrt(s2) : std::fabs(f), q);
            }
            total += w * std::pow(std::pow(inner, 1.0 / q), p);
        }
        return std::pow(total, 1.0 / p);
    }
};

std::vector<double> random_coeffs(Rng& rng, std::size_t n) {
    std::vector<double> a(n);
    for (auto& x : a) x = rng.normal();
    return a;
}

HaarExpansion from(const SpaceSpec& s, const std::vector<double>& a) {
    HaarExpansion f = HaarExpansion::zero_like(s);
    f.coeffs = a;
    return f;
}

}  // namespace

TEST_CASE("square function examples") {
    HaarExpansion f(SpaceKindDim::OneParam, 1);
    f.coeffs[0] = 1.0;
    auto S = square_function(f);
    for (double v : S.values) CHECK(v == 1.0);
    f.coeffs[1] = 1.0;  // + h_[0,1/2)
    S = square_function(f);
    REQUIRE(S.values.size() == 4);
    CHECK(S.values[0] == doctest::Approx(std::sqrt(2.0)));
    CHECK(S.values[1] == doctest::Approx(std::sqrt(2.0)));
    CHECK(S.values[2] == 1.0);
    CHECK(S.values[3] == 1.0);
    HaarExpansion z(SpaceKindDim::OneParam, 3);
    for (double v : square_function(z).values) CHECK(v == 0.0);
}

TEST_CASE("square function and evaluation agree with pointwise oracle (2D)") {
    Rng rng(3);
    const int d = 2;
    HaarExpansion f(SpaceKindDim::TwoParam, d);
    f.coeffs = random_coeffs(rng, f.coeffs.size());
    const auto idx = space_index_order(SpaceKindDim::TwoParam, d);
    const auto S = square_function(f);
    const auto F = evaluate(f);
    const std::int64_t cells = 8;
    for (std::int64_t cx = 0; cx < cells; ++cx)
        for (std::int64_t cy = 0; cy < cells; ++cy) {
            const double x = (cx + 0.5) / cells, y = (cy + 0.5) / cells;
            double v = 0.0, s2 = 0.0;
            for (std::size_t j = 0; j < idx.size(); ++j) {
                const int h = rect_haar_eval(idx[j].rect(), x, y);
                v += f.coeffs[j] * h;
                s2 += f.coeffs[j] * f.coeffs[j] * h * h;
            }
            CHECK(F.values[static_cast<std::size_t>(cx * cells + cy)] == doctest::Approx(v).epsilon(1e-12));
            CHECK(S.values[static_cast<std::size_t>(cx * cells + cy)] == doctest::Approx(std::sqrt(s2)).epsilon(1e-12));
        }
}

TEST_CASE("norm examples") {
    HaarExpansion h0(SpaceKindDim::OneParam, 3);
    h0.coeffs[0] = 1.0;
    CHECK(norm(SpaceSpec::hp(2, 3), h0) == doctest::Approx(1.0));
    HaarExpansion q(SpaceKindDim::OneParam, 3);
    q.set({DyadicInterval{2, 1}, 0}, 1.0);
    CHECK(norm(SpaceSpec::hp(2, 3), q) == doctest::Approx(0.5).epsilon(1e-14));
    HaarExpansion r(SpaceKindDim::TwoParam, 2);
    r.coeffs[0] = 1.0;
    CHECK(norm(SpaceSpec::hphq(1, 3, 2), r) == doctest::Approx(1.0));
    CHECK(norm(SpaceSpec::vmo(3), h0) == doctest::Approx(1.0));
    CHECK_THROWS(norm(SpaceSpec::hphq(1, 3, 2), h0));
    CHECK_THROWS(norm(SpaceSpec::hp(0.5, 3), h0));
}

TEST_CASE("1D norms match the grid oracle") {
    Rng rng(5);
    const int d = 3;
    GridOracle o(SpaceKindDim::OneParam, d);
    for (int t = 0; t < 4; ++t) {
        const auto a = random_coeffs(rng, static_cast<std::size_t>(dim1d(d)));
        for (double p : {1.0, 1.5, 2.0, 3.0, 5.0}) {
            CHECK(norm_coeffs(SpaceSpec::hp(p, d), a) == doctest::Approx(o.norm1d(Kind::Hp, p, a)).epsilon(1e-12));
            CHECK(norm_coeffs(SpaceSpec::lp(p, d), a) == doctest::Approx(o.norm1d(Kind::Lp, p, a)).epsilon(1e-12));
        }
        CHECK(norm_coeffs(SpaceSpec::vmo(d), a) == doctest::Approx(o.norm1d(Kind::VMO, 2, a)).epsilon(1e-12));
    }
}

TEST_CASE("2D norms match the grid oracle") {
    Rng rng(6);
    const int d = 1;
    GridOracle o(SpaceKindDim::TwoParam, d);
    for (int t = 0; t < 3; ++t) {
        const auto a = random_coeffs(rng, 9);
        for (auto [p, qq] : {std::pair{1.0, 3.0}, {1.5, 5.0}, {3.0, 1.5}, {2.0, 2.0}}) {
            CHECK(norm_coeffs(SpaceSpec::hphq(p, qq, d), a) == doctest::Approx(o.norm2d(Kind::HpHq, p, qq, a)).epsilon(1e-12));
            CHECK(norm_coeffs(SpaceSpec::lrls(p, qq, d), a) == doctest::Approx(o.norm2d(Kind::LrLs, p, qq, a)).epsilon(1e-12));
        }
        for (double r : {1.0, 2.0, 3.0})
            CHECK(norm_coeffs(SpaceSpec::vmohr(r, d), a) == doctest::Approx(o.norm2d(Kind::VMOHr, r, 2, a)).epsilon(1e-12));
    }
}

TEST_CASE("VMO(H^r) matches the oracle at depth 2") {
    Rng rng(8);
    GridOracle o(SpaceKindDim::TwoParam, 2);
    const auto a = random_coeffs(rng, 49);
    CHECK(norm_coeffs(SpaceSpec::vmohr(3, 2), a) == doctest::Approx(o.norm2d(Kind::VMOHr, 3, 2, a)).epsilon(1e-12));
}

TEST_CASE("closed-form basis norms agree with direct evaluation") {
    const std::vector<SpaceSpec> specs = {SpaceSpec::hp(1.5, 3), SpaceSpec::lp(3, 3), SpaceSpec::vmo(3),
                                          SpaceSpec::hphq(1, 3, 2), SpaceSpec::lrls(1.5, 5, 2), SpaceSpec::vmohr(3, 2)};
    for (const auto& s : specs) {
        const auto& bn = basis_norms(s);
        for (std::int64_t j = 0; j < s.dim(); ++j) {
            std::vector<double> e(static_cast<std::size_t>(s.dim()), 0.0);
            e[static_cast<std::size_t>(j)] = 1.0;
            CHECK(bn[static_cast<std::size_t>(j)] == doctest::Approx(norm_coeffs(s, e)).epsilon(1e-13));
        }
    }
}

TEST_CASE("||h_I||_{H^p} = |I|^{1/p} up to depth 8") {
    const int d = 8;
    for (double p : {1.0, 1.5, 2.0, 3.0, 5.0}) {
        const auto s = SpaceSpec::hp(p, d);
        double worst = 0.0;
        std::vector<double> e(static_cast<std::size_t>(s.dim()), 0.0);
        for (std::int64_t j = 0; j < s.dim(); ++j) {
            e[static_cast<std::size_t>(j)] = 1.0;
            const double m = interval_from_ordinal0(j).measure();
            worst = std::max(worst, std::fabs(norm_coeffs(s, e) - std::pow(m, 1.0 / p)));
            e[static_cast<std::size_t>(j)] = 0.0;
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("homogeneity, triangle inequality, unconditionality, refinement") {
    Rng rng(9);
    const std::vector<SpaceSpec> specs = {SpaceSpec::hp(1, 3),       SpaceSpec::hp(3, 3),        SpaceSpec::lp(1.5, 3),
                                          SpaceSpec::vmo(3),         SpaceSpec::hphq(1.5, 3, 2), SpaceSpec::lrls(3, 1.5, 2),
                                          SpaceSpec::vmohr(1.5, 2)};
    for (const auto& s : specs) {
        for (int t = 0; t < 10; ++t) {
            const auto a = random_coeffs(rng, static_cast<std::size_t>(s.dim()));
            const auto b = random_coeffs(rng, static_cast<std::size_t>(s.dim()));
            const double lam = rng.uniform(-3, 3);
            std::vector<double> sa(a.size()), ab(a.size()), flip(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                sa[i] = lam * a[i];
                ab[i] = a[i] + b[i];
                flip[i] = rng.sign() * a[i];
            }
            const double na = norm_coeffs(s, a), nb = norm_coeffs(s, b);
            CHECK(norm_coeffs(s, sa) == doctest::Approx(std::fabs(lam) * na).epsilon(1e-10));
            CHECK(norm_coeffs(s, ab) <= na + nb + 1e-10);
            if (s.kind == Kind::Hp || s.kind == Kind::HpHq || s.kind == Kind::VMO) CHECK(norm_coeffs(s, flip) == na);
            auto f = from(s, a);
            CHECK(norm(s, f.reencode(s.depth + 1)) == doctest::Approx(na).epsilon(1e-12));
        }
    }
}

TEST_CASE("dual_coefficient reads coordinates") {
    HaarExpansion f(SpaceKindDim::OneParam, 2);
    const HaarIndex left{DyadicInterval{1, 0}, 2}, right{DyadicInterval{1, 1}, 3}, top{DyadicInterval{0, 0}, 1};
    f.set(left, 3.0);
    f.set(right, 1.0);
    CHECK(dual_coefficient(left, f) == 3.0);
    CHECK(dual_coefficient(top, HaarExpansion(SpaceKindDim::OneParam, 2)) == 0.0);
    CHECK(dual_coefficient(HaarIndex{DyadicInterval{5, 0}, 0}, f) == 0.0);
    const auto idx = space_index_order(SpaceKindDim::OneParam, 4);
    for (const auto& i : idx)
        for (const auto& j : idx) {
            HaarExpansion e(SpaceKindDim::OneParam, 4);
            e.set(j, 1.0);
            CHECK(dual_coefficient(i, e) == (i.ordinal == j.ordinal ? 1.0 : 0.0));
        }
}
