#include "haarfactor/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "haarfactor/util.hpp"

namespace haarfactor {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double lr_sum(const std::vector<double>& norms, double r) {
    if (std::isinf(r)) return norms.empty() ? 0.0 : *std::max_element(norms.begin(), norms.end());
    double s = 0.0;
    for (double x : norms) s += std::pow(x, r);
    return std::pow(s, 1.0 / r);
}

std::pair<std::int64_t, std::int64_t> support_range(const HaarExpansion& f) {
    std::int64_t lo = -1, hi = -1;
    for (std::int64_t i = 0; i < f.size(); ++i)
        if (f.coeffs[static_cast<std::size_t>(i)] != 0.0) {
            if (lo < 0) lo = i;
            hi = i;
        }
    return {lo, hi};
}

}  // namespace

std::string direction_name(Direction d) { return d == Direction::Upper ? "upper" : "lower"; }

std::string profile_name(Profile p) {
    switch (p) {
        case Profile::Flat: return "flat";
        case Profile::Gaussian: return "gaussian";
        case Profile::Spike: return "spike";
    }
    return "?";
}

Profile profile_from_name(const std::string& name) {
    for (Profile p : {Profile::Flat, Profile::Gaussian, Profile::Spike})
        if (profile_name(p) == name) return p;
    throw std::invalid_argument("unknown block profile '" + name + "'");
}

void validate_blocks(const BlockSequence& seq) {
    std::int64_t prev_hi = -1;
    for (const auto& b : seq.blocks) {
        if (b.dim != seq.host.dim_kind() || b.depth != seq.host.depth)
            throw std::invalid_argument("block does not live in the host space");
        const auto [lo, hi] = support_range(b);
        if (lo < 0) continue;
        if (lo <= prev_hi) throw std::invalid_argument("blocks are not successive in the Haar order");
        prev_hi = hi;
    }
}

BlockEstimateReport check_block_estimate(const BlockSequence& seq, Direction dir, double r, double c,
                                         double tolerance) {
    if (seq.blocks.empty()) throw std::invalid_argument("check_block_estimate: empty sequence");
    if (!(r >= 1.0)) throw std::invalid_argument("check_block_estimate: r must be >= 1 or infinite");
    if (!(c > 0.0)) throw std::invalid_argument("check_block_estimate: c must be positive");
    validate_blocks(seq);
    BlockEstimateReport rep;
    rep.direction = dir;
    rep.r = r;
    rep.c = c;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    HaarExpansion sum = HaarExpansion::zero_like(seq.host);
    std::vector<double> norms;
    for (std::size_t n = 0; n < seq.blocks.size(); ++n) {
        const auto& b = seq.blocks[n];
        for (std::size_t i = 0; i < sum.coeffs.size(); ++i) sum.coeffs[i] += b.coeffs[i];
        norms.push_back(norm(seq.host, b));
        EstimateRow row;
        row.n = static_cast<std::int64_t>(n) + 1;
        row.value = norm(seq.host, sum);
        row.bound = c * lr_sum(norms, r);
        row.margin = dir == Direction::Upper ? row.bound - row.value : row.value - row.bound;
        rep.worst_margin = std::min(rep.worst_margin, row.margin);
        if (!rep.violating_prefix && row.margin < -tolerance) rep.violating_prefix = row.n;
        rep.rows.push_back(row);
    }
    return rep;
}

BlockSequence random_blocks(const SpaceSpec& spec, int count, Profile profile, std::uint64_t seed, bool normalize) {
    spec.validate();
    if (count < 1) throw std::invalid_argument("random_blocks: count must be >= 1");
    const auto dim = spec.dim();
    if (count > dim) throw std::length_error("random_blocks: capacity exceeded (" + std::to_string(count) +
                                             " blocks in dimension " + std::to_string(dim) + ")");
    Rng rng(seed);
    std::vector<std::int64_t> widths(static_cast<std::size_t>(count), 1);
    if (profile != Profile::Spike) {
        const std::int64_t wmax = std::max<std::int64_t>(1, std::min<std::int64_t>(dim / count, 64));
        for (auto& w : widths) w = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(wmax)));
    }
    std::int64_t total = 0;
    for (auto w : widths) total += w;
    const std::int64_t slack = dim - total;
    // spread the slack as random gaps before each block
    std::vector<std::int64_t> gaps(static_cast<std::size_t>(count) + 1, 0);
    for (std::int64_t s = 0, left = slack; s < count && left > 0; ++s) {
        const auto g = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(std::min<std::int64_t>(left, 2 * (slack / count) + 1) + 1)));
        gaps[static_cast<std::size_t>(s)] = g;
        left -= g;
    }
    BlockSequence seq{spec, {}};
    std::int64_t pos = 0;
    for (int b = 0; b < count; ++b) {
        pos += gaps[static_cast<std::size_t>(b)];
        HaarExpansion f = HaarExpansion::zero_like(spec);
        const auto w = widths[static_cast<std::size_t>(b)];
        bool any = false;
        for (std::int64_t i = 0; i < w; ++i) {
            double v = 0.0;
            switch (profile) {
                case Profile::Spike: v = rng.sign(); break;
                case Profile::Flat: v = rng.sign(); break;
                case Profile::Gaussian: v = rng.uniform() < 0.5 ? rng.normal() : 0.0; break;
            }
            if (i == w - 1 && !any && v == 0.0) v = rng.normal();
            any = any || v != 0.0;
            f.coeffs[static_cast<std::size_t>(pos + i)] = v;
        }
        pos += w;
        if (normalize) {
            const double n = norm(spec, f);
            for (auto& c : f.coeffs) c /= n;
        }
        seq.blocks.push_back(std::move(f));
    }
    return seq;
}

std::optional<double> upper_estimate_exponent(const SpaceSpec& spec) {
    if (spec.kind == Kind::Hp) return std::min(2.0, spec.p);
    if (spec.kind == Kind::HpHq) return std::min({2.0, spec.p, spec.q});
    return std::nullopt;
}

namespace {

// normalized block concentrated on one level inside region R (1D)
void add_level_tiling(const SpaceSpec& spec, const DyadicInterval& R, int level, double scale, std::vector<double>& acc) {
    std::vector<double> blk(acc.size(), 0.0);
    const int t = level - R.level;
    const std::int64_t base = (std::int64_t{1} << level) - 1 + (R.pos << t);
    for (std::int64_t i = 0; i < (std::int64_t{1} << t); ++i) blk[static_cast<std::size_t>(base + i)] = 1.0;
    const double n = norm_coeffs(spec, blk);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += scale * blk[i] / n;
}

struct Candidate {
    double value;
    std::string profile;
};

Candidate spike_value(const SpaceSpec& spec, std::int64_t n) {
    // n same-level basis elements (1D: intervals; 2D: rectangles of equal side levels)
    int level = 0;
    const std::int64_t per_level = spec.two_param() ? 4 : 2;
    std::int64_t cap = 1;
    while (cap < n && level < spec.depth) {
        ++level;
        cap *= per_level;
    }
    if (cap < n) return {kNaN, "spike"};
    const auto& bn = basis_norms(spec);
    std::vector<double> acc(static_cast<std::size_t>(spec.dim()), 0.0);
    std::int64_t placed = 0;
    if (!spec.two_param()) {
        const std::int64_t base = (std::int64_t{1} << level) - 1;
        for (; placed < n; ++placed) acc[static_cast<std::size_t>(base + placed)] = 1.0 / bn[static_cast<std::size_t>(base + placed)];
    } else {
        const auto& ro = rect_order(spec.depth);
        const std::int64_t base = (std::int64_t{1} << level) - 1;
        const std::int64_t side = std::int64_t{1} << level;
        for (std::int64_t i = 0; i < side && placed < n; ++i)
            for (std::int64_t j = 0; j < side && placed < n; ++j, ++placed) {
                const auto o = ro.ordinal_of[static_cast<std::size_t>((base + i) * ro.n1 + base + j)];
                acc[static_cast<std::size_t>(o)] = 1.0 / bn[static_cast<std::size_t>(o)];
            }
    }
    return {norm_coeffs(spec, acc) / static_cast<double>(n), "spike"};
}

// g disjoint regions at level a, each carrying up to m full-level tilings stacked on
// consecutive levels; extremal for p > 2 where overlapping square functions pay off.
Candidate stacked_value(const SpaceSpec& spec, std::int64_t n) {
    Candidate best{kNaN, "stacked"};
    if (spec.two_param()) return best;
    std::int64_t last_m = -1;
    for (std::int64_t g = 1; g <= n; ++g) {
        const std::int64_t m = (n + g - 1) / g;
        if (m == last_m) continue;
        last_m = m;
        int a = 0;
        while ((std::int64_t{1} << a) < g) ++a;
        if (m > spec.depth + 1 - a) continue;
        std::vector<double> acc(static_cast<std::size_t>(spec.dim()), 0.0);
        std::int64_t placed = 0;
        for (std::int64_t r = 0; r < g && placed < n; ++r)
            for (std::int64_t t = 0; t < m && placed < n; ++t, ++placed)
                add_level_tiling(spec, DyadicInterval{a, r}, a + static_cast<int>(t), 1.0, acc);
        const double v = norm_coeffs(spec, acc) / static_cast<double>(n);
        if (std::isnan(best.value) || v > best.value) best.value = v;
    }
    return best;
}

}  // namespace

CurvatureTable curvature_profile(const ZTrunc& array, int n_max, int samples, std::uint64_t seed, unsigned threads) {
    if (n_max < 1) throw std::invalid_argument("curvature_profile: n_max must be >= 1");
    if (samples < 0) throw std::invalid_argument("curvature_profile: samples must be >= 0");
    for (int k = 0; k < array.K(); ++k)
        if (array.dim(k) < n_max)
            throw std::length_error("curvature_profile: capacity exceeded in component " + std::to_string(k));
    const int K = array.K();
    CurvatureTable table;
    table.rows.resize(static_cast<std::size_t>(K) * static_cast<std::size_t>(n_max));
    parallel_for(table.rows.size(), threads, [&](std::size_t idx) {
        const int k = static_cast<int>(idx / static_cast<std::size_t>(n_max));
        const std::int64_t n = static_cast<std::int64_t>(idx % static_cast<std::size_t>(n_max)) + 1;
        const auto& spec = array.spec(k);
        Candidate best = spike_value(spec, n);
        const auto st = stacked_value(spec, n);
        if (!std::isnan(st.value) && (std::isnan(best.value) || st.value > best.value)) best = st;
        for (int s = 0; s < samples; ++s) {
            const auto seq = random_blocks(spec, static_cast<int>(n), Profile::Gaussian,
                                           derive_seed(seed, idx * 1000003ULL + static_cast<std::size_t>(s)));
            HaarExpansion sum = HaarExpansion::zero_like(spec);
            for (const auto& b : seq.blocks)
                for (std::size_t i = 0; i < sum.coeffs.size(); ++i) sum.coeffs[i] += b.coeffs[i];
            const double v = norm(spec, sum) / static_cast<double>(n);
            if (std::isnan(best.value) || v > best.value) best = {v, "gaussian"};
        }
        CurvatureRow row;
        row.component = k;
        row.n = n;
        row.value = best.value;
        row.profile = best.profile;
        const auto s = upper_estimate_exponent(spec);
        row.bound = s ? std::pow(static_cast<double>(n), 1.0 / *s - 1.0) : kNaN;
        row.margin = row.bound - row.value;
        table.rows[idx] = row;
    });
    for (int k = 0; k < K; ++k) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::int64_t n = 1; n <= n_max; ++n) {
            const auto& row = table.rows[static_cast<std::size_t>(k) * static_cast<std::size_t>(n_max) + static_cast<std::size_t>(n - 1)];
            const double x = std::log(static_cast<double>(n)), y = std::log(row.value);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double N = n_max;
        const double denom = N * sxx - sx * sx;
        table.fitted_exponent.push_back(denom > 0 ? -(N * sxy - sx * sy) / denom : 0.0);
        const auto s = upper_estimate_exponent(array.spec(k));
        table.s.push_back(s ? *s : kNaN);
        table.target_exponent.push_back(s ? 1.0 - 1.0 / *s : kNaN);
    }
    return table;
}

std::vector<std::int64_t> tail_profile_coords(const ZTrunc& t, const Eigen::VectorXd& r, double eta) {
    if (!(eta > 0)) throw std::invalid_argument("tail_profile: eta must be positive");
    const int K = t.K();
    std::vector<std::int64_t> m(static_cast<std::size_t>(K), 0);
    std::vector<std::vector<double>> parts;
    std::vector<double> contrib(static_cast<std::size_t>(K), 0.0);
    for (int k = 0; k < K; ++k) {
        parts.push_back(component_coords(t, r, k));
        for (double v : parts.back()) contrib[static_cast<std::size_t>(k)] += std::fabs(v);
    }
    auto total = [&] {
        double s = 0.0;
        for (double c : contrib) s += c;
        return s;
    };
    while (total() > eta) {
        int k = 0;
        for (int i = 1; i < K; ++i)
            if (contrib[static_cast<std::size_t>(i)] > contrib[static_cast<std::size_t>(k)]) k = i;
        const auto& p = parts[static_cast<std::size_t>(k)];
        auto& mk = m[static_cast<std::size_t>(k)];
        while (mk < static_cast<std::int64_t>(p.size()) && p[static_cast<std::size_t>(mk)] == 0.0) ++mk;
        ++mk;
        double c = 0.0;
        for (std::int64_t j = mk; j < static_cast<std::int64_t>(p.size()); ++j) c += std::fabs(p[static_cast<std::size_t>(j)]);
        contrib[static_cast<std::size_t>(k)] = c;
    }
    return m;
}

std::vector<std::int64_t> tail_profile(const ZTrunc& t, const ZFunctional& f, double eta) {
    return tail_profile_coords(t, functional_coords(t, f), eta);
}

}  // namespace haarfactor
