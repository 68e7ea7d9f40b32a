#include "haarfactor/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace haarfactor {

std::int64_t SpaceSpec::dim() const {
    const auto n = dim1d(depth);
    return two_param() ? n * n : n;
}

bool SpaceSpec::unconditional() const {
    switch (kind) {
        case Kind::Hp:
        case Kind::HpHq:
        case Kind::VMO:
            return true;
        case Kind::VMOHr:
            return p == 2.0;
        case Kind::Lp:
            return p == 2.0;
        case Kind::LrLs:
            return p == 2.0 && q == 2.0;
    }
    return false;
}

std::string kind_name(Kind k) {
    switch (k) {
        case Kind::Lp: return "Lp";
        case Kind::Hp: return "Hp";
        case Kind::VMO: return "VMO";
        case Kind::HpHq: return "HpHq";
        case Kind::VMOHr: return "VMOHr";
        case Kind::LrLs: return "LrLs";
    }
    return "?";
}

Kind kind_from_name(const std::string& name) {
    for (Kind k : {Kind::Lp, Kind::Hp, Kind::VMO, Kind::HpHq, Kind::VMOHr, Kind::LrLs})
        if (kind_name(k) == name) return k;
    throw std::invalid_argument("unknown space kind '" + name + "'");
}

std::string SpaceSpec::label() const {
    auto num = [](double v) {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    };
    switch (kind) {
        case Kind::Lp: return "L^" + num(p) + "@" + std::to_string(depth);
        case Kind::Hp: return "H^" + num(p) + "@" + std::to_string(depth);
        case Kind::VMO: return "VMO@" + std::to_string(depth);
        case Kind::HpHq: return "H^" + num(p) + "(H^" + num(q) + ")@" + std::to_string(depth);
        case Kind::VMOHr: return "VMO(H^" + num(p) + ")@" + std::to_string(depth);
        case Kind::LrLs: return "L^" + num(p) + "(L^" + num(q) + ")@" + std::to_string(depth);
    }
    return "?";
}

void SpaceSpec::validate() const {
    if (depth < 0) throw std::invalid_argument("space depth must be non-negative");
    if (two_param() && depth > 8) throw std::invalid_argument("2D depth above 8 is not supported");
    if (!two_param() && depth > 24) throw std::invalid_argument("1D depth above 24 is not supported");
    auto check = [](double e) {
        if (!(e >= 1.0) || !std::isfinite(e)) throw std::invalid_argument("exponent must be finite and >= 1");
    };
    if (kind != Kind::VMO) check(p);
    if (kind == Kind::HpHq || kind == Kind::LrLs) check(q);
}

HaarExpansion::HaarExpansion(SpaceKindDim d, int dep) : dim(d), depth(dep) {
    if (dep < 0) throw std::invalid_argument("negative depth");
    const auto n = dim1d(dep);
    coeffs.assign(static_cast<std::size_t>(d == SpaceKindDim::OneParam ? n : n * n), 0.0);
}

std::int64_t HaarExpansion::ordinal0(const HaarIndex& idx) const {
    if (dim == SpaceKindDim::OneParam) {
        if (idx.two_param()) throw std::invalid_argument("2D index on 1D expansion");
        const auto& I = idx.interval();
        if (I.level > depth) throw std::out_of_range("index beyond expansion depth");
        return interval_ordinal0(I);
    }
    if (!idx.two_param()) throw std::invalid_argument("1D index on 2D expansion");
    const auto& R = idx.rect();
    if (R.x.level > depth || R.y.level > depth) throw std::out_of_range("index beyond expansion depth");
    const auto& ro = rect_order(depth);
    return ro.ordinal_of[static_cast<std::size_t>(interval_ordinal0(R.x) * ro.n1 + interval_ordinal0(R.y))];
}

double HaarExpansion::get(const HaarIndex& idx) const { return coeffs[static_cast<std::size_t>(ordinal0(idx))]; }
void HaarExpansion::set(const HaarIndex& idx, double v) { coeffs[static_cast<std::size_t>(ordinal0(idx))] = v; }
void HaarExpansion::add(const HaarIndex& idx, double v) { coeffs[static_cast<std::size_t>(ordinal0(idx))] += v; }

HaarExpansion HaarExpansion::reencode(int new_depth) const {
    if (new_depth < depth) throw std::invalid_argument("reencode: cannot shrink depth");
    HaarExpansion out(dim, new_depth);
    if (dim == SpaceKindDim::OneParam) {
        std::copy(coeffs.begin(), coeffs.end(), out.coeffs.begin());
        return out;
    }
    const auto& src = rect_order(depth);
    const auto& dst = rect_order(new_depth);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const auto [ox, oy] = src.rect_of[i];
        out.coeffs[static_cast<std::size_t>(dst.ordinal_of[static_cast<std::size_t>(ox * dst.n1 + oy)])] = coeffs[i];
    }
    return out;
}

namespace {

// Top-down accumulation over the dyadic tree: out[c] = sum over I containing cell c of v_I
// (times h_I(c) when Signed).  Cells live at level depth+1; v is read with a stride so
// that rows and columns of the 2D coefficient matrix can be fed directly.
template <bool Signed>
void expand(int depth, const double* v, std::int64_t stride, std::vector<double>& cur, std::vector<double>& nxt) {
    cur.assign(1, 0.0);
    for (int l = 0; l <= depth; ++l) {
        const std::size_t n = std::size_t{1} << l;
        const std::int64_t base = (std::int64_t{1} << l) - 1;
        nxt.resize(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = v[(base + static_cast<std::int64_t>(i)) * stride];
            const double c = cur[i];
            nxt[2 * i] = c + a;
            nxt[2 * i + 1] = Signed ? c - a : c + a;
        }
        std::swap(cur, nxt);
    }
}

// sum over cells of |x|^e * w where vals hold squares when from_square is set
double power_sum(const std::vector<double>& vals, double e, double w, bool from_square) {
    double s = 0.0;
    if (from_square) {
        if (e == 2.0) {
            for (double v : vals) s += v;
        } else if (e == 1.0) {
            for (double v : vals) s += std::sqrt(v);
        } else {
            const double h = 0.5 * e;
            for (double v : vals) s += std::pow(v, h);
        }
    } else {
        if (e == 2.0) {
            for (double v : vals) s += v * v;
        } else if (e == 1.0) {
            for (double v : vals) s += std::fabs(v);
        } else {
            for (double v : vals) s += std::pow(std::fabs(v), e);
        }
    }
    return s * w;
}

double root(double s, double e) {
    if (e == 2.0) return std::sqrt(s);
    if (e == 1.0) return s;
    return std::pow(s, 1.0 / e);
}

std::vector<double> matrix2d(int depth, std::span<const double> a) {
    const auto& ro = rect_order(depth);
    std::vector<double> m(static_cast<std::size_t>(ro.n1 * ro.n1));
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto [ox, oy] = ro.rect_of[i];
        m[static_cast<std::size_t>(ox * ro.n1 + oy)] = a[i];
    }
    return m;
}

double norm_1d(Kind kind, double p, int depth, std::span<const double> a) {
    const double w = std::ldexp(1.0, -(depth + 1));
    std::vector<double> cur, nxt;
    if (kind == Kind::Hp) {
        std::vector<double> sq(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) sq[i] = a[i] * a[i];
        expand<false>(depth, sq.data(), 1, cur, nxt);
        return root(power_sum(cur, p, w, true), p);
    }
    if (kind == Kind::Lp) {
        expand<true>(depth, a.data(), 1, cur, nxt);
        return root(power_sum(cur, p, w, false), p);
    }
    // BMO formula, bottom-up W(I) = a_I^2 |I| + W(children)
    std::vector<double> W(a.size(), 0.0);
    double best = 0.0;
    for (int l = depth; l >= 0; --l) {
        const std::int64_t base = (std::int64_t{1} << l) - 1;
        const double mI = std::ldexp(1.0, -l);
        for (std::int64_t i = 0; i < (std::int64_t{1} << l); ++i) {
            const auto o = static_cast<std::size_t>(base + i);
            double v = a[o] * a[o] * mI;
            if (l < depth) {
                const auto c = static_cast<std::size_t>((std::int64_t{2} << l) - 1 + 2 * i);
                v += W[c] + W[c + 1];
            }
            W[o] = v;
            best = std::max(best, v / mI);
        }
    }
    return std::sqrt(best);
}

double norm_mixed(Kind kind, double outer, double inner, int depth, std::span<const double> a) {
    const auto n1 = dim1d(depth);
    const std::size_t cells = std::size_t{1} << (depth + 1);
    const double w = std::ldexp(1.0, -(depth + 1));
    const bool hardy = kind == Kind::HpHq;
    auto m = matrix2d(depth, a);
    if (hardy)
        for (double& v : m) v = v * v;
    std::vector<double> cur, nxt;
    // rows: per x-ordinal, accumulated over y cells
    std::vector<double> rows(static_cast<std::size_t>(n1) * cells);
    for (std::int64_t ox = 0; ox < n1; ++ox) {
        if (hardy)
            expand<false>(depth, m.data() + ox * n1, 1, cur, nxt);
        else
            expand<true>(depth, m.data() + ox * n1, 1, cur, nxt);
        std::copy(cur.begin(), cur.end(), rows.begin() + static_cast<std::ptrdiff_t>(ox * static_cast<std::int64_t>(cells)));
    }
    // grid[cx][cy]
    std::vector<double> grid(cells * cells);
    for (std::size_t cy = 0; cy < cells; ++cy) {
        if (hardy)
            expand<false>(depth, rows.data() + cy, static_cast<std::int64_t>(cells), cur, nxt);
        else
            expand<true>(depth, rows.data() + cy, static_cast<std::int64_t>(cells), cur, nxt);
        for (std::size_t cx = 0; cx < cells; ++cx) grid[cx * cells + cy] = cur[cx];
    }
    std::vector<double> line(cells);
    double total = 0.0;
    for (std::size_t cx = 0; cx < cells; ++cx) {
        std::copy(grid.begin() + static_cast<std::ptrdiff_t>(cx * cells),
                  grid.begin() + static_cast<std::ptrdiff_t>((cx + 1) * cells), line.begin());
        const double in = root(power_sum(line, inner, w, hardy), inner);
        total += (outer == 1.0 ? in : std::pow(in, outer)) * w;
    }
    return root(total, outer);
}

double norm_vmohr(double r, int depth, std::span<const double> a) {
    const auto n1 = dim1d(depth);
    const std::size_t cells = std::size_t{1} << (depth + 1);
    const double w = std::ldexp(1.0, -(depth + 1));
    const auto m = matrix2d(depth, a);
    std::vector<double> ck, sq(static_cast<std::size_t>(n1)), cur, nxt;
    double best = 0.0;
    for (int l0 = 0; l0 <= depth; ++l0) {
        const std::size_t span_cells = cells >> l0;
        for (std::int64_t p0 = 0; p0 < (std::int64_t{1} << l0); ++p0) {
            // ck[cell * n1 + K] = sum_{J subset I0, J contains cell} a_{J,K} h_J(cell)
            ck.assign(span_cells * static_cast<std::size_t>(n1), 0.0);
            for (std::int64_t K = 0; K < n1; ++K) {
                cur.assign(1, 0.0);
                for (int t = 0; t <= depth - l0; ++t) {
                    const std::size_t n = std::size_t{1} << t;
                    const std::int64_t base = (std::int64_t{1} << (l0 + t)) - 1 + (p0 << t);
                    nxt.resize(2 * n);
                    for (std::size_t i = 0; i < n; ++i) {
                        const double c = m[static_cast<std::size_t>((base + static_cast<std::int64_t>(i)) * n1 + K)];
                        nxt[2 * i] = cur[i] + c;
                        nxt[2 * i + 1] = cur[i] - c;
                    }
                    std::swap(cur, nxt);
                }
                for (std::size_t c = 0; c < span_cells; ++c) ck[c * static_cast<std::size_t>(n1) + static_cast<std::size_t>(K)] = cur[c];
            }
            double acc = 0.0;
            for (std::size_t c = 0; c < span_cells; ++c) {
                for (std::int64_t K = 0; K < n1; ++K) {
                    const double v = ck[c * static_cast<std::size_t>(n1) + static_cast<std::size_t>(K)];
                    sq[static_cast<std::size_t>(K)] = v * v;
                }
                expand<false>(depth, sq.data(), 1, cur, nxt);
                const double hr = root(power_sum(cur, r, w, true), r);
                acc += hr * hr * w;
            }
            best = std::max(best, acc / std::ldexp(1.0, -l0));
        }
    }
    return std::sqrt(best);
}

void check_exponents(const SpaceSpec& spec) {
    if (spec.kind != Kind::VMO) {
        if (!(spec.p >= 1.0) || !std::isfinite(spec.p)) throw std::invalid_argument("exponent must be finite and >= 1");
    }
    if (spec.kind == Kind::HpHq || spec.kind == Kind::LrLs) {
        if (!(spec.q >= 1.0) || !std::isfinite(spec.q)) throw std::invalid_argument("exponent must be finite and >= 1");
    }
}

double norm_at_depth(const SpaceSpec& spec, int depth, std::span<const double> a) {
    check_exponents(spec);
    switch (spec.kind) {
        case Kind::Hp:
        case Kind::Lp:
        case Kind::VMO:
            return norm_1d(spec.kind, spec.p, depth, a);
        case Kind::HpHq:
        case Kind::LrLs:
            return norm_mixed(spec.kind, spec.p, spec.q, depth, a);
        case Kind::VMOHr:
            return norm_vmohr(spec.p, depth, a);
    }
    return 0.0;
}

}  // namespace

StepFunction square_function(const HaarExpansion& f) {
    StepFunction out{f.dim, f.depth + 1, {}};
    std::vector<double> cur, nxt;
    if (f.dim == SpaceKindDim::OneParam) {
        std::vector<double> sq(f.coeffs.size());
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = f.coeffs[i] * f.coeffs[i];
        expand<false>(f.depth, sq.data(), 1, cur, nxt);
        for (double& v : cur) v = std::sqrt(v);
        out.values = cur;
        return out;
    }
    const auto n1 = dim1d(f.depth);
    const std::size_t cells = std::size_t{1} << (f.depth + 1);
    auto m = matrix2d(f.depth, f.coeffs);
    for (double& v : m) v *= v;
    std::vector<double> rows(static_cast<std::size_t>(n1) * cells);
    for (std::int64_t ox = 0; ox < n1; ++ox) {
        expand<false>(f.depth, m.data() + ox * n1, 1, cur, nxt);
        std::copy(cur.begin(), cur.end(), rows.begin() + static_cast<std::ptrdiff_t>(ox * static_cast<std::int64_t>(cells)));
    }
    out.values.assign(cells * cells, 0.0);
    for (std::size_t cy = 0; cy < cells; ++cy) {
        expand<false>(f.depth, rows.data() + cy, static_cast<std::int64_t>(cells), cur, nxt);
        for (std::size_t cx = 0; cx < cells; ++cx) out.values[cx * cells + cy] = std::sqrt(cur[cx]);
    }
    return out;
}

StepFunction evaluate(const HaarExpansion& f) {
    StepFunction out{f.dim, f.depth + 1, {}};
    std::vector<double> cur, nxt;
    if (f.dim == SpaceKindDim::OneParam) {
        expand<true>(f.depth, f.coeffs.data(), 1, cur, nxt);
        out.values = cur;
        return out;
    }
    const auto n1 = dim1d(f.depth);
    const std::size_t cells = std::size_t{1} << (f.depth + 1);
    auto m = matrix2d(f.depth, f.coeffs);
    std::vector<double> rows(static_cast<std::size_t>(n1) * cells);
    for (std::int64_t ox = 0; ox < n1; ++ox) {
        expand<true>(f.depth, m.data() + ox * n1, 1, cur, nxt);
        std::copy(cur.begin(), cur.end(), rows.begin() + static_cast<std::ptrdiff_t>(ox * static_cast<std::int64_t>(cells)));
    }
    out.values.assign(cells * cells, 0.0);
    for (std::size_t cy = 0; cy < cells; ++cy) {
        expand<true>(f.depth, rows.data() + cy, static_cast<std::int64_t>(cells), cur, nxt);
        for (std::size_t cx = 0; cx < cells; ++cx) out.values[cx * cells + cy] = cur[cx];
    }
    return out;
}

double norm(const SpaceSpec& spec, const HaarExpansion& f) {
    if (f.dim != spec.dim_kind()) throw std::invalid_argument("norm: expansion dimension does not match " + spec.label());
    return norm_at_depth(spec, f.depth, f.coeffs);
}

double norm_coeffs(const SpaceSpec& spec, std::span<const double> a) {
    if (static_cast<std::int64_t>(a.size()) != spec.dim()) throw std::invalid_argument("norm_coeffs: size mismatch for " + spec.label());
    return norm_at_depth(spec, spec.depth, a);
}

double dual_coefficient(const HaarIndex& idx, const HaarExpansion& f) {
    if (idx.two_param() != (f.dim == SpaceKindDim::TwoParam)) return 0.0;
    if (idx.two_param()) {
        const auto& R = idx.rect();
        if (R.x.level > f.depth || R.y.level > f.depth) return 0.0;
    } else if (idx.interval().level > f.depth) {
        return 0.0;
    }
    return f.get(idx);
}

const std::vector<double>& basis_norms(const SpaceSpec& spec) {
    spec.validate();
    static std::mutex mu;
    static std::map<std::tuple<int, int, double, double>, std::vector<double>> cache;
    const auto key = std::make_tuple(static_cast<int>(spec.kind), spec.depth, spec.p, spec.q);
    std::lock_guard lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    // Closed forms: |I|^{1/p} for H^p and L^p, 1 for BMO, |I|^{1/p}|J|^{1/q} for the mixed
    // spaces, |J|^{1/r} for VMO(H^r) (the sup is attained on I itself).  Tests check these
    // against direct evaluation.
    std::vector<double> out(static_cast<std::size_t>(spec.dim()));
    if (!spec.two_param()) {
        for (std::size_t o = 0; o < out.size(); ++o) {
            const double m = interval_from_ordinal0(static_cast<std::int64_t>(o)).measure();
            out[o] = spec.kind == Kind::VMO ? 1.0 : std::pow(m, 1.0 / spec.p);
        }
    } else {
        const auto& ro = rect_order(spec.depth);
        for (std::size_t o = 0; o < out.size(); ++o) {
            const auto [ox, oy] = ro.rect_of[o];
            const double mx = interval_from_ordinal0(ox).measure();
            const double my = interval_from_ordinal0(oy).measure();
            out[o] = spec.kind == Kind::VMOHr ? std::pow(my, 1.0 / spec.p)
                                              : std::pow(mx, 1.0 / spec.p) * std::pow(my, 1.0 / spec.q);
        }
    }
    return cache.emplace(key, std::move(out)).first->second;
}

double norm_normalized(const SpaceSpec& spec, std::span<const double> c) {
    const auto& bn = basis_norms(spec);
    if (c.size() != bn.size()) throw std::invalid_argument("norm_normalized: size mismatch for " + spec.label());
    std::vector<double> a(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) a[i] = c[i] / bn[i];
    return norm_at_depth(spec, spec.depth, a);
}

}  // namespace haarfactor
