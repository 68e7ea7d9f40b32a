#include "haarfactor/sumspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace haarfactor {

ZTrunc::ZTrunc(std::vector<SpaceSpec> components) : components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("ZTrunc needs at least one component");
    std::vector<std::tuple<std::int64_t, int, std::int64_t>> all;
    global_of_.resize(components_.size());
    for (std::size_t k = 0; k < components_.size(); ++k) {
        components_[k].validate();
        const auto d = components_[k].dim();
        global_of_[k].assign(static_cast<std::size_t>(d), 0);
        for (std::int64_t j = 0; j < d; ++j)
            all.emplace_back(pair_encode(static_cast<std::int64_t>(k) + 1, j + 1), static_cast<int>(k), j);
    }
    std::sort(all.begin(), all.end());
    coord_.reserve(all.size());
    for (std::size_t g = 0; g < all.size(); ++g) {
        const auto [nu, k, j] = all[g];
        coord_.emplace_back(k, j);
        global_of_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = static_cast<std::int64_t>(g);
    }
}

ZVector ZVector::zero(const ZTrunc& t) {
    ZVector v;
    for (const auto& s : t.components()) v.parts.push_back(HaarExpansion::zero_like(s));
    return v;
}

ZFunctional ZFunctional::zero(const ZTrunc& t) {
    ZFunctional f;
    for (const auto& s : t.components()) f.parts.emplace_back(static_cast<std::size_t>(s.dim()), 0.0);
    return f;
}

ZFunctional ZFunctional::coordinate(const ZTrunc& t, int k, std::int64_t j) {
    auto f = zero(t);
    // e*_{(k,j)} is biorthogonal to e_{(k,j)} = h/||h||, so it reads a_j * ||h||.
    f.parts.at(static_cast<std::size_t>(k)).at(static_cast<std::size_t>(j)) =
        basis_norms(t.spec(k))[static_cast<std::size_t>(j)];
    return f;
}

ZVector basis_vector(const ZTrunc& t, int k, std::int64_t j) {
    auto v = ZVector::zero(t);
    v.parts.at(static_cast<std::size_t>(k)).coeffs.at(static_cast<std::size_t>(j)) =
        1.0 / basis_norms(t.spec(k))[static_cast<std::size_t>(j)];
    return v;
}

void check_shape(const ZTrunc& t, const ZVector& v) {
    if (static_cast<int>(v.parts.size()) != t.K()) throw std::invalid_argument("ZVector: component count mismatch");
    for (int k = 0; k < t.K(); ++k) {
        const auto& p = v.parts[static_cast<std::size_t>(k)];
        if (p.dim != t.spec(k).dim_kind() || p.depth != t.spec(k).depth)
            throw std::invalid_argument("ZVector: component " + std::to_string(k) + " does not conform");
    }
}

void check_shape(const ZTrunc& t, const ZFunctional& f) {
    if (static_cast<int>(f.parts.size()) != t.K()) throw std::invalid_argument("ZFunctional: component count mismatch");
    for (int k = 0; k < t.K(); ++k)
        if (static_cast<std::int64_t>(f.parts[static_cast<std::size_t>(k)].size()) != t.dim(k))
            throw std::invalid_argument("ZFunctional: component " + std::to_string(k) + " does not conform");
}

double z_norm(const ZTrunc& t, const ZVector& v) {
    check_shape(t, v);
    double m = 0.0;
    for (int k = 0; k < t.K(); ++k) m = std::max(m, norm(t.spec(k), v.parts[static_cast<std::size_t>(k)]));
    return m;
}

ZVector project(const std::set<int>& N, const ZVector& v) {
    ZVector out = v;
    for (std::size_t k = 0; k < out.parts.size(); ++k)
        if (!N.contains(static_cast<int>(k))) std::fill(out.parts[k].coeffs.begin(), out.parts[k].coeffs.end(), 0.0);
    return out;
}

double pair(const ZFunctional& f, const ZVector& v) {
    if (f.parts.size() != v.parts.size()) throw std::invalid_argument("pair: component count mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < f.parts.size(); ++k) {
        const auto& b = f.parts[k];
        const auto& a = v.parts[k].coeffs;
        if (b.size() != a.size()) throw std::invalid_argument("pair: component size mismatch");
        for (std::size_t j = 0; j < b.size(); ++j) s += b[j] * a[j];
    }
    return s;
}

Eigen::VectorXd to_coords(const ZTrunc& t, const ZVector& v) {
    check_shape(t, v);
    Eigen::VectorXd c(t.size());
    for (int k = 0; k < t.K(); ++k) {
        const auto& bn = basis_norms(t.spec(k));
        const auto& a = v.parts[static_cast<std::size_t>(k)].coeffs;
        for (std::size_t j = 0; j < a.size(); ++j) c[t.global(k, static_cast<std::int64_t>(j))] = a[j] * bn[j];
    }
    return c;
}

ZVector from_coords(const ZTrunc& t, const Eigen::VectorXd& c) {
    if (c.size() != t.size()) throw std::invalid_argument("from_coords: size mismatch");
    auto v = ZVector::zero(t);
    for (int k = 0; k < t.K(); ++k) {
        const auto& bn = basis_norms(t.spec(k));
        auto& a = v.parts[static_cast<std::size_t>(k)].coeffs;
        for (std::size_t j = 0; j < a.size(); ++j) a[j] = c[t.global(k, static_cast<std::int64_t>(j))] / bn[j];
    }
    return v;
}

Eigen::VectorXd functional_coords(const ZTrunc& t, const ZFunctional& f) {
    check_shape(t, f);
    Eigen::VectorXd r(t.size());
    for (int k = 0; k < t.K(); ++k) {
        const auto& bn = basis_norms(t.spec(k));
        const auto& b = f.parts[static_cast<std::size_t>(k)];
        for (std::size_t j = 0; j < b.size(); ++j) r[t.global(k, static_cast<std::int64_t>(j))] = b[j] / bn[j];
    }
    return r;
}

ZFunctional functional_from_coords(const ZTrunc& t, const Eigen::VectorXd& r) {
    if (r.size() != t.size()) throw std::invalid_argument("functional_from_coords: size mismatch");
    auto f = ZFunctional::zero(t);
    for (int k = 0; k < t.K(); ++k) {
        const auto& bn = basis_norms(t.spec(k));
        auto& b = f.parts[static_cast<std::size_t>(k)];
        for (std::size_t j = 0; j < b.size(); ++j) b[j] = r[t.global(k, static_cast<std::int64_t>(j))] * bn[j];
    }
    return f;
}

std::vector<double> component_coords(const ZTrunc& t, const Eigen::VectorXd& c, int k) {
    const auto& g = t.globals_of(k);
    std::vector<double> out(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) out[j] = c[g[j]];
    return out;
}

double component_norm(const ZTrunc& t, const Eigen::VectorXd& c, int k) {
    return norm_normalized(t.spec(k), component_coords(t, c, k));
}

double z_norm_coords(const ZTrunc& t, const Eigen::VectorXd& c) {
    double m = 0.0;
    for (int k = 0; k < t.K(); ++k) m = std::max(m, component_norm(t, c, k));
    return m;
}

DualNormBounds component_dual_norm(const SpaceSpec& spec, const std::vector<double>& r, std::int64_t from) {
    DualNormBounds b;
    const auto n = static_cast<std::int64_t>(r.size());
    std::vector<double> sgn(r.size(), 0.0), self(r.size(), 0.0);
    double l1 = 0.0, l2 = 0.0;
    for (std::int64_t j = std::max<std::int64_t>(from, 0); j < n; ++j) {
        const double v = r[static_cast<std::size_t>(j)];
        l1 += std::fabs(v);
        l2 += v * v;
        b.lower = std::max(b.lower, std::fabs(v));  // witness e_j
        sgn[static_cast<std::size_t>(j)] = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
        self[static_cast<std::size_t>(j)] = v;
    }
    b.upper = l1;
    if (l1 == 0.0) return b;
    const double ns = norm_normalized(spec, sgn);
    if (ns > 0) b.lower = std::max(b.lower, l1 / ns);
    const double nr = norm_normalized(spec, self);
    if (nr > 0) b.lower = std::max(b.lower, l2 / nr);
    b.lower = std::min(b.lower, b.upper);
    return b;
}

DualNormBounds restricted_dual_norm_coords(const ZTrunc& t, const Eigen::VectorXd& r,
                                           const std::vector<std::int64_t>& tails) {
    if (static_cast<int>(tails.size()) != t.K()) throw std::invalid_argument("restricted_dual_norm: one tail per component");
    DualNormBounds total;
    for (int k = 0; k < t.K(); ++k) {
        const auto m = tails[static_cast<std::size_t>(k)];
        if (m < 0 || m > t.dim(k)) throw std::out_of_range("restricted_dual_norm: tail start outside component");
        const auto part = component_dual_norm(t.spec(k), component_coords(t, r, k), m);
        total.lower += part.lower;
        total.upper += part.upper;
    }
    return total;
}

DualNormBounds restricted_dual_norm(const ZTrunc& t, const ZFunctional& f, const std::vector<std::int64_t>& tails) {
    return restricted_dual_norm_coords(t, functional_coords(t, f), tails);
}

}  // namespace haarfactor
