#include "haarfactor/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "haarfactor/util.hpp"

namespace haarfactor {

OperatorZ::OperatorZ(ZTrunc dom, ZTrunc cod, Eigen::MatrixXd mat)
    : domain(std::move(dom)), codomain(std::move(cod)), m(std::move(mat)) {
    if (m.rows() != codomain.size() || m.cols() != domain.size())
        throw std::invalid_argument("OperatorZ: matrix shape does not match the spaces");
    if (!m.allFinite()) throw std::invalid_argument("OperatorZ: non-finite entries");
}

OperatorZ OperatorZ::identity(const ZTrunc& t) {
    return {t, t, Eigen::MatrixXd::Identity(t.size(), t.size())};
}

OperatorZ OperatorZ::zero(const ZTrunc& dom, const ZTrunc& cod) {
    return {dom, cod, Eigen::MatrixXd::Zero(cod.size(), dom.size())};
}

OperatorZ OperatorZ::masked(const std::set<int>& rows, const std::set<int>& cols) const {
    OperatorZ out = *this;
    for (std::int64_t r = 0; r < codomain.size(); ++r)
        if (!rows.contains(codomain.coord(r).first)) out.m.row(r).setZero();
    for (std::int64_t c = 0; c < domain.size(); ++c)
        if (!cols.contains(domain.coord(c).first)) out.m.col(c).setZero();
    return out;
}

ZVector apply(const OperatorZ& T, const ZVector& v) {
    return from_coords(T.codomain, T.m * to_coords(T.domain, v));
}

double diagonal_delta(const OperatorZ& T) {
    if (!T.endomorphism()) throw std::invalid_argument("diagonal_delta: operator is not an endomorphism");
    return T.m.diagonal().cwiseAbs().minCoeff();
}

bool is_diagonal(const OperatorZ& T) {
    if (!T.endomorphism()) throw std::invalid_argument("is_diagonal: operator is not an endomorphism");
    for (Eigen::Index c = 0; c < T.m.cols(); ++c)
        for (Eigen::Index r = 0; r < T.m.rows(); ++r)
            if (r != c && T.m(r, c) != 0.0) return false;
    return true;
}

namespace {

// Coordinate sign/scale ascent of ||Tv||_Z / ||v||_Z.
class Ascent {
public:
    explicit Ascent(const OperatorZ& T) : T_(T) {}

    double evaluate(const Eigen::VectorXd& v) {
        v_ = v;
        w_ = T_.m * v_;
        dn_.resize(static_cast<std::size_t>(T_.domain.K()));
        cn_.resize(static_cast<std::size_t>(T_.codomain.K()));
        vk_.resize(dn_.size());
        for (int k = 0; k < T_.domain.K(); ++k) {
            vk_[static_cast<std::size_t>(k)] = component_coords(T_.domain, v_, k);
            dn_[static_cast<std::size_t>(k)] = norm_normalized(T_.domain.spec(k), vk_[static_cast<std::size_t>(k)]);
        }
        for (int k = 0; k < T_.codomain.K(); ++k) cn_[static_cast<std::size_t>(k)] = component_norm(T_.codomain, w_, k);
        return ratio(dn_, cn_);
    }

    double run(Eigen::VectorXd& v, double step, double step_min, int max_passes) {
        double cur = evaluate(v);
        const auto N = T_.domain.size();
        std::vector<double> dn2, cn2;
        std::vector<double> avg(static_cast<std::size_t>(T_.domain.K()));
        for (int pass = 0; pass < max_passes && step >= step_min; ++pass) {
            for (int k = 0; k < T_.domain.K(); ++k) {
                const auto& c = vk_[static_cast<std::size_t>(k)];
                double s = 0.0;
                for (double x : c) s += std::fabs(x);
                avg[static_cast<std::size_t>(k)] = s > 0 ? s / static_cast<double>(c.size()) : 1.0 / std::sqrt(static_cast<double>(c.size()));
            }
            bool improved = false;
            for (std::int64_t i = 0; i < N; ++i) {
                const auto [kd, jd] = T_.domain.coord(i);
                const double vi = v_[i];
                const double sc = step * std::max(std::fabs(vi), avg[static_cast<std::size_t>(kd)]);
                double best = cur, best_t = 0.0;
                for (double t : {-2.0 * vi, sc, -sc}) {
                    if (t == 0.0) continue;
                    const double r = trial(i, kd, jd, t, dn2, cn2);
                    if (r > best * (1.0 + 1e-13)) {
                        best = r;
                        best_t = t;
                    }
                }
                if (best_t != 0.0) {
                    commit(i, kd, jd, best_t);
                    cur = best;
                    improved = true;
                }
            }
            if (!improved) step *= 0.5;
        }
        v = v_;
        return cur;
    }

private:
    static double ratio(const std::vector<double>& dn, const std::vector<double>& cn) {
        const double d = *std::max_element(dn.begin(), dn.end());
        const double c = *std::max_element(cn.begin(), cn.end());
        return d > 0 ? c / d : 0.0;
    }

    double trial(std::int64_t i, int kd, std::int64_t jd, double t, std::vector<double>& dn2, std::vector<double>& cn2) {
        dn2 = dn_;
        auto& comp = vk_[static_cast<std::size_t>(kd)];
        const double old = comp[static_cast<std::size_t>(jd)];
        comp[static_cast<std::size_t>(jd)] = old + t;
        dn2[static_cast<std::size_t>(kd)] = norm_normalized(T_.domain.spec(kd), comp);
        comp[static_cast<std::size_t>(jd)] = old;
        w2_ = w_ + t * T_.m.col(i);
        cn2.resize(cn_.size());
        for (int k = 0; k < T_.codomain.K(); ++k) cn2[static_cast<std::size_t>(k)] = component_norm(T_.codomain, w2_, k);
        return ratio(dn2, cn2);
    }

    void commit(std::int64_t i, int kd, std::int64_t jd, double t) {
        v_[i] += t;
        vk_[static_cast<std::size_t>(kd)][static_cast<std::size_t>(jd)] = v_[i];
        dn_[static_cast<std::size_t>(kd)] = norm_normalized(T_.domain.spec(kd), vk_[static_cast<std::size_t>(kd)]);
        w_ += t * T_.m.col(i);
        for (int k = 0; k < T_.codomain.K(); ++k) cn_[static_cast<std::size_t>(k)] = component_norm(T_.codomain, w_, k);
    }

    const OperatorZ& T_;
    Eigen::VectorXd v_, w_, w2_;
    std::vector<double> dn_, cn_;
    std::vector<std::vector<double>> vk_;
};

void normalize_components(const ZTrunc& t, Eigen::VectorXd& v) {
    for (int k = 0; k < t.K(); ++k) {
        const double n = component_norm(t, v, k);
        if (n <= 0) continue;
        for (auto g : t.globals_of(k)) v[g] /= n;
    }
}

}  // namespace

NormBounds operator_norm_bounds(const OperatorZ& T, int trials, std::uint64_t seed, unsigned threads) {
    NormOptions opt;
    opt.trials = trials;
    opt.seed = seed;
    opt.threads = threads;
    return operator_norm_bounds(T, opt);
}

NormBounds operator_norm_bounds(const OperatorZ& T, const NormOptions& opt) {
    if (opt.trials < 1) throw std::invalid_argument("operator_norm_bounds: trials must be >= 1");
    const auto N = T.domain.size();
    NormBounds out;
    out.certified_upper = analytic_norm_upper(T);

    // Basis witnesses: ||T e_i|| (||e_i|| = 1).
    std::int64_t best_i = 0;
    double best_basis = -1.0;
    for (std::int64_t i = 0; i < N; ++i) {
        const Eigen::VectorXd col = T.m.col(i);
        const double r = z_norm_coords(T.codomain, col);
        if (r > best_basis) {
            best_basis = r;
            best_i = i;
        }
    }

    const auto starts = static_cast<std::size_t>(opt.trials);
    std::vector<double> ratios(starts, 0.0);
    std::vector<Eigen::VectorXd> vecs(starts);
    parallel_for(starts, opt.threads, [&](std::size_t s) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(N);
        Rng rng(derive_seed(opt.seed, s));
        if (s == 0) {
            v[best_i] = 1.0;
            for (std::int64_t i = 0; i < N; ++i) v[i] += 0.05 * rng.normal();
        } else {
            for (std::int64_t i = 0; i < N; ++i) v[i] = rng.normal();
        }
        normalize_components(T.domain, v);
        Ascent a(T);
        ratios[s] = a.run(v, 0.5, 1e-2, opt.max_passes);
        vecs[s] = v;
    });
    std::size_t win = 0;
    for (std::size_t s = 1; s < starts; ++s)
        if (ratios[s] > ratios[win]) win = s;

    if (best_basis >= ratios[win]) {
        out.certified_lower = best_basis;
        out.witness = Eigen::VectorXd::Zero(N);
        out.witness[best_i] = 1.0;
    } else {
        out.certified_lower = ratios[win];
        out.witness = vecs[win];
    }
    Eigen::VectorXd refined = out.witness;
    Ascent fine(T);
    const double h = fine.run(refined, 0.05, 1e-5, 4 * opt.max_passes);
    out.heuristic_value = std::max(out.certified_lower, h);
    // Guard against rounding: the analytic bound is exact for diagonal operators.
    out.certified_upper = std::max(out.certified_upper, out.heuristic_value);
    return out;
}

double analytic_norm_upper(const OperatorZ& T) {
    const bool endo = T.endomorphism();
    const int Kc = T.codomain.K();
    std::vector<double> off(static_cast<std::size_t>(Kc), 0.0), dmax(static_cast<std::size_t>(Kc), 0.0);
    for (std::int64_t i = 0; i < T.domain.size(); ++i) {
        const Eigen::VectorXd col = T.m.col(i);
        const auto [kd, jd] = T.domain.coord(i);
        for (int k = 0; k < Kc; ++k) {
            auto c = component_coords(T.codomain, col, k);
            if (endo && k == kd && T.codomain.spec(k).unconditional()) {
                dmax[static_cast<std::size_t>(k)] = std::max(dmax[static_cast<std::size_t>(k)], std::fabs(c[static_cast<std::size_t>(jd)]));
                c[static_cast<std::size_t>(jd)] = 0.0;
            }
            bool any = false;
            for (double x : c) any = any || x != 0.0;
            if (any) off[static_cast<std::size_t>(k)] += norm_normalized(T.codomain.spec(k), c);
        }
    }
    double m = 0.0;
    for (int k = 0; k < Kc; ++k) m = std::max(m, off[static_cast<std::size_t>(k)] + dmax[static_cast<std::size_t>(k)]);
    return m;
}

DiagonalFactors diagonal_factorization(const OperatorZ& D, double delta, const NormOptions& opt) {
    if (!(delta > 0)) throw std::invalid_argument("diagonal_factorization: delta must be positive");
    if (!is_diagonal(D)) throw std::invalid_argument("diagonal_factorization: operator is not diagonal");
    const Eigen::VectorXd d = D.m.diagonal();
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (std::fabs(d[i]) < delta)
            throw std::invalid_argument("diagonal_factorization: |d_" + std::to_string(i) + "| below delta");
    DiagonalFactors f;
    f.A = OperatorZ::identity(D.domain);
    f.B = OperatorZ(D.domain, D.domain, d.cwiseInverse().asDiagonal().toDenseMatrix());
    f.norm_B = operator_norm_bounds(f.B, opt);
    return f;
}

OperatorZ random_large_diagonal(const ZTrunc& t, double delta, double off_diag_scale, std::uint64_t seed) {
    if (!(delta > 0)) throw std::invalid_argument("random_large_diagonal: delta must be positive");
    if (!(off_diag_scale >= 0)) throw std::invalid_argument("random_large_diagonal: off-diagonal scale must be >= 0");
    Rng rng(seed);
    const auto N = t.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(N, N);
    for (std::int64_t i = 0; i < N; ++i) m(i, i) = rng.sign() * delta * (1.0 + rng.uniform());
    if (off_diag_scale > 0)
        for (std::int64_t r = 0; r < N; ++r)
            for (std::int64_t c = 0; c < N; ++c)
                if (r != c) m(r, c) = off_diag_scale * rng.uniform(-1.0, 1.0);
    return {t, t, std::move(m)};
}

GammaSelection select_gamma(const OperatorZ& S, const std::vector<std::vector<int>>& omega, double rho, int budget,
                            const NormOptions& opt) {
    if (!S.endomorphism()) throw std::invalid_argument("select_gamma: S must be an endomorphism");
    const int K = S.domain.K();
    if (omega.empty()) throw std::invalid_argument("select_gamma: no constraint sets");
    for (const auto& o : omega) {
        if (o.empty()) throw std::invalid_argument("select_gamma: empty constraint set");
        for (int c : o)
            if (c < 0 || c >= K) throw std::invalid_argument("select_gamma: constraint outside the components");
    }
    if (budget < 1 || budget > K) throw std::invalid_argument("select_gamma: budget must lie in [1, K]");
    if (!(rho > 0)) throw std::invalid_argument("select_gamma: rho must be positive");

    NormOptions quick = opt;
    quick.trials = 1;
    auto lower = [&](const std::set<int>& rows, const std::set<int>& cols) {
        return operator_norm_bounds(S.masked(rows, cols), quick).certified_lower;
    };

    GammaSelection out;
    out.s_norm_lower = operator_norm_bounds(S, opt).certified_lower;
    out.target = 2.0 * out.s_norm_lower + rho;
    out.single_target = out.s_norm_lower + rho;

    std::set<int> gamma, pool;
    for (int k = 0; k < K; ++k) pool.insert(k);
    std::size_t l = 0;
    int misses = 0;
    while (static_cast<int>(gamma.size()) < budget && misses < static_cast<int>(omega.size())) {
        const auto& om = omega[l % omega.size()];
        std::vector<int> cand;
        for (int c : om)
            if (pool.contains(c) && !gamma.contains(c)) cand.push_back(c);
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        if (cand.empty()) {
            ++misses;
            ++l;
            continue;
        }
        misses = 0;
        std::set<int> reach = gamma;
        reach.insert(pool.begin(), pool.end());
        int pick = cand.front();
        double best = lower({pick}, reach);
        for (std::size_t i = 1; i < cand.size(); ++i) {
            const double s = lower({cand[i]}, reach);
            if (s < best) {
                best = s;
                pick = cand[i];
            }
        }
        gamma.insert(pick);
        out.picks.push_back(pick);
        out.visited.push_back(static_cast<int>(l % omega.size()));
        // Prune pool members that interact strongly with the new pick in either direction.
        std::vector<int> drop;
        for (int c : pool) {
            if (gamma.contains(c)) continue;
            const double inter = std::max(lower({pick}, {c}), lower({c}, {pick}));
            if (inter > rho / 2) drop.push_back(c);
        }
        for (int c : drop) pool.erase(c);
        ++l;
    }
    out.gamma.assign(gamma.begin(), gamma.end());
    const OperatorZ restricted = S.masked(gamma, gamma);
    out.bound_upper = analytic_norm_upper(restricted);
    out.bound_lower = operator_norm_bounds(restricted, quick).certified_lower;
    out.bound_upper = std::max(out.bound_upper, out.bound_lower);
    return out;
}

}  // namespace haarfactor
