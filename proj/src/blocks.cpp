#include "haarfactor/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "haarfactor/util.hpp"

namespace haarfactor {

void BlockSystem::validate() const {
    if (static_cast<std::int64_t>(blocks.size()) != small.size())
        throw std::invalid_argument("block system: one block per small coordinate required (coverage gap)");
    if (big.K() < small.K()) throw std::invalid_argument("block system: big truncation has fewer components");
    std::vector<std::set<std::int64_t>> used(static_cast<std::size_t>(big.K()));
    for (std::int64_t g = 0; g < small.size(); ++g) {
        const auto& b = blocks[static_cast<std::size_t>(g)];
        if (b.host != small.coord(g).first) throw std::invalid_argument("block system: host must be the reproduced component");
        const auto n = b.E.size();
        if (n == 0 || b.lambda.size() != n || b.mu.size() != n || b.eps.size() != n)
            throw std::invalid_argument("block system: E, lambda, mu, eps must be nonempty and of equal length");
        for (std::size_t i = 0; i < n; ++i) {
            if (b.E[i] < 0 || b.E[i] >= big.dim(b.host)) throw std::out_of_range("block system: ordinal outside host");
            if (!(b.lambda[i] >= 0.0) || !(b.mu[i] >= 0.0)) throw std::invalid_argument("block system: negative weight");
            if (b.eps[i] != 1 && b.eps[i] != -1) throw std::invalid_argument("block system: signs must be +-1");
            if (!used[static_cast<std::size_t>(b.host)].insert(b.E[i]).second)
                throw std::invalid_argument("block system: E sets within a host overlap");
        }
    }
}

Eigen::VectorXd BlockSystem::x(std::int64_t g) const {
    const auto& b = blocks.at(static_cast<std::size_t>(g));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(big.size());
    for (std::size_t i = 0; i < b.E.size(); ++i) v[big.global(b.host, b.E[i])] = b.eps[i] * b.lambda[i];
    return v;
}

Eigen::VectorXd BlockSystem::x_star(std::int64_t g) const {
    const auto& b = blocks.at(static_cast<std::size_t>(g));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(big.size());
    for (std::size_t i = 0; i < b.E.size(); ++i) v[big.global(b.host, b.E[i])] = b.eps[i] * b.mu[i];
    return v;
}

double BlockSystem::lambda_mu(std::int64_t g) const {
    const auto& b = blocks.at(static_cast<std::size_t>(g));
    double s = 0.0;
    for (std::size_t i = 0; i < b.E.size(); ++i) s += b.lambda[i] * b.mu[i];
    return s;
}

BlockSystem BlockSystem::identity(const ZTrunc& t) {
    BlockSystem bs{t, t, {}};
    for (std::int64_t g = 0; g < t.size(); ++g) {
        const auto [k, j] = t.coord(g);
        bs.blocks.push_back({k, {j}, {1.0}, {1.0}, {1}});
    }
    return bs;
}

namespace {

void check_truncs(const ZTrunc& small, const ZTrunc& big, const BlockSystem& bs) {
    if (!(small == bs.small) || !(big == bs.big)) throw std::invalid_argument("block system built for other truncations");
    bs.validate();
}

}  // namespace

OperatorZ build_A(const ZTrunc& trunc_small, const ZTrunc& trunc_big, const BlockSystem& bs) {
    check_truncs(trunc_small, trunc_big, bs);
    Eigen::MatrixXd m(trunc_big.size(), trunc_small.size());
    for (std::int64_t g = 0; g < trunc_small.size(); ++g) m.col(g) = bs.x(g);
    return {trunc_small, trunc_big, std::move(m)};
}

OperatorZ build_B(const ZTrunc& trunc_big, const ZTrunc& trunc_small, const BlockSystem& bs) {
    check_truncs(trunc_small, trunc_big, bs);
    Eigen::MatrixXd m(trunc_small.size(), trunc_big.size());
    for (std::int64_t g = 0; g < trunc_small.size(); ++g) m.row(g) = bs.x_star(g).transpose();
    return {trunc_big, trunc_small, std::move(m)};
}

OperatorZ build_D(const OperatorZ& T, const BlockSystem& bs) {
    if (!(T.domain == bs.big) || !(T.codomain == bs.big)) throw std::invalid_argument("build_D: T must act on the big truncation");
    bs.validate();
    Eigen::VectorXd d(bs.small.size());
    for (std::int64_t g = 0; g < bs.small.size(); ++g) d[g] = bs.x_star(g).dot(T.m * bs.x(g));
    return {bs.small, bs.small, d.asDiagonal().toDenseMatrix()};
}

Eigen::MatrixXd interaction_matrix(const OperatorZ& T, const BlockSystem& bs) {
    const auto A = build_A(bs.small, bs.big, bs);
    const auto B = build_B(bs.big, bs.small, bs);
    Eigen::MatrixXd M = B.m * T.m * A.m;
    M.diagonal().setZero();
    return M;
}

bool Ledger::all_ok() const {
    return std::all_of(entries.begin(), entries.end(), [](const LedgerEntry& e) { return e.ok; });
}

bool Ledger::ok(const std::string& cond) const {
    return std::all_of(entries.begin(), entries.end(), [&](const LedgerEntry& e) { return e.cond != cond || e.ok; });
}

std::vector<LedgerEntry> Ledger::of(const std::string& cond) const {
    std::vector<LedgerEntry> out;
    for (const auto& e : entries)
        if (e.cond == cond) out.push_back(e);
    return out;
}

double eta_n(double eta, std::int64_t n, double tau, double C) {
    if (n < 1) throw std::invalid_argument("eta_n: turns are 1-based");
    if (!(eta > 0.0) || tau < 0.0 || C < 0.0) throw std::invalid_argument("eta_schedule: bad parameters");
    const double dn = static_cast<double>(n);
    return 0.5 * eta / (std::ldexp(dn, static_cast<int>(std::min<std::int64_t>(n + 2, 1000))) * (1.0 + tau) * std::sqrt(C + eta));
}

std::vector<double> eta_schedule(double eta, std::int64_t turns, double tau, double C) {
    std::vector<double> s(static_cast<std::size_t>(std::max<std::int64_t>(turns, 0)));
    for (std::int64_t n = 1; n <= turns; ++n) s[static_cast<std::size_t>(n - 1)] = eta_n(eta, n, tau, C);
    return s;
}

namespace {

// Ratio norm(sum a_j x_j) / norm(sum a_j e_j) for one component, and its dual analogue.
struct RatioEval {
    const BlockSystem& bs;
    int k;
    bool dual;
    std::vector<std::int64_t> small_g;

    RatioEval(const BlockSystem& b, int comp, bool d) : bs(b), k(comp), dual(d), small_g(b.small.globals_of(comp)) {}

    double measure(const SpaceSpec& spec, const std::vector<double>& c) const {
        return dual ? component_dual_norm(spec, c).lower : norm_normalized(spec, c);
    }

    // max(ratio, 1/ratio), 1 for the zero vector
    double operator()(const std::vector<double>& a) const {
        const auto& host = bs.big.spec(k);
        std::vector<double> y(static_cast<std::size_t>(host.dim()), 0.0);
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (a[j] == 0.0) continue;
            const auto& b = bs.blocks[static_cast<std::size_t>(small_g[j])];
            for (std::size_t i = 0; i < b.E.size(); ++i)
                y[static_cast<std::size_t>(b.E[i])] += a[j] * b.eps[i] * (dual ? b.mu[i] : b.lambda[i]);
        }
        const double den = measure(bs.small.spec(k), a);
        const double num = measure(host, y);
        if (den == 0.0 && num == 0.0) return 1.0;
        if (den == 0.0 || num == 0.0) return std::numeric_limits<double>::infinity();
        return std::max(num / den, den / num);
    }
};

EquivalenceEstimate estimate_ratio(const BlockSystem& bs, int k, int samples, std::uint64_t seed, bool dual) {
    bs.validate();
    if (k < 0 || k >= bs.small.K()) throw std::out_of_range("equivalence_constant: component");
    const RatioEval f(bs, k, dual);
    const auto n = f.small_g.size();
    if (n == 0) throw std::invalid_argument("equivalence_constant: no blocks");
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    std::vector<double> best_a(n, 0.0);
    double best = 0.0;
    auto consider = [&](const std::vector<double>& a) {
        const double r = f(a);
        if (r > best) {
            best = r;
            best_a = a;
        }
    };
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> a(n, 0.0);
        a[j] = 1.0;
        consider(a);
    }
    consider(std::vector<double>(n, 1.0));
    for (int s = 0; s < samples; ++s) {
        std::vector<double> a(n, 0.0);
        switch (s % 3) {
            case 0:
                for (auto& v : a) v = rng.normal();
                break;
            case 1:
                for (auto& v : a) v = rng.sign();
                break;
            default:
                for (auto& v : a) v = rng.uniform() < 0.3 ? rng.normal() : 0.0;
        }
        consider(a);
    }
    EquivalenceEstimate out;
    out.certified_lower_C = best * best;
    // local ascent on the best sample
    auto a = best_a;
    double step = 0.25;
    for (int pass = 0; pass < 12 && std::isfinite(best); ++pass) {
        bool improved = false;
        for (std::size_t j = 0; j < n; ++j) {
            const double scale = std::max(std::fabs(a[j]), 0.1);
            for (double d : {step * scale, -step * scale}) {
                const double keep = a[j];
                a[j] += d;
                const double r = f(a);
                if (r > best * (1.0 + 1e-13)) {
                    best = r;
                    improved = true;
                } else {
                    a[j] = keep;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    out.heuristic_C = std::max(out.certified_lower_C, best * best);
    return out;
}

void push(Ledger& l, std::string cond, std::int64_t m, double value, double bound, bool less, std::string note = {}) {
    LedgerEntry e{std::move(cond), m, value, bound, less ? bound - value : value - bound, false, std::move(note)};
    e.ok = e.margin > 0.0;
    l.entries.push_back(std::move(e));
}

}  // namespace

EquivalenceEstimate equivalence_constant(const BlockSystem& bs, int k, int samples, std::uint64_t seed) {
    return estimate_ratio(bs, k, samples, seed, false);
}

EquivalenceEstimate dual_equivalence_constant(const BlockSystem& bs, int k, int samples, std::uint64_t seed) {
    return estimate_ratio(bs, k, samples, seed, true);
}

Ledger verify_conditions(const OperatorZ& T, const BlockSystem& bs, double eta, const std::vector<double>& schedule,
                         const std::optional<TailChain>& chain, const VerifyOptions& opt) {
    if (!(T.domain == bs.big) || !(T.codomain == bs.big)) throw std::invalid_argument("verify_conditions: T must act on the big truncation");
    bs.validate();
    const auto N = bs.small.size();
    if (static_cast<std::int64_t>(schedule.size()) != N) throw std::invalid_argument("verify_conditions: one eta_n per turn");
    double tail = 0.0;
    for (std::int64_t t = 0; t < N; ++t) {
        if (!(schedule[static_cast<std::size_t>(t)] > 0.0)) throw std::invalid_argument("verify_conditions: eta_n must be positive");
        tail += static_cast<double>(t) * schedule[static_cast<std::size_t>(t)];
    }
    if (!(tail < eta)) throw std::invalid_argument("verify_conditions: schedule violation, sum_m sum_{n>m} eta_n >= eta");
    if (chain) {
        if (static_cast<std::int64_t>(chain->size()) != N + 1) throw std::invalid_argument("verify_conditions: tail chain needs turns + 1 entries");
        for (const auto& c : *chain)
            if (static_cast<int>(c.size()) != bs.big.K()) throw std::invalid_argument("verify_conditions: one tail per component");
    }

    const auto A = build_A(bs.small, bs.big, bs);
    const auto B = build_B(bs.big, bs.small, bs);
    const Eigen::MatrixXd BA = B.m * A.m;
    const Eigen::MatrixXd M = B.m * T.m * A.m;
    const Eigen::MatrixXd TtB = T.m.transpose() * B.m.transpose();  // column n = values of T* x*_n

    Ledger out;
    push(out, "schedule", -1, tail, eta, true, "sum_m sum_{n>m} eta_n");

    std::vector<Ledger> per(static_cast<std::size_t>(N));
    parallel_for(static_cast<std::size_t>(N), opt.threads, [&](std::size_t i) {
        const auto m = static_cast<std::int64_t>(i);
        auto& l = per[i];
        const double em = schedule[i];
        const double bio = BA(m, m);
        push(l, "iii", m, std::fabs(bio - 1.0), eta, true, "|x*_m(x_m) - 1|");
        double past = 0.0, future = 0.0;
        for (std::int64_t n = 0; n < N; ++n) {
            if (n < m) past += std::fabs(M(m, n));
            if (n > m) future += std::fabs(M(m, n));
        }
        push(l, "iv", m, past, em, true);
        push(l, "v", m, future, em, true);
        if (chain) {
            const auto r = restricted_dual_norm_coords(bs.big, TtB.col(m), (*chain)[i + 1]);
            push(l, "vi_dual", m, r.upper, em, true, "l1 upper bound of ||T* x*_m restricted to W^(m+1)||");
            const int k = bs.blocks[i].host;
            const auto mk = (*chain)[i][static_cast<std::size_t>(k)];
            const Eigen::VectorXd xm = bs.x(m);
            std::vector<double> head(static_cast<std::size_t>(bs.big.dim(k)), 0.0);
            for (std::int64_t j = 0; j < std::min(mk, bs.big.dim(k)); ++j) head[static_cast<std::size_t>(j)] = xm[bs.big.global(k, j)];
            push(l, "vi_dist", m, norm_normalized(bs.big.spec(k), head), em, true, "norm of the part of x_m below the tail");
        }
    });
    for (auto& l : per) out.entries.insert(out.entries.end(), l.entries.begin(), l.entries.end());

    for (int k = 0; k < bs.small.K(); ++k) {
        const auto e = equivalence_constant(bs, k, opt.samples, derive_seed(opt.seed, 2 * static_cast<std::uint64_t>(k)));
        push(out, "i", k, e.certified_lower_C, opt.C + eta, true, "certified lower bound of the impartial constant, component k");
        const auto d = dual_equivalence_constant(bs, k, opt.samples, derive_seed(opt.seed, 2 * static_cast<std::uint64_t>(k) + 1));
        push(out, "ii", k, d.heuristic_C, opt.C + eta, true, "sampled dual-norm ratio, component k");
    }
    return out;
}

std::optional<double> paper_bound_a(double lambda, double K, double C, double eta) {
    const double den = 1.0 - 5.0 * lambda * K * eta;
    if (!(den > 0.0)) return std::nullopt;
    return lambda * K * C * C / den;
}

std::optional<double> paper_bound_b(double lambda, double K, double C, double eta, double T_norm) {
    const double den = 1.0 - 2.0 * lambda * std::sqrt(C) * (3.0 + T_norm) * K * eta;
    if (!(den > 0.0)) return std::nullopt;
    return lambda * K * C * C / den;
}

std::pair<ZTrunc, std::vector<std::int64_t>> sub_trunc(const ZTrunc& t, const std::vector<int>& comps) {
    std::vector<SpaceSpec> specs;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (comps[i] < 0 || comps[i] >= t.K()) throw std::out_of_range("sub_trunc: component");
        if (i > 0 && comps[i] <= comps[i - 1]) throw std::invalid_argument("sub_trunc: components must increase");
        specs.push_back(t.spec(comps[i]));
    }
    ZTrunc sub(specs);
    std::vector<std::int64_t> map(static_cast<std::size_t>(sub.size()));
    for (std::int64_t g = 0; g < sub.size(); ++g) {
        const auto [k, j] = sub.coord(g);
        map[static_cast<std::size_t>(g)] = t.global(comps[static_cast<std::size_t>(k)], j);
    }
    return {std::move(sub), std::move(map)};
}

FactorizationCertificate assemble_factorization(const OperatorZ& T, const BlockSystem& bs, const DiagonalFactors& diag,
                                                double eta, double K, Ledger ledger, const AssembleOptions& opt) {
    FactorizationCertificate c;
    c.branch = opt.branch == Branch::A ? "a" : "b";
    c.eta = eta;
    c.lambda = opt.lambda;
    c.C_lower = opt.C;
    c.K = K;
    c.T_norm_upper = opt.T_norm_upper;
    c.ledger = std::move(ledger);
    auto fail = [&](std::string stage, std::string msg) {
        c.success = false;
        c.stage = std::move(stage);
        c.message = std::move(msg);
        return c;
    };

    c.A = build_A(bs.small, bs.big, bs);
    c.B = build_B(bs.big, bs.small, bs);
    c.D = build_D(T, bs);
    const auto N = bs.small.size();
    if (diag.A.m.rows() != N || diag.A.m.cols() != N || diag.B.m.rows() != N || diag.B.m.cols() != N)
        return fail("assemble", "diagonal factors have the wrong shape");
    const double diag_err = (diag.B.m * c.D.m * diag.A.m - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff();
    push(c.ledger, "diag_factorization", -1, diag_err, 1e-10, true, "max |B_hat D A_hat - I|");
    if (!(diag_err <= 1e-10)) return fail("assemble", "B_hat D A_hat is not the identity");

    const double small_a = 5.0 * opt.lambda * K * eta;
    const double small_b = 2.0 * opt.lambda * std::sqrt(opt.C) * (3.0 + opt.T_norm_upper) * K * eta;
    if (opt.branch == Branch::A) {
        push(c.ledger, "eta_small", -1, small_a, 1.0, true, "5 lambda K eta < 1");
        c.paper_bound = paper_bound_a(opt.lambda, K, opt.C, eta);
    } else {
        push(c.ledger, "eta_small", -1, small_b, 1.0, true, "2 lambda sqrt(C) (3 + ||T||) K eta < 1");
        c.paper_bound = paper_bound_b(opt.lambda, K, opt.C, eta, opt.T_norm_upper);
    }

    std::vector<int> gamma = opt.gamma;
    if (gamma.empty())
        for (int k = 0; k < bs.small.K(); ++k) gamma.push_back(k);
    c.gamma = gamma;
    auto [tg, map] = sub_trunc(bs.small, gamma);
    const auto Ng = tg.size();

    const Eigen::MatrixXd AAh = c.A.m * diag.A.m;            // big x N
    const Eigen::MatrixXd BhB = diag.B.m * c.B.m;            // N x big
    const Eigen::MatrixXd Qfull = BhB * T.m * AAh;           // N x N
    Eigen::MatrixXd Q(Ng, Ng), At(bs.big.size(), Ng), Bp(Ng, bs.big.size());
    for (std::int64_t a = 0; a < Ng; ++a) {
        At.col(a) = AAh.col(map[static_cast<std::size_t>(a)]);
        Bp.row(a) = BhB.row(map[static_cast<std::size_t>(a)]);
        for (std::int64_t b = 0; b < Ng; ++b) Q(a, b) = Qfull(map[static_cast<std::size_t>(a)], map[static_cast<std::size_t>(b)]);
    }
    c.Q = OperatorZ(tg, tg, Q);
    c.A_tilde = OperatorZ(tg, bs.big, At);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Q);
    const double rc = lu.rcond();
    c.q_condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    push(c.ledger, "q_condition", -1, c.q_condition, 1e12, true, "estimated condition number of Q");
    if (!(c.q_condition <= 1e12)) return fail("assemble", "Q is numerically singular");

    c.B_tilde = OperatorZ(bs.big, tg, lu.solve(Bp));
    const Eigen::MatrixXd prod = c.B_tilde.m * T.m * c.A_tilde.m;
    c.residual_max = (prod - Eigen::MatrixXd::Identity(Ng, Ng)).cwiseAbs().maxCoeff();
    push(c.ledger, "residual", -1, c.residual_max, 1e-8, true, "max |B~ T A~ - I|");

    c.norm_A_lower = operator_norm_bounds(c.A_tilde, opt.norm).certified_lower;
    c.norm_B_lower = operator_norm_bounds(c.B_tilde, opt.norm).certified_lower;
    c.norm_product_lower = c.norm_A_lower * c.norm_B_lower;

    if (!(c.residual_max <= 1e-8)) return fail("residual", "B~ T A~ differs from the identity");
    c.success = true;
    return c;
}

}  // namespace haarfactor
