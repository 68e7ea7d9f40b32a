#include "haarfactor/game.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "haarfactor/estimates.hpp"
#include "haarfactor/util.hpp"

namespace haarfactor {

std::string branch_name(GameBranch b) { return b == GameBranch::Thm25 ? "thm_2_5" : "thm_2_7"; }

GameBranch branch_from_name(const std::string& s) {
    if (s == "thm_2_5") return GameBranch::Thm25;
    if (s == "thm_2_7") return GameBranch::Thm27;
    throw std::invalid_argument("unknown branch: " + s);
}

std::string mode_name(ConstraintMode m) { return m == ConstraintMode::Tolerant ? "tolerant" : "strict"; }

ConstraintMode mode_from_name(const std::string& s) {
    if (s == "tolerant") return ConstraintMode::Tolerant;
    if (s == "strict") return ConstraintMode::Strict;
    throw std::invalid_argument("unknown constraint mode: " + s);
}

void GameConfig::validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("config: eta must lie in (0, 1]");
    if (small.K() < 1) throw std::invalid_argument("config: empty small system");
    if (small.K() > big.K()) throw std::invalid_argument("config: small system has more components than the ambient");
    for (int k = 0; k < small.K(); ++k) {
        const auto& s = small.spec(k);
        const auto& b = big.spec(k);
        if (s.kind != b.kind || s.p != b.p || s.q != b.q)
            throw std::invalid_argument("config: component " + std::to_string(k) + " differs between small and big");
        if (s.depth >= b.depth)
            throw std::invalid_argument("config: component " + std::to_string(k) + " does not fit strictly inside the ambient");
    }
    if (delta && !(*delta > 0.0)) throw std::invalid_argument("config: delta must be positive");
    if (!(C >= 1.0)) throw std::invalid_argument("config: C must be >= 1");
    if (!(norm_slack >= 1.0)) throw std::invalid_argument("config: norm_slack must be >= 1");
    if (norm_trials < 1) throw std::invalid_argument("config: norm_trials must be >= 1");
    if (equivalence_samples < 0) throw std::invalid_argument("config: equivalence_samples must be >= 0");
    if (rho && !(*rho > 0.0)) throw std::invalid_argument("config: rho must be positive");
    for (const auto& o : omega) {
        if (o.empty()) throw std::invalid_argument("config: empty omega set");
        for (int c : o)
            if (c < 0 || c >= small.K()) throw std::invalid_argument("config: omega refers to a missing component");
    }
}

std::vector<std::vector<int>> GameConfig::effective_omega() const {
    if (!omega.empty()) return omega;
    std::vector<std::vector<int>> out(2);
    for (int k = 0; k < small.K(); ++k) out[static_cast<std::size_t>(k % 2)].push_back(k);
    if (out[1].empty()) out.pop_back();
    return out;
}

namespace {

Eigen::VectorXd block_vector(const ZTrunc& big, const Block& b, bool dual) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(big.size());
    for (std::size_t i = 0; i < b.E.size(); ++i) v[big.global(b.host, b.E[i])] = b.eps[i] * (dual ? b.mu[i] : b.lambda[i]);
    return v;
}

std::int64_t protected_count(const GameState& s, int host) {
    std::int64_t l = 1;
    for (const auto& b : s.played)
        if (b.host == host)
            for (auto e : b.E) l = std::max(l, e + 1);
    return l;
}

}  // namespace

AdversaryStrategy::AdversaryStrategy(const OperatorZ& T, const GameConfig& cfg, double T_norm_lower)
    : T_(T), cfg_(cfg), tau_(cfg.norm_slack * T_norm_lower), tails_(static_cast<std::size_t>(cfg.big.K()), 0) {}

std::vector<std::int64_t> AdversaryStrategy::advance_tails(const GameState& s, std::int64_t upto, double eta_cur) {
    for (std::int64_t j = 0; j < upto; ++j) {
        const Eigen::VectorXd r = T_.m.transpose() * block_vector(cfg_.big, s.played[static_cast<std::size_t>(j)], true);
        const auto prof = tail_profile_coords(cfg_.big, r, eta_cur);
        for (std::size_t k = 0; k < tails_.size(); ++k) tails_[k] = std::max(tails_[k], prof[k]);
    }
    return tails_;
}

PlayerIMove AdversaryStrategy::move(const GameState& s) {
    const auto& big = cfg_.big;
    PlayerIMove m;
    m.n = s.n;
    m.host = cfg_.small.coord(s.n).first;
    m.eta_n = eta_n(cfg_.eta, s.n + 1, tau_, cfg_.C);
    m.l_n = std::min(protected_count(s, m.host), big.dim(m.host));
    for (const auto& b : s.played) {
        const Eigen::VectorXd x = block_vector(big, b, false);
        m.annihilate.push_back(x);
        m.annihilate.push_back(T_.m * x);
    }
    for (std::int64_t i = 0; i < m.l_n; ++i) {
        const auto g = big.global(m.host, i);
        m.annihilate.push_back(Eigen::VectorXd::Unit(big.size(), g));
        m.annihilate.push_back(T_.m.col(g));
    }
    if (cfg_.branch == GameBranch::Thm25) {
        for (const auto& b : s.played) {
            const Eigen::VectorXd xs = block_vector(big, b, true);
            m.preannihilate.push_back(xs);
            m.preannihilate.push_back(T_.m.transpose() * xs);
        }
        for (std::int64_t i = 0; i < m.l_n; ++i) {
            const auto g = big.global(m.host, i);
            m.preannihilate.push_back(Eigen::VectorXd::Unit(big.size(), g));
            m.preannihilate.push_back(T_.m.row(g).transpose());
        }
    } else {
        m.tails = advance_tails(s, s.n, m.eta_n);
    }
    return m;
}

SignChoice AdversaryStrategy::signs(const GameState& s, const PlayerIMove& m1, const PlayerIIMove& m2) {
    return sign_selection(T_, m1.host, m2.E, m2.lambda, m2.mu, s.delta, cfg_.eta);
}

std::vector<std::int64_t> AdversaryStrategy::final_tails(const GameState& s) {
    if (cfg_.branch != GameBranch::Thm27) return {};
    const auto N = static_cast<std::int64_t>(s.played.size());
    return advance_tails(s, N, eta_n(cfg_.eta, N + 1, tau_, cfg_.C));
}

std::int64_t haar_copy_image(const SpaceSpec& small, const SpaceSpec& big, const HaarCopyStrategy::Placement& p,
                             std::int64_t j) {
    auto shift = [&](const DyadicInterval& I, std::int64_t root) {
        return DyadicInterval{I.level + p.shift, (root << I.level) + I.pos};
    };
    if (p.shift < 0 || small.depth + p.shift > big.depth) throw std::invalid_argument("haar_copy_image: placement does not fit");
    if (!small.two_param()) return interval_ordinal0(shift(interval_from_ordinal0(j), p.px));
    const auto& rs = rect_order(small.depth);
    const auto& rb = rect_order(big.depth);
    const auto [ox, oy] = rs.rect_of.at(static_cast<std::size_t>(j));
    const auto X = interval_ordinal0(shift(interval_from_ordinal0(ox), p.px));
    const auto Y = interval_ordinal0(shift(interval_from_ordinal0(oy), p.py));
    return rb.ordinal_of[static_cast<std::size_t>(X * rb.n1 + Y)];
}

HaarCopyStrategy::HaarCopyStrategy(const GameConfig& cfg) : cfg_(cfg), placed_(static_cast<std::size_t>(cfg.small.K())) {}

namespace {

// Lower bounds of the Step-2 distances for the candidate x = e_p, x* = e*_p of the host.
struct Demands {
    const ZTrunc& big;
    const PlayerIMove& m;
    GameBranch branch;
    std::vector<double> a_norm;   // ||f|| for f in A_n
    std::vector<double> b_norm;   // l1 upper bound of ||b|| for b in B_n

    Demands(const ZTrunc& t, const PlayerIMove& mv, GameBranch br) : big(t), m(mv), branch(br) {
        for (const auto& f : m.annihilate) a_norm.push_back(z_norm_coords(big, f));
        for (const auto& b : m.preannihilate) b_norm.push_back(b.cwiseAbs().sum());
    }

    double dist_G(std::int64_t p) const {
        const auto g = big.global(m.host, p);
        double d = 0.0;
        for (std::size_t i = 0; i < m.annihilate.size(); ++i)
            if (a_norm[i] > 0.0) d = std::max(d, std::fabs(m.annihilate[i][g]) / a_norm[i]);
        return d;
    }

    double dist_W(std::int64_t p) const {
        if (branch == GameBranch::Thm27) return p < m.tails[static_cast<std::size_t>(m.host)] ? 1.0 : 0.0;
        const auto g = big.global(m.host, p);
        double d = 0.0;
        for (std::size_t i = 0; i < m.preannihilate.size(); ++i)
            if (b_norm[i] > 0.0) d = std::max(d, std::fabs(m.preannihilate[i][g]) / b_norm[i]);
        return d;
    }
};

}  // namespace

PlayerIIMove HaarCopyStrategy::respond(const GameState& s, const PlayerIMove& m1) {
    const auto [k, j] = cfg_.small.coord(s.n);
    const auto& ss = cfg_.small.spec(k);
    const auto& sb = cfg_.big.spec(k);
    const Demands dem(cfg_.big, m1, cfg_.branch);
    auto& pl = placed_[static_cast<std::size_t>(k)];
    if (pl.shift < 0) {
        const auto nodes = ss.dim();
        double best = std::numeric_limits<double>::infinity();
        std::int64_t best_root = -1;
        for (int sh = 0; sh + ss.depth <= sb.depth; ++sh) {
            const std::int64_t side = std::int64_t{1} << sh;
            for (std::int64_t px = 0; px < side; ++px)
                for (std::int64_t py = 0; py < (ss.two_param() ? side : 1); ++py) {
                    const Placement cand{sh, px, py};
                    const auto root = haar_copy_image(ss, sb, cand, 0);
                    if (root < m1.l_n) continue;
                    double score = 0.0;
                    for (std::int64_t v = 0; v < nodes; ++v) {
                        const auto p = haar_copy_image(ss, sb, cand, v);
                        score = std::max({score, dem.dist_G(p), dem.dist_W(p)});
                    }
                    if (score < best || (score == best && root < best_root)) {
                        best = score;
                        best_root = root;
                        pl = cand;
                    }
                }
        }
        if (pl.shift < 0)
            throw GameAbort("capacity: no subtree placement of component " + std::to_string(k) + " clears the protected ordinals");
    }
    const auto p = haar_copy_image(ss, sb, pl, j);
    if (p < m1.l_n) throw GameAbort("capacity: copy of (" + std::to_string(k) + "," + std::to_string(j) + ") falls in the protected range");
    const double d = s.T.m(cfg_.big.global(k, p), cfg_.big.global(k, p));
    PlayerIIMove out;
    if (d >= s.delta)
        out.sign_class = 1;
    else if (d <= -s.delta)
        out.sign_class = 2;
    else
        throw GameAbort("diagonal entry below delta at the copy of (" + std::to_string(k) + "," + std::to_string(j) + ")");
    out.E = {p};
    out.lambda = {1.0};
    out.mu = {1.0};
    out.dist_G = dem.dist_G(p);
    out.dist_W = dem.dist_W(p);
    std::ostringstream os;
    os << "shift=" << pl.shift << " px=" << pl.px << " py=" << pl.py;
    out.placement = os.str();
    if (cfg_.mode == ConstraintMode::Strict && (out.dist_G >= m1.eta_n || out.dist_W >= m1.eta_n)) {
        std::ostringstream err;
        err << "strict mode: turn " << s.n << " cannot meet the distance demands (dist_G >= " << out.dist_G
            << ", dist_W >= " << out.dist_W << ", eta_n = " << m1.eta_n << ")";
        throw GameAbort(err.str());
    }
    return out;
}

SignChoice sign_selection(const OperatorZ& T, int host, const std::vector<std::int64_t>& E,
                          const std::vector<double>& lambda, const std::vector<double>& mu, double delta, double eta) {
    const auto n = E.size();
    if (n == 0 || lambda.size() != n || mu.size() != n) throw std::invalid_argument("sign_selection: E, lambda, mu must match");
    if (host < 0 || host >= T.domain.K() || !T.endomorphism()) throw std::invalid_argument("sign_selection: bad host");
    std::vector<std::int64_t> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (E[i] < 0 || E[i] >= T.domain.dim(host)) throw std::out_of_range("sign_selection: ordinal outside host");
        g[i] = T.domain.global(host, E[i]);
    }
    // W_ij = mu_i lambda_j e*_i(T e_j); value = eps^T W eps
    Eigen::MatrixXd W(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) W(i, j) = mu[i] * lambda[j] * T.m(g[i], g[j]);
    const double d0 = T.m(g[0], g[0]);
    const double sigma = d0 >= 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i)
        if (!(sigma * T.m(g[i], g[i]) >= delta)) throw std::invalid_argument("sign_selection: diagonal entries over E do not share a sign class");
    SignChoice out;
    out.mean = W.trace();
    if (!(sigma * out.mean > delta * (1.0 - eta))) throw std::invalid_argument("sign_selection: weighted diagonal too small");
    const Eigen::MatrixXd Ws = W + W.transpose();
    std::vector<int> eps(n, 1);

    if (n <= 20) {
        Eigen::VectorXd e = Eigen::VectorXd::Ones(n);
        Eigen::VectorXd u = Ws * e;  // u = (W + W^T) eps
        double value = W.sum();
        double best = sigma * value;
        std::vector<int> best_eps = eps;
        const std::uint64_t count = std::uint64_t{1} << (n - 1);
        for (std::uint64_t step = 1; step < count; ++step) {
            // Gray code: flip bit = index of the lowest set bit, shifted past the fixed first sign
            const auto k = static_cast<std::size_t>(std::countr_zero(step)) + 1;
            const double ek = e[k];
            value += -2.0 * ek * (u[k] - 2.0 * W(k, k) * ek);
            u -= 2.0 * ek * Ws.col(k);
            e[k] = -ek;
            if (sigma * value > best) {
                best = sigma * value;
                for (std::size_t i = 0; i < n; ++i) best_eps[i] = e[i] > 0 ? 1 : -1;
            }
        }
        eps = best_eps;
        out.exhaustive = true;
    } else {
        // fix signs one at a time, never letting the conditional mean drop
        Eigen::VectorXd acc = Ws.col(0);  // sum over fixed j of (W_tj + W_jt) eps_j
        for (std::size_t t = 1; t < n; ++t) {
            eps[t] = sigma * acc[t] >= 0.0 ? 1 : -1;
            acc += static_cast<double>(eps[t]) * Ws.col(t);
        }
        out.exhaustive = false;
    }
    Eigen::VectorXd e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = eps[i];
    out.eps = eps;
    out.value = e.dot(W * e);
    return out;
}

GameResult run_game(const OperatorZ& T, const GameConfig& cfg, PlayerOne& p1, PlayerTwo& p2, const NormBounds& tnorm) {
    cfg.validate();
    if (!(T.domain == cfg.big) || !(T.codomain == cfg.big)) throw std::invalid_argument("run_game: T must act on the ambient truncation");
    const double measured = diagonal_delta(T);
    const double delta = cfg.delta.value_or(measured);
    if (!(delta > 0.0) || measured < delta) throw std::invalid_argument("run_game: diagonal of T is not large enough");

    GameResult res;
    auto& tr = res.transcript;
    tr.branch = branch_name(cfg.branch);
    tr.mode = mode_name(cfg.mode);
    tr.seed = cfg.seed;
    tr.eta = cfg.eta;
    tr.delta = delta;
    tr.T_norm_lower = tnorm.certified_lower;
    tr.T_norm_upper = tnorm.certified_upper;
    tr.tau = cfg.norm_slack * tnorm.certified_lower;

    GameState st{cfg, T, delta, {}, {}, 0};
    st.classes.resize(static_cast<std::size_t>(cfg.big.size()));
    for (std::int64_t g = 0; g < cfg.big.size(); ++g) {
        const double d = T.m(g, g);
        st.classes[static_cast<std::size_t>(g)] = d >= delta ? 1 : (d <= -delta ? 2 : 0);
    }
    tr.classes = st.classes;

    const auto N = cfg.small.size();
    try {
        for (std::int64_t t = 0; t < N; ++t) {
            st.n = t;
            auto m1 = p1.move(st);
            auto m2 = p2.respond(st, m1);
            const auto host = cfg.small.coord(t).first;
            if (m2.E.empty() || m2.lambda.size() != m2.E.size() || m2.mu.size() != m2.E.size())
                throw GameAbort("player II returned malformed weights");
            double lm = 0.0;
            for (std::size_t i = 0; i < m2.E.size(); ++i) {
                const auto g = cfg.big.global(host, m2.E[i]);
                if (st.classes[static_cast<std::size_t>(g)] != m2.sign_class) throw GameAbort("player II left its sign class");
                lm += m2.lambda[i] * m2.mu[i];
            }
            if (!(lm > 1.0 - cfg.eta && lm < 1.0 + cfg.eta)) throw GameAbort("player II violated 1-eta < sum lambda mu < 1+eta");
            auto sc = p1.signs(st, m1, m2);
            st.played.push_back({host, m2.E, m2.lambda, m2.mu, sc.eps});
            // keep the vectors out of the record; they are recomputable from the history
            m1.annihilate.clear();
            m1.preannihilate.clear();
            tr.turns.push_back({std::move(m1), std::move(m2), std::move(sc)});
        }
        tr.final_tails = p1.final_tails(st);
    } catch (const GameAbort& e) {
        tr.aborted = true;
        tr.abort_reason = e.what();
        return res;
    }

    BlockSystem bs{cfg.small, cfg.big, st.played};
    bs.validate();
    const double tn = tnorm.certified_upper;
    for (std::int64_t n = 0; n < N; ++n) {
        const Eigen::VectorXd xs = bs.x_star(n);
        double worst = 0.0;
        for (std::int64_t m = 0; m < n; ++m) worst = std::max(worst, std::fabs(xs.dot(T.m * bs.x(m))));
        const double bound = tn * std::sqrt(cfg.C + cfg.eta) * tr.turns[static_cast<std::size_t>(n)].p1.eta_n;
        tr.past.push_back({n, worst, bound, worst < bound});
    }
    res.blocks = std::move(bs);
    return res;
}

GameResult run_game(const OperatorZ& T, const GameConfig& cfg, PlayerOne& p1, PlayerTwo& p2) {
    return run_game(T, cfg, p1, p2, operator_norm_bounds(T, {cfg.norm_trials, cfg.seed, cfg.threads, 16}));
}

GameResult run_game(const OperatorZ& T, const GameConfig& cfg) {
    cfg.validate();
    const auto nb = operator_norm_bounds(T, {cfg.norm_trials, cfg.seed, cfg.threads, 16});
    AdversaryStrategy p1(T, cfg, nb.certified_lower);
    HaarCopyStrategy p2(cfg);
    return run_game(T, cfg, p1, p2, nb);
}

TailChain tail_chain(const Transcript& tr) {
    TailChain c;
    for (const auto& t : tr.turns) c.push_back(t.p1.tails);
    c.push_back(tr.final_tails);
    return c;
}

FactorizeResult factorize(const OperatorZ& T, const GameConfig& cfg) {
    cfg.validate();
    FactorizeResult out;
    auto& cert = out.certificate;
    cert.branch = cfg.branch == GameBranch::Thm25 ? "a" : "b";
    cert.eta = cfg.eta;
    auto fail = [&](std::string stage, std::string msg) {
        cert.success = false;
        cert.stage = std::move(stage);
        cert.message = std::move(msg);
        return out;
    };
    if (!(T.domain == cfg.big) || !(T.codomain == cfg.big)) return fail("precondition", "T must act on the ambient truncation");
    const double measured = diagonal_delta(T);
    const double delta = cfg.delta.value_or(measured);
    cert.delta = delta;
    if (!(delta > 0.0) || measured < delta) return fail("precondition", "diagonal of T is below the configured delta");

    const NormOptions nopt{cfg.norm_trials, cfg.seed, cfg.threads, 16};
    const auto nb = operator_norm_bounds(T, nopt);
    cert.T_norm_lower = nb.certified_lower;
    cert.T_norm_upper = nb.certified_upper;

    AdversaryStrategy p1(T, cfg, nb.certified_lower);
    HaarCopyStrategy p2(cfg);
    auto game = run_game(T, cfg, p1, p2, nb);
    out.transcript = game.transcript;
    if (!game.blocks) return fail("game", game.transcript.abort_reason);
    const auto& bs = *game.blocks;
    const auto& tr = out.transcript;

    std::vector<double> schedule;
    for (const auto& t : tr.turns) schedule.push_back(t.p1.eta_n);
    Ledger ledger;
    try {
        VerifyOptions vo{cfg.C, cfg.equivalence_samples, cfg.seed, cfg.threads};
        std::optional<TailChain> chain;
        if (cfg.branch == GameBranch::Thm27) chain = tail_chain(tr);
        ledger = verify_conditions(T, bs, cfg.eta, schedule, chain, vo);
    } catch (const std::exception& e) {
        return fail("verify", e.what());
    }
    for (const auto& t : tr.turns) {
        const double en = t.p1.eta_n;
        ledger.entries.push_back({"game_iii", t.p1.n, t.p2.dist_G, en, en - t.p2.dist_G, t.p2.dist_G < en, "lower bound of dist(x*_n, G_n)"});
        ledger.entries.push_back({"game_iv", t.p1.n, t.p2.dist_W, en, en - t.p2.dist_W, t.p2.dist_W < en,
                                  cfg.branch == GameBranch::Thm25 ? "lower bound of dist(x_n, W_n)" : "norm of x_n below the tail"});
    }
    for (const auto& p : tr.past) ledger.entries.push_back({"past_est", p.n, p.value, p.bound, p.bound - p.value, p.ok, ""});

    double C_lower = 1.0, C_heur = 1.0;
    for (const auto& e : ledger.of("i")) C_lower = std::max(C_lower, e.value);
    for (int k = 0; k < bs.small.K(); ++k)
        C_heur = std::max(C_heur, equivalence_constant(bs, k, cfg.equivalence_samples, derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(k))).heuristic_C);

    const auto D = build_D(T, bs);
    DiagonalFactors df;
    try {
        df = diagonal_factorization(D, (1.0 - cfg.eta) * delta, nopt);
    } catch (const std::exception& e) {
        cert.ledger = ledger;
        return fail("diagonal_factorization", e.what());
    }
    double K = 1.0;
    for (std::int64_t g = 0; g < D.m.rows(); ++g) K = std::max(K, 1.0 / std::fabs(D.m(g, g)));

    AssembleOptions ao;
    ao.branch = cfg.branch == GameBranch::Thm25 ? Branch::A : Branch::B;
    ao.C = C_lower;
    ao.T_norm_upper = nb.certified_upper;
    ao.norm = nopt;
    if (cfg.branch == GameBranch::Thm25) {
        const auto omega = cfg.effective_omega();
        const OperatorZ S(bs.small, bs.small, interaction_matrix(T, bs));
        auto sel = select_gamma(S, omega, cfg.rho.value_or(cfg.eta), bs.small.K(), nopt);
        for (std::size_t l = 0; l < omega.size(); ++l) {
            const bool hit = std::any_of(omega[l].begin(), omega[l].end(), [&](int c) {
                return std::find(sel.gamma.begin(), sel.gamma.end(), c) != sel.gamma.end();
            });
            out.gamma_meets_omega.push_back(hit);
            ledger.entries.push_back({"gamma_omega", static_cast<std::int64_t>(l), hit ? 1.0 : 0.0, 1.0, hit ? 0.0 : -1.0, hit,
                                      "Gamma meets Omega_l"});
        }
        ledger.entries.push_back({"gamma_norm", -1, sel.bound_upper, sel.target, sel.target - sel.bound_upper,
                                  sel.bound_upper <= sel.target, "upper bound of ||P_G S|_{Z_G}|| vs 2||S|| + rho"});
        ao.gamma = sel.gamma;
        out.gamma = std::move(sel);
    }
    cert = assemble_factorization(T, bs, df, cfg.eta, K, std::move(ledger), ao);
    cert.delta = delta;
    cert.C_heuristic = C_heur;
    cert.T_norm_lower = nb.certified_lower;
    cert.T_norm_upper = nb.certified_upper;
    return out;
}

}  // namespace haarfactor
