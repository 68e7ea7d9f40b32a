#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "haarfactor/operators.hpp"

namespace haarfactor {

// One reproduced vector: x = sum eps_i lambda_i e_{(host, E_i)}, x* = sum eps_i mu_i e*_{(host, E_i)}.
// Weights live in normalized coordinates of the big truncation.
struct Block {
    int host = 0;
    std::vector<std::int64_t> E;  // 0-based ordinals inside the host component
    std::vector<double> lambda;
    std::vector<double> mu;
    std::vector<int> eps;
};

// blocks[g] reproduces the small basis vector with global index g.
struct BlockSystem {
    ZTrunc small;
    ZTrunc big;
    std::vector<Block> blocks;

    void validate() const;
    Eigen::VectorXd x(std::int64_t g) const;       // big coordinates of x_g
    Eigen::VectorXd x_star(std::int64_t g) const;  // values of x*_g on the big normalized basis
    double lambda_mu(std::int64_t g) const;        // sum lambda_i mu_i

    // x_n = e_n inside the same truncation.
    static BlockSystem identity(const ZTrunc& t);
};

OperatorZ build_A(const ZTrunc& trunc_small, const ZTrunc& trunc_big, const BlockSystem& bs);
OperatorZ build_B(const ZTrunc& trunc_big, const ZTrunc& trunc_small, const BlockSystem& bs);
OperatorZ build_D(const OperatorZ& T, const BlockSystem& bs);

// Matrix [x*_m(T x_n)] with the diagonal zeroed.
Eigen::MatrixXd interaction_matrix(const OperatorZ& T, const BlockSystem& bs);

struct LedgerEntry {
    std::string cond;
    std::int64_t m = -1;  // turn (0-based) or -1 for global entries
    double value = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // bound - value for "<" conditions, value - bound for ">" ones
    bool ok = true;
    std::string note;
};

struct Ledger {
    std::vector<LedgerEntry> entries;
    bool all_ok() const;
    bool ok(const std::string& cond) const;
    std::vector<LedgerEntry> of(const std::string& cond) const;
};

// eta_n for the 1-based turn n: eta / (2^{n+2} n (1 + tau) sqrt(C + eta)) / 2.
double eta_n(double eta, std::int64_t n, double tau, double C);
std::vector<double> eta_schedule(double eta, std::int64_t turns, double tau, double C);

struct EquivalenceEstimate {
    double certified_lower_C = 1.0;  // (best witnessed ratio)^2
    double heuristic_C = 1.0;        // after local ascent
};

// Impartial equivalence of (x_{(k,j)})_j with the unit vectors of reference = small.spec(k).
EquivalenceEstimate equivalence_constant(const BlockSystem& bs, int k, int samples, std::uint64_t seed);
// Same for the functionals against the coordinate functionals; dual norms are sampled.
EquivalenceEstimate dual_equivalence_constant(const BlockSystem& bs, int k, int samples, std::uint64_t seed);

struct VerifyOptions {
    double C = 1.0;  // target equivalence constant
    int samples = 64;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

// chain[t] holds the tails V^{(t+1)} chosen at 0-based turn t (0-based starting ordinals per
// big component); chain has turns + 1 entries, the last one being the chain after the game.
using TailChain = std::vector<std::vector<std::int64_t>>;

Ledger verify_conditions(const OperatorZ& T, const BlockSystem& bs, double eta, const std::vector<double>& schedule,
                         const std::optional<TailChain>& chain, const VerifyOptions& opt = {});

enum class Branch { A, B };  // which analytic bound: restricted identity (A) or whole sum (B)

struct FactorizationCertificate {
    bool success = false;
    std::string stage;    // failing stage when !success
    std::string message;
    std::string branch;
    double delta = 0.0;
    double eta = 0.0;
    double lambda = 1.0;
    double C_lower = 1.0;
    double C_heuristic = 1.0;
    double K = 1.0;
    double T_norm_lower = 0.0;
    double T_norm_upper = 0.0;
    Ledger ledger;
    OperatorZ A, B, D, Q, A_tilde, B_tilde;
    std::vector<int> gamma;  // thm_2_5 only; empty means all components
    double q_condition = 0.0;
    double residual_max = 0.0;
    double norm_A_lower = 0.0;
    double norm_B_lower = 0.0;
    double norm_product_lower = 0.0;
    std::optional<double> paper_bound;  // null when the eta-smallness condition fails
};

struct AssembleOptions {
    Branch branch = Branch::A;
    double lambda = 1.0;
    double C = 1.0;
    double T_norm_upper = 0.0;  // used by the (b) bound
    std::vector<int> gamma;     // restrict the identity to these small components; empty = all
    NormOptions norm;
};

// Q = B_hat B T A A_hat, A~ = A A_hat, B~ = Q^{-1} B_hat B.  Ledger entries are appended to `ledger`.
FactorizationCertificate assemble_factorization(const OperatorZ& T, const BlockSystem& bs, const DiagonalFactors& diag,
                                                double eta, double K, Ledger ledger, const AssembleOptions& opt);

// Paper bounds; nullopt when the smallness condition fails.
std::optional<double> paper_bound_a(double lambda, double K, double C, double eta);
std::optional<double> paper_bound_b(double lambda, double K, double C, double eta, double T_norm);

// Sub-truncation of the given components and the map from its global indices to the parent's.
std::pair<ZTrunc, std::vector<std::int64_t>> sub_trunc(const ZTrunc& t, const std::vector<int>& comps);

}  // namespace haarfactor
