#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <set>
#include <vector>

#include "haarfactor/sumspace.hpp"

namespace haarfactor {

// Dense matrix in normalized global coordinates: column g holds the coordinates of T e_g.
struct OperatorZ {
    ZTrunc domain;
    ZTrunc codomain;
    Eigen::MatrixXd m;

    OperatorZ() = default;
    OperatorZ(ZTrunc dom, ZTrunc cod, Eigen::MatrixXd mat);
    static OperatorZ identity(const ZTrunc& t);
    static OperatorZ zero(const ZTrunc& dom, const ZTrunc& cod);

    bool endomorphism() const { return domain == codomain; }
    // P_rows T P_cols, same spaces (the norm equals ||P_rows T|_{Z_cols}||).
    OperatorZ masked(const std::set<int>& rows, const std::set<int>& cols) const;
};

ZVector apply(const OperatorZ& T, const ZVector& v);
double diagonal_delta(const OperatorZ& T);
bool is_diagonal(const OperatorZ& T);

struct NormBounds {
    double certified_lower = 0.0;   // ratio attained by `witness`
    double heuristic_value = 0.0;   // after fine refinement; also witnessed, >= certified_lower
    double certified_upper = 0.0;   // analytic bound, see analytic_norm_upper
    Eigen::VectorXd witness;        // domain coordinates
};

struct NormOptions {
    int trials = 3;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    int max_passes = 16;
};

NormBounds operator_norm_bounds(const OperatorZ& T, int trials, std::uint64_t seed, unsigned threads = 1);
NormBounds operator_norm_bounds(const OperatorZ& T, const NormOptions& opt);

// max_k ( exact diagonal part on unconditional components + sum_j ||P_k(T e_j) - diag|| );
// valid because every normalized coordinate functional has norm 1.
double analytic_norm_upper(const OperatorZ& T);

struct DiagonalFactors {
    OperatorZ A;
    OperatorZ B;
    NormBounds norm_B;
};

// Identity = B D A with A = I and B = D^{-1}.
DiagonalFactors diagonal_factorization(const OperatorZ& D, double delta, const NormOptions& opt = {});

OperatorZ random_large_diagonal(const ZTrunc& t, double delta, double off_diag_scale, std::uint64_t seed);

struct GammaSelection {
    std::vector<int> gamma;          // sorted component indices
    std::vector<int> picks;          // in the order chosen
    std::vector<int> visited;        // Omega indices visited, in order
    double bound_upper = 0.0;        // analytic upper bound of ||P_G S|_{Z_G}||
    double bound_lower = 0.0;        // post hoc certified lower bound
    double s_norm_lower = 0.0;       // certified lower bound of ||S||
    double target = 0.0;             // 2 ||S|| + rho with the lower estimate of ||S||
    double single_target = 0.0;      // ||S|| + rho
};

GammaSelection select_gamma(const OperatorZ& S, const std::vector<std::vector<int>>& omega, double rho, int budget,
                            const NormOptions& opt = {});

}  // namespace haarfactor
