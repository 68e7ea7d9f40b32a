#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <set>
#include <vector>

#include "haarfactor/funcspace.hpp"

namespace haarfactor {

// Finite piece of Z = l_inf(X_k).  Global coordinates follow pair_encode over (k, j),
// skipping ordinals beyond each component's dimension.  Components and ordinals are
// 0-based in the C++ API.
class ZTrunc {
public:
    ZTrunc() = default;
    explicit ZTrunc(std::vector<SpaceSpec> components);

    int K() const { return static_cast<int>(components_.size()); }
    std::int64_t size() const { return static_cast<std::int64_t>(coord_.size()); }
    const SpaceSpec& spec(int k) const { return components_.at(static_cast<std::size_t>(k)); }
    const std::vector<SpaceSpec>& components() const { return components_; }
    std::int64_t dim(int k) const { return spec(k).dim(); }

    // global index -> (k, j)
    std::pair<int, std::int64_t> coord(std::int64_t g) const { return coord_[static_cast<std::size_t>(g)]; }
    std::int64_t global(int k, std::int64_t j) const {
        return global_of_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
    }
    const std::vector<std::int64_t>& globals_of(int k) const { return global_of_[static_cast<std::size_t>(k)]; }

    friend bool operator==(const ZTrunc& a, const ZTrunc& b) { return a.components_ == b.components_; }

private:
    std::vector<SpaceSpec> components_;
    std::vector<std::pair<int, std::int64_t>> coord_;
    std::vector<std::vector<std::int64_t>> global_of_;
};

struct ZVector {
    std::vector<HaarExpansion> parts;
    static ZVector zero(const ZTrunc& t);
};

// Component k acts on L-infinity coefficients: z*(v) = sum_k sum_j parts[k][j] * a_{k,j}.
struct ZFunctional {
    std::vector<std::vector<double>> parts;
    static ZFunctional zero(const ZTrunc& t);
    static ZFunctional coordinate(const ZTrunc& t, int k, std::int64_t j);  // e*_{(k,j)}
};

ZVector basis_vector(const ZTrunc& t, int k, std::int64_t j);  // e_{(k,j)} = h / ||h||

void check_shape(const ZTrunc& t, const ZVector& v);
void check_shape(const ZTrunc& t, const ZFunctional& f);

double z_norm(const ZTrunc& t, const ZVector& v);
ZVector project(const std::set<int>& N, const ZVector& v);
double pair(const ZFunctional& f, const ZVector& v);

// Normalized global coordinates.
Eigen::VectorXd to_coords(const ZTrunc& t, const ZVector& v);
ZVector from_coords(const ZTrunc& t, const Eigen::VectorXd& c);
// Values z*(e_g) on the normalized basis.
Eigen::VectorXd functional_coords(const ZTrunc& t, const ZFunctional& f);
ZFunctional functional_from_coords(const ZTrunc& t, const Eigen::VectorXd& r);

std::vector<double> component_coords(const ZTrunc& t, const Eigen::VectorXd& c, int k);
double component_norm(const ZTrunc& t, const Eigen::VectorXd& c, int k);
double z_norm_coords(const ZTrunc& t, const Eigen::VectorXd& c);

struct DualNormBounds {
    double lower = 0.0;  // witnessed
    double upper = 0.0;  // l1 of normalized coordinate values (coordinate functionals have norm 1)
};

// Norm of z* restricted to l_inf(W_k), W_k = [e_{(k,j)} : j >= tails[k]] with 0-based
// starting ordinals; tails[k] = dim(k) means W_k = {0}.
DualNormBounds restricted_dual_norm(const ZTrunc& t, const ZFunctional& f, const std::vector<std::int64_t>& tails);
DualNormBounds restricted_dual_norm_coords(const ZTrunc& t, const Eigen::VectorXd& r,
                                           const std::vector<std::int64_t>& tails);
// Single-component dual norm bounds for values r on the normalized basis restricted to j >= from.
DualNormBounds component_dual_norm(const SpaceSpec& spec, const std::vector<double>& r, std::int64_t from = 0);

}  // namespace haarfactor
