#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "haarfactor/dyadic.hpp"

namespace haarfactor {

enum class Kind { Lp, Hp, VMO, HpHq, VMOHr, LrLs };

// Exponent slots: Lp/Hp use p; HpHq uses (p, q); VMOHr uses r = p; LrLs uses (r, s) = (p, q).
struct SpaceSpec {
    Kind kind = Kind::Hp;
    int depth = 0;
    double p = 2.0;
    double q = 2.0;

    bool two_param() const { return kind == Kind::HpHq || kind == Kind::VMOHr || kind == Kind::LrLs; }
    SpaceKindDim dim_kind() const { return two_param() ? SpaceKindDim::TwoParam : SpaceKindDim::OneParam; }
    std::int64_t dim() const;
    // Whether sign changes of coefficients are isometries (exact diagonal norms).
    bool unconditional() const;
    std::string label() const;
    void validate() const;

    static SpaceSpec hp(double p, int depth) { return {Kind::Hp, depth, p, 2.0}; }
    static SpaceSpec lp(double p, int depth) { return {Kind::Lp, depth, p, 2.0}; }
    static SpaceSpec vmo(int depth) { return {Kind::VMO, depth, 2.0, 2.0}; }
    static SpaceSpec hphq(double p, double q, int depth) { return {Kind::HpHq, depth, p, q}; }
    static SpaceSpec vmohr(double r, int depth) { return {Kind::VMOHr, depth, r, 2.0}; }
    static SpaceSpec lrls(double r, double s, int depth) { return {Kind::LrLs, depth, r, s}; }

    friend bool operator==(const SpaceSpec&, const SpaceSpec&) = default;
};

std::string kind_name(Kind k);
Kind kind_from_name(const std::string& name);

// f = sum a_idx h_idx with L-infinity normalized Haar functions; coefficients stored densely by
// 0-based ordinal of space_index_order.
struct HaarExpansion {
    SpaceKindDim dim = SpaceKindDim::OneParam;
    int depth = 0;
    std::vector<double> coeffs;

    HaarExpansion() = default;
    HaarExpansion(SpaceKindDim d, int depth);
    static HaarExpansion zero_like(const SpaceSpec& spec) { return {spec.dim_kind(), spec.depth}; }

    std::int64_t size() const { return static_cast<std::int64_t>(coeffs.size()); }
    std::int64_t ordinal0(const HaarIndex& idx) const;
    double get(const HaarIndex& idx) const;
    void set(const HaarIndex& idx, double v);
    void add(const HaarIndex& idx, double v);
    // Same function written at a larger depth.
    HaarExpansion reencode(int new_depth) const;
};

// Values on the dyadic grid of side 2^-(depth+1); 2D stored x-major (x cell * n + y cell).
struct StepFunction {
    SpaceKindDim dim = SpaceKindDim::OneParam;
    int resolution = 0;  // cells per axis = 2^resolution
    std::vector<double> values;
};

StepFunction square_function(const HaarExpansion& f);
StepFunction evaluate(const HaarExpansion& f);

double norm(const SpaceSpec& spec, const HaarExpansion& f);
// Same as norm() with raw L-infinity coefficients at spec.depth.
double norm_coeffs(const SpaceSpec& spec, std::span<const double> a);

double dual_coefficient(const HaarIndex& idx, const HaarExpansion& f);

// ||h_j||_X for every ordinal of the space (cached per spec).
const std::vector<double>& basis_norms(const SpaceSpec& spec);

// Norm of sum c_j e_j with e_j = h_j / ||h_j||.
double norm_normalized(const SpaceSpec& spec, std::span<const double> c);

}  // namespace haarfactor
