#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

namespace haarfactor {

// [pos/2^level, (pos+1)/2^level)
struct DyadicInterval {
    int level = 0;
    std::int64_t pos = 0;

    DyadicInterval() = default;
    DyadicInterval(int level, std::int64_t pos);

    double measure() const;
    double left() const;
    double right() const;
    bool contains(const DyadicInterval& other) const;
    bool disjoint(const DyadicInterval& other) const;
    DyadicInterval left_half() const { return {level + 1, 2 * pos}; }
    DyadicInterval right_half() const { return {level + 1, 2 * pos + 1}; }

    friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
};

struct DyadicRect {
    DyadicInterval x;
    DyadicInterval y;

    double measure() const { return x.measure() * y.measure(); }
    bool contains(const DyadicRect& other) const {
        return x.contains(other.x) && y.contains(other.y);
    }
    friend bool operator==(const DyadicRect&, const DyadicRect&) = default;
};

enum class SpaceKindDim { OneParam, TwoParam };

struct HaarIndex {
    std::variant<DyadicInterval, DyadicRect> support;
    std::int64_t ordinal = 0;  // 1-based position in space_index_order

    bool two_param() const { return std::holds_alternative<DyadicRect>(support); }
    const DyadicInterval& interval() const { return std::get<DyadicInterval>(support); }
    const DyadicRect& rect() const { return std::get<DyadicRect>(support); }
};

int haar_eval(const DyadicInterval& I, double x);
int rect_haar_eval(const DyadicRect& R, double x, double y);

// Antidiagonal enumeration of N x N: (1,1)->1, (1,2)->2, (2,1)->3, (1,3)->4, ...
std::int64_t pair_encode(std::int64_t k, std::int64_t j);
std::pair<std::int64_t, std::int64_t> pair_decode(std::int64_t n);

// 0-based ordinal of an interval in the (level, pos) order.
inline std::int64_t interval_ordinal0(const DyadicInterval& I) {
    return (std::int64_t{1} << I.level) - 1 + I.pos;
}
DyadicInterval interval_from_ordinal0(std::int64_t o);

inline std::int64_t dim1d(int depth) { return (std::int64_t{2} << depth) - 1; }

// Fixed enumeration of the 2D Haar system up to a depth.  rect_of[o] gives the pair of
// 1D ordinals, ordinal_of[ox * n1 + oy] the inverse.
struct RectOrder {
    int depth = 0;
    std::int64_t n1 = 0;
    std::vector<std::pair<std::int64_t, std::int64_t>> rect_of;
    std::vector<std::int64_t> ordinal_of;
};

const RectOrder& rect_order(int depth);

std::vector<HaarIndex> space_index_order(SpaceKindDim kind, int depth);

}  // namespace haarfactor
