#include "haarfactor/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace haarfactor {

DyadicInterval::DyadicInterval(int lvl, std::int64_t p) : level(lvl), pos(p) {
    if (lvl < 0 || lvl > 60) throw std::invalid_argument("dyadic level out of range");
    if (p < 0 || p >= (std::int64_t{1} << lvl)) throw std::invalid_argument("dyadic position out of range");
}

double DyadicInterval::measure() const { return std::ldexp(1.0, -level); }
double DyadicInterval::left() const { return std::ldexp(static_cast<double>(pos), -level); }
double DyadicInterval::right() const { return std::ldexp(static_cast<double>(pos + 1), -level); }

bool DyadicInterval::contains(const DyadicInterval& o) const {
    if (o.level < level) return false;
    return (o.pos >> (o.level - level)) == pos;
}

bool DyadicInterval::disjoint(const DyadicInterval& o) const {
    return !contains(o) && !o.contains(*this);
}

int haar_eval(const DyadicInterval& I, double x) {
    if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("haar_eval: x outside [0,1)");
    const double a = I.left();
    const double b = I.right();
    if (x < a || x >= b) return 0;
    return x < 0.5 * (a + b) ? 1 : -1;
}

int rect_haar_eval(const DyadicRect& R, double x, double y) {
    if (!(y >= 0.0 && y < 1.0)) throw std::domain_error("rect_haar_eval: y outside [0,1)");
    const int hx = haar_eval(R.x, x);
    return hx == 0 ? 0 : hx * haar_eval(R.y, y);
}

std::int64_t pair_encode(std::int64_t k, std::int64_t j) {
    if (k < 1 || j < 1) throw std::invalid_argument("pair_encode: indices start at 1");
    const std::int64_t s = k + j;
    return (s - 1) * (s - 2) / 2 + k;
}

std::pair<std::int64_t, std::int64_t> pair_decode(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("pair_decode: n starts at 1");
    // largest s with (s-1)(s-2)/2 < n
    auto s = static_cast<std::int64_t>(std::floor((3.0 + std::sqrt(8.0 * static_cast<double>(n) - 7.0)) / 2.0));
    while ((s - 1) * (s - 2) / 2 >= n) --s;
    while ((s) * (s - 1) / 2 < n) ++s;
    const std::int64_t k = n - (s - 1) * (s - 2) / 2;
    return {k, s - k};
}

DyadicInterval interval_from_ordinal0(std::int64_t o) {
    if (o < 0) throw std::invalid_argument("negative ordinal");
    int level = 0;
    while ((std::int64_t{2} << level) - 1 <= o) ++level;
    return {level, o - ((std::int64_t{1} << level) - 1)};
}

namespace {

std::unique_ptr<RectOrder> build_rect_order(int depth) {
    auto ro = std::make_unique<RectOrder>();
    ro->depth = depth;
    ro->n1 = dim1d(depth);
    struct Key {
        int maxl, lx;
        std::int64_t px, py, ox, oy;
    };
    std::vector<Key> keys;
    keys.reserve(static_cast<std::size_t>(ro->n1 * ro->n1));
    for (std::int64_t ox = 0; ox < ro->n1; ++ox) {
        const auto I = interval_from_ordinal0(ox);
        for (std::int64_t oy = 0; oy < ro->n1; ++oy) {
            const auto J = interval_from_ordinal0(oy);
            // position of J is its 1D ordinal, so rectangles sharing pos but not level stay ordered
            keys.push_back({std::max(I.level, J.level), I.level, I.pos, oy, ox, oy});
        }
    }
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        if (a.maxl != b.maxl) return a.maxl < b.maxl;
        if (a.lx != b.lx) return a.lx < b.lx;
        if (a.px != b.px) return a.px < b.px;
        return a.py < b.py;
    });
    ro->rect_of.reserve(keys.size());
    ro->ordinal_of.assign(keys.size(), 0);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        ro->rect_of.emplace_back(keys[i].ox, keys[i].oy);
        ro->ordinal_of[static_cast<std::size_t>(keys[i].ox * ro->n1 + keys[i].oy)] = static_cast<std::int64_t>(i);
    }
    return ro;
}

}  // namespace

const RectOrder& rect_order(int depth) {
    if (depth < 0 || depth > 10) throw std::invalid_argument("rect_order: depth out of range");
    static std::mutex mu;
    static std::map<int, std::unique_ptr<RectOrder>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[depth];
    if (!slot) slot = build_rect_order(depth);
    return *slot;
}

std::vector<HaarIndex> space_index_order(SpaceKindDim kind, int depth) {
    if (depth < 0) throw std::invalid_argument("space_index_order: negative depth");
    std::vector<HaarIndex> out;
    if (kind == SpaceKindDim::OneParam) {
        const auto n = dim1d(depth);
        out.reserve(static_cast<std::size_t>(n));
        for (std::int64_t o = 0; o < n; ++o) out.push_back({interval_from_ordinal0(o), o + 1});
        return out;
    }
    const auto& ro = rect_order(depth);
    out.reserve(ro.rect_of.size());
    for (std::size_t i = 0; i < ro.rect_of.size(); ++i) {
        const auto [ox, oy] = ro.rect_of[i];
        out.push_back({DyadicRect{interval_from_ordinal0(ox), interval_from_ordinal0(oy)},
                       static_cast<std::int64_t>(i) + 1});
    }
    return out;
}

}  // namespace haarfactor
