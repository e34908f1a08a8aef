#ifndef RIFSLAB_CYLINDERS_HPP
#define RIFSLAB_CYLINDERS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "rifslab/errors.hpp"
#include "rifslab/interval_union.hpp"
#include "rifslab/rifs.hpp"
#include "rifslab/rng.hpp"

namespace rifslab {

inline constexpr std::uint64_t kDefaultCylinderBudget = std::uint64_t(1) << 22;

/// J_i = [A_i, B_i], the image of the supporting interval under the composed
/// random maps along the word.
struct CylinderInterval {
    Word word;
    Rat left, right;

    double left_d() const { return to_double(left); }
    double right_d() const { return to_double(right); }
    Rat length() const { return right - left; }
};

namespace detail {
inline void check_budget(std::size_t L, int n, std::uint64_t budget) {
    double total = std::pow(static_cast<double>(L), n);
    if (total > static_cast<double>(budget))
        throw Error(ErrorCode::BudgetExceeded,
                    "L^n = " + std::to_string(total) + " exceeds budget " + std::to_string(budget));
}
} // namespace detail

/// All L^n level-n cylinders; translation accumulated along each path, so the
/// same realization tree replays identical geometry in any traversal order.
/// In rational mode the endpoints are exact (draws are dyadic rationals).
inline std::vector<CylinderInterval> sample_cylinders(const RIFSSpec& spec, const RealizationTree& tree,
                                                      int n, std::uint64_t budget = kDefaultCylinderBudget) {
    if (n < 0) throw Error(ErrorCode::InvalidWord, "negative level");
    const std::size_t L = spec.L();
    detail::check_budget(L, n, budget);
    auto [alpha, beta] = supporting_interval(spec);

    std::vector<CylinderInterval> out;
    out.reserve(static_cast<std::size_t>(std::pow(static_cast<double>(L), n)));

    bool exact = spec.mode == ArithmeticMode::rational;
    struct Frame { Word word; std::uint64_t state; Rat R, T; double Rd, Td; };
    std::vector<Frame> stack;
    stack.push_back({Word{}, tree.root_state(), Rat(1), Rat(0), 1.0, 0.0});
    while (!stack.empty()) {
        Frame fr = std::move(stack.back());
        stack.pop_back();
        if (static_cast<int>(fr.word.length()) == n) {
            CylinderInterval c;
            c.word = std::move(fr.word);
            Rat lo, hi;
            if (exact) {
                lo = fr.R * alpha + fr.T;
                hi = fr.R * beta + fr.T;
            } else {
                lo = rat_from_double(fr.Rd * to_double(alpha) + fr.Td);
                hi = rat_from_double(fr.Rd * to_double(beta) + fr.Td);
            }
            if (lo > hi) std::swap(lo, hi);
            c.left = std::move(lo);
            c.right = std::move(hi);
            out.push_back(std::move(c));
            continue;
        }
        // push children in reverse so the natural order pops first
        for (int i = static_cast<int>(L); i >= 1; --i) {
            double d = tree.draw_at(fr.state, i);
            Frame ch;
            ch.word = fr.word.child(i);
            ch.state = RealizationTree::child_state(fr.state, i);
            if (exact) {
                Rat D = rat_from_double(d);
                ch.R = fr.R * spec.ratios[static_cast<std::size_t>(i - 1)];
                ch.T = fr.T + fr.R * D;
            }
            double rd = to_double(spec.ratios[static_cast<std::size_t>(i - 1)]);
            ch.Rd = fr.Rd * rd;
            ch.Td = fr.Td + fr.Rd * d;
            stack.push_back(std::move(ch));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const CylinderInterval& a, const CylinderInterval& b) { return a.word < b.word; });
    return out;
}

/// One walk to depth n, collecting per-level endpoint pairs (levels 1..n).
inline std::vector<std::vector<std::pair<double, double>>>
sample_cylinder_levels(const RIFSSpec& spec, const RealizationTree& tree, int n,
                       std::uint64_t budget = kDefaultCylinderBudget) {
    if (n < 0) throw Error(ErrorCode::InvalidWord, "negative level");
    const std::size_t L = spec.L();
    detail::check_budget(L, n, budget);
    auto [alpha_r, beta_r] = supporting_interval(spec);
    double alpha = to_double(alpha_r), beta = to_double(beta_r);
    std::vector<double> ratios(L);
    for (std::size_t i = 0; i < L; ++i) ratios[i] = to_double(spec.ratios[i]);

    std::vector<std::vector<std::pair<double, double>>> levels(static_cast<std::size_t>(n));
    struct Frame { int depth; std::uint64_t state; double R, T; };
    std::vector<Frame> stack{{0, tree.root_state(), 1.0, 0.0}};
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        if (fr.depth > 0) {
            double lo = fr.R * alpha + fr.T, hi = fr.R * beta + fr.T;
            if (lo > hi) std::swap(lo, hi);
            levels[static_cast<std::size_t>(fr.depth - 1)].push_back({lo, hi});
        }
        if (fr.depth == n) continue;
        for (int i = 1; i <= static_cast<int>(L); ++i) {
            double d = tree.draw_at(fr.state, i);
            stack.push_back({fr.depth + 1, RealizationTree::child_state(fr.state, i),
                             fr.R * ratios[static_cast<std::size_t>(i - 1)], fr.T + fr.R * d});
        }
    }
    return levels;
}

struct CoverageStats {
    std::vector<double> measures;              // Leb of the union, level 1..n
    bool has_common = false;                   // an interval covered at every level
    double common_lo = 0, common_hi = 0;       // the longest such interval
};

inline IntervalUnion<double> endpoints_to_union(const std::vector<std::pair<double, double>>& ivs) {
    std::vector<Interval<double>> parts;
    parts.reserve(ivs.size());
    for (const auto& [lo, hi] : ivs) parts.push_back(Interval<double>::closed(lo, hi));
    return IntervalUnion<double>(std::move(parts));
}

inline CoverageStats coverage_statistics(const std::vector<std::vector<std::pair<double, double>>>& levels) {
    CoverageStats stats;
    IntervalUnion<double> common;
    bool first = true;
    for (const auto& level : levels) {
        auto u = endpoints_to_union(level);
        stats.measures.push_back(u.measure());
        common = first ? u : common.intersect(u);
        first = false;
    }
    for (const auto& c : common.components()) {
        if (!stats.has_common || c.length() > stats.common_hi - stats.common_lo) {
            stats.has_common = true;
            stats.common_lo = c.lo;
            stats.common_hi = c.hi;
        }
    }
    // a bare surviving deepest-level cylinder does not count as covered: the
    // common interval must exceed the finest cylinder scale
    if (stats.has_common && !levels.empty()) {
        double finest = 0;
        bool have = false;
        for (const auto& [lo, hi] : levels.back()) {
            if (!have || hi - lo < finest) finest = hi - lo;
            have = true;
        }
        if (stats.common_hi - stats.common_lo <= 1.5 * finest) stats.has_common = false;
    }
    return stats;
}

inline CoverageStats coverage_statistics(const std::vector<std::vector<CylinderInterval>>& levels) {
    std::vector<std::vector<std::pair<double, double>>> eps;
    eps.reserve(levels.size());
    for (const auto& level : levels) {
        std::vector<std::pair<double, double>> v;
        v.reserve(level.size());
        for (const auto& c : level) v.push_back({c.left_d(), c.right_d()});
        eps.push_back(std::move(v));
    }
    return coverage_statistics(eps);
}

/// Count of grid boxes of side `scale` meeting the union of the intervals.
inline std::uint64_t box_count(const std::vector<std::pair<double, double>>& cylinders, double scale) {
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    ranges.reserve(cylinders.size());
    for (const auto& [lo, hi] : cylinders)
        ranges.push_back({static_cast<std::int64_t>(std::floor(lo / scale)),
                          static_cast<std::int64_t>(std::floor(hi / scale))});
    std::sort(ranges.begin(), ranges.end());
    std::uint64_t count = 0;
    std::int64_t cur_lo = 0, cur_hi = 0;
    bool open = false;
    for (const auto& [lo, hi] : ranges) {
        if (open && lo <= cur_hi + 1) {
            cur_hi = std::max(cur_hi, hi);
        } else {
            if (open) count += static_cast<std::uint64_t>(cur_hi - cur_lo + 1);
            cur_lo = lo;
            cur_hi = hi;
            open = true;
        }
    }
    if (open) count += static_cast<std::uint64_t>(cur_hi - cur_lo + 1);
    return count;
}

/// Least-squares slope of log(box count) against log(1/scale).
inline double box_dimension_estimate(const std::vector<std::pair<double, double>>& cylinders,
                                     const std::vector<double>& scales) {
    if (scales.size() < 4) throw Error(ErrorCode::InsufficientScales, "need at least 4 scales");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double scale : scales) {
        double x = std::log(1.0 / scale);
        double y = std::log(static_cast<double>(box_count(cylinders, scale)));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double m = static_cast<double>(scales.size());
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

inline double box_dimension_estimate(const std::vector<CylinderInterval>& cylinders,
                                     const std::vector<double>& scales) {
    std::vector<std::pair<double, double>> eps;
    eps.reserve(cylinders.size());
    for (const auto& c : cylinders) eps.push_back({c.left_d(), c.right_d()});
    return box_dimension_estimate(eps, scales);
}

} // namespace rifslab

#endif
