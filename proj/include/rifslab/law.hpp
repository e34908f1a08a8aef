#ifndef RIFSLAB_LAW_HPP
#define RIFSLAB_LAW_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "rifslab/errors.hpp"
#include "rifslab/rational.hpp"

namespace rifslab {

enum class LawShape { uniform, triangular, sampled };

/// Density tabulated at uniformly spaced nodes over [lo, hi], endpoints included.
struct GridDensity {
    double lo = 0, hi = 0;
    std::vector<double> values;

    double spacing() const { return (hi - lo) / static_cast<double>(values.size() - 1); }

    double at(double x) const {
        if (x <= lo || x >= hi || values.size() < 2) {
            // closed endpoints keep their tabulated value
            if (x == lo) return values.front();
            if (x == hi) return values.back();
            return 0.0;
        }
        double h = spacing();
        double t = (x - lo) / h;
        auto i = static_cast<std::size_t>(t);
        if (i >= values.size() - 1) i = values.size() - 2;
        double f = t - static_cast<double>(i);
        return values[i] * (1.0 - f) + values[i + 1] * f;
    }

    double trapezoid_integral() const {
        if (values.size() < 2) return 0.0;
        double s = 0.5 * (values.front() + values.back());
        for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
        return s * spacing();
    }

    void renormalize() {
        double z = trapezoid_integral();
        if (z > 0)
            for (auto& v : values) v /= z;
    }
};

/// Additive perturbation D = t + Y with centered density supported on (-theta, theta).
struct PerturbationLaw {
    Rat center;      // t_i
    Rat half_width;  // theta_i > 0
    LawShape shape = LawShape::uniform;
    std::vector<std::pair<double, double>> grid;  // sampled: (offset, density), offsets ascending

    double theta() const { return to_double(half_width); }

    /// Centered density evaluated at offset y.
    double density(double y) const {
        double th = theta();
        switch (shape) {
            case LawShape::uniform:
                return (y > -th && y < th) ? 0.5 / th : 0.0;
            case LawShape::triangular:
                return (y > -th && y < th) ? (th - std::fabs(y)) / (th * th) : 0.0;
            case LawShape::sampled: {
                if (grid.size() < 2 || y <= grid.front().first || y >= grid.back().first) return 0.0;
                auto it = std::upper_bound(grid.begin(), grid.end(), y,
                                           [](double v, const std::pair<double, double>& p) { return v < p.first; });
                auto hi = it;
                auto lo = it - 1;
                double f = (y - lo->first) / (hi->first - lo->first);
                return lo->second * (1.0 - f) + hi->second * f;
            }
        }
        return 0.0;
    }

    double sup_density() const {
        double th = theta();
        switch (shape) {
            case LawShape::uniform: return 0.5 / th;
            case LawShape::triangular: return 1.0 / th;
            case LawShape::sampled: {
                double m = 0;
                for (const auto& [o, d] : grid) m = std::max(m, d);
                return m;
            }
        }
        return 0.0;
    }

    /// Inverse-CDF sample; u in (0,1) maps into the open support.
    double sample(double u) const {
        double th = theta();
        switch (shape) {
            case LawShape::uniform:
                return -th + 2.0 * th * u;
            case LawShape::triangular:
                return u < 0.5 ? th * (std::sqrt(2.0 * u) - 1.0) : th * (1.0 - std::sqrt(2.0 * (1.0 - u)));
            case LawShape::sampled:
                return sample_from_grid(u);
        }
        return 0.0;
    }

    /// Exact mass of the centered density over [lo, hi].
    double interval_mass(double lo, double hi) const {
        if (hi <= lo) return 0.0;
        return cdf(hi) - cdf(lo);
    }

    /// Centered CDF.
    double cdf(double y) const {
        double th = theta();
        switch (shape) {
            case LawShape::uniform:
                return std::clamp((y + th) / (2.0 * th), 0.0, 1.0);
            case LawShape::triangular: {
                if (y <= -th) return 0.0;
                if (y >= th) return 1.0;
                if (y <= 0) return (y + th) * (y + th) / (2.0 * th * th);
                return 1.0 - (th - y) * (th - y) / (2.0 * th * th);
            }
            case LawShape::sampled: {
                if (grid.size() < 2 || y <= grid.front().first) return 0.0;
                double s = 0;
                for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
                    double x0 = grid[i].first, x1 = grid[i + 1].first;
                    if (y >= x1) {
                        s += 0.5 * (grid[i].second + grid[i + 1].second) * (x1 - x0);
                    } else {
                        double f = (y - x0) / (x1 - x0);
                        double dy = grid[i].second * (1.0 - f) + grid[i + 1].second * f;
                        s += 0.5 * (grid[i].second + dy) * (y - x0);
                        break;
                    }
                }
                return s;
            }
        }
        return 0.0;
    }

    double density_integral() const {
        switch (shape) {
            case LawShape::uniform:
            case LawShape::triangular:
                return 1.0;
            case LawShape::sampled: {
                double s = 0;
                for (std::size_t i = 0; i + 1 < grid.size(); ++i)
                    s += 0.5 * (grid[i].second + grid[i + 1].second) * (grid[i + 1].first - grid[i].first);
                return s;
            }
        }
        return 0.0;
    }

private:
    double sample_from_grid(double u) const {
        // piecewise-linear density => piecewise-quadratic CDF, invert per segment
        std::vector<double> cdf(grid.size(), 0.0);
        for (std::size_t i = 1; i < grid.size(); ++i)
            cdf[i] = cdf[i - 1] +
                     0.5 * (grid[i - 1].second + grid[i].second) * (grid[i].first - grid[i - 1].first);
        double total = cdf.back();
        double target = u * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        std::size_t i = it == cdf.begin() ? 1 : static_cast<std::size_t>(it - cdf.begin());
        if (i >= grid.size()) i = grid.size() - 1;
        double c0 = cdf[i - 1];
        double x0 = grid[i - 1].first, x1 = grid[i].first;
        double d0 = grid[i - 1].second, d1 = grid[i].second;
        double h = x1 - x0, rem = target - c0;
        double slope = (d1 - d0) / h;
        double t;
        if (std::fabs(slope) < 1e-300) {
            t = d0 > 0 ? rem / d0 : 0.0;
        } else {
            // solve d0*t + slope*t^2/2 = rem
            double disc = d0 * d0 + 2.0 * slope * rem;
            t = disc <= 0 ? 0.0 : (-d0 + std::sqrt(disc)) / slope;
        }
        return std::min(x1, std::max(x0, x0 + t));
    }
};

inline PerturbationLaw make_uniform_law(Rat center, Rat half_width) {
    return PerturbationLaw{std::move(center), std::move(half_width), LawShape::uniform, {}};
}
inline PerturbationLaw make_triangular_law(Rat center, Rat half_width) {
    return PerturbationLaw{std::move(center), std::move(half_width), LawShape::triangular, {}};
}

inline GridDensity law_to_grid(const PerturbationLaw& law, std::size_t n_points) {
    GridDensity g;
    double th = law.theta();
    g.lo = -th;
    g.hi = th;
    g.values.resize(n_points);
    double h = (g.hi - g.lo) / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) g.values[i] = law.density(g.lo + h * static_cast<double>(i));
    g.values.front() = 0.0;
    g.values.back() = 0.0;
    if (law.shape == LawShape::uniform) {
        // jump density: endpoint nodes sit on the jump; keep interior level exact
        for (std::size_t i = 1; i + 1 < n_points; ++i) g.values[i] = 0.5 / th;
    }
    g.renormalize();
    return g;
}

/// Convolution with a centered box of half-width w (density of a uniform term),
/// via the cumulative of f: (f * box)(x) = (F(x+w) - F(x-w)) / (2w).
inline GridDensity convolve_box(const GridDensity& f, double w, std::size_t n_out) {
    GridDensity out;
    out.lo = f.lo - w;
    out.hi = f.hi + w;
    out.values.resize(n_out);
    std::size_t n = f.values.size();
    double h = f.spacing();
    std::vector<double> cum(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        cum[i] = cum[i - 1] + 0.5 * (f.values[i - 1] + f.values[i]) * h;
    auto F = [&](double x) -> double {
        if (x <= f.lo) return 0.0;
        if (x >= f.hi) return cum.back();
        double t = (x - f.lo) / h;
        auto i = static_cast<std::size_t>(t);
        if (i >= n - 1) i = n - 2;
        double dt = (t - static_cast<double>(i)) * h;
        double d0 = f.values[i], d1 = f.values[i + 1];
        return cum[i] + d0 * dt + 0.5 * (d1 - d0) / h * dt * dt;
    };
    double ho = (out.hi - out.lo) / static_cast<double>(n_out - 1);
    for (std::size_t i = 0; i < n_out; ++i) {
        double x = out.lo + ho * static_cast<double>(i);
        out.values[i] = (F(x + w) - F(x - w)) / (2.0 * w);
    }
    out.values.front() = 0.0;
    out.values.back() = 0.0;
    out.renormalize();
    return out;
}

/// Direct quadrature convolution of two tabulated densities.
inline GridDensity convolve_grids(const GridDensity& f, const GridDensity& g, std::size_t n_out) {
    GridDensity out;
    out.lo = f.lo + g.lo;
    out.hi = f.hi + g.hi;
    out.values.assign(n_out, 0.0);
    double ho = (out.hi - out.lo) / static_cast<double>(n_out - 1);
    std::size_t n = g.values.size();
    double h = g.spacing();
    for (std::size_t i = 0; i < n_out; ++i) {
        double x = out.lo + ho * static_cast<double>(i);
        double s = 0;
        for (std::size_t j = 0; j < n; ++j) {
            double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
            double t = g.lo + h * static_cast<double>(j);
            s += wj * g.values[j] * f.at(x - t);
        }
        out.values[i] = s * h;
    }
    out.values.front() = 0.0;
    out.values.back() = 0.0;
    out.renormalize();
    return out;
}

/// Law of c*Y for the centered part (center handled by the caller); c may be negative.
inline PerturbationLaw scale_centered_law(const PerturbationLaw& law, const Rat& c) {
    PerturbationLaw out;
    out.center = Rat(0);
    out.half_width = law.half_width * boost::multiprecision::abs(c);
    out.shape = law.shape;
    if (law.shape == LawShape::sampled) {
        double cd = to_double(c);
        out.grid.reserve(law.grid.size());
        for (const auto& [o, d] : law.grid) out.grid.push_back({o * cd, d / std::fabs(cd)});
        if (cd < 0) std::reverse(out.grid.begin(), out.grid.end());
    }
    return out;
}

/// Density of  sum_j coeff_j * (t_j + Y_j): exact center/half-width, gridded shape.
/// Single-term combinations keep their closed-form shape.
inline PerturbationLaw combine_laws(const std::vector<std::pair<const PerturbationLaw*, Rat>>& terms,
                                    std::size_t grid_points) {
    if (terms.empty()) throw Error(ErrorCode::InvalidWord, "combine_laws: empty term list");
    Rat center(0), half_width(0);
    for (const auto& [law, c] : terms) {
        center += c * law->center;
        half_width += boost::multiprecision::abs(c) * law->half_width;
    }
    if (terms.size() == 1) {
        PerturbationLaw out = scale_centered_law(*terms[0].first, terms[0].second);
        out.center = center;
        return out;
    }
    // fold scaled densities; uniform factors via the O(n) box pass
    GridDensity acc;
    bool have = false;
    std::vector<double> pending_boxes;
    for (const auto& [law, c] : terms) {
        double w = to_double(boost::multiprecision::abs(c) * law->half_width);
        if (law->shape == LawShape::uniform) {
            pending_boxes.push_back(w);
            continue;
        }
        GridDensity g = law_to_grid(scale_centered_law(*law, c), grid_points);
        acc = have ? convolve_grids(acc, g, grid_points) : g;
        have = true;
    }
    if (!have) {
        // all-uniform: seed with the widest box so the first convolution is smooth
        std::sort(pending_boxes.begin(), pending_boxes.end(), std::greater<>());
        double w0 = pending_boxes.front();
        pending_boxes.erase(pending_boxes.begin());
        acc.lo = -w0;
        acc.hi = w0;
        acc.values.assign(grid_points, 0.5 / w0);
        acc.values.front() = 0.0;
        acc.values.back() = 0.0;
        acc.renormalize();
        have = true;
    }
    for (double w : pending_boxes) acc = convolve_box(acc, w, grid_points);

    PerturbationLaw out;
    out.center = center;
    out.half_width = half_width;
    out.shape = LawShape::sampled;
    // pin endpoints to the exact +-theta
    double th = to_double(half_width);
    double h = 2.0 * th / static_cast<double>(grid_points - 1);
    out.grid.resize(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        double x = -th + h * static_cast<double>(i);
        out.grid[i] = {x, acc.at(x)};
    }
    out.grid.front() = {-th, 0.0};
    out.grid.back() = {th, 0.0};
    // renormalize on the final grid
    double z = out.density_integral();
    if (z > 0)
        for (auto& [o, d] : out.grid) d /= z;
    return out;
}

/// Law of Y_i - Y_j (independent); triangular closed form for equal-width uniforms.
inline PerturbationLaw difference_law(const PerturbationLaw& a, const PerturbationLaw& b,
                                      std::size_t grid_points) {
    if (a.shape == LawShape::uniform && b.shape == LawShape::uniform && a.half_width == b.half_width) {
        PerturbationLaw out = make_triangular_law(a.center - b.center, a.half_width + b.half_width);
        return out;
    }
    return combine_laws({{&a, Rat(1)}, {&b, Rat(-1)}}, grid_points);
}

} // namespace rifslab

#endif
