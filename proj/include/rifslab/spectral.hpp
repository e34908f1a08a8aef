#ifndef RIFSLAB_SPECTRAL_HPP
#define RIFSLAB_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rifslab/errors.hpp"
#include "rifslab/interval_union.hpp"
#include "rifslab/rifs.hpp"
#include "rifslab/typespace.hpp"

namespace rifslab {

/// Expectation kernel m(x,y) = sum_i a * phi_i(x - t_i - a*y).
inline double kernel_value(const HomogeneousRIFS& h, double x, double y) {
    double a = to_double(h.ratio);
    double v = 0;
    for (const auto& law : h.laws) v += a * law.density(x - to_double(law.center) - a * y);
    return v;
}

/// Kernel averaged exactly over a cell [ylo, yhi] of the second argument;
/// removes the quadrature error from the density's jump discontinuities.
inline double kernel_cell_average(const HomogeneousRIFS& h, double x, double ylo, double yhi) {
    double a = to_double(h.ratio);
    double v = 0;
    for (const auto& law : h.laws) {
        double c = to_double(law.center);
        // int_{ylo}^{yhi} a phi(x - c - a y) dy, substituting u = x - c - a y
        v += law.interval_mass(x - c - a * yhi, x - c - a * ylo);
    }
    return v / (yhi - ylo);
}

struct KernelGrid {
    std::vector<double> nodes;          // composite midpoint nodes over T(eps)
    std::vector<double> weights;        // per-node quadrature weight
    std::vector<std::size_t> component; // component index of each node
    std::vector<double> values;         // m(x_i, y_j), row-major
    std::size_t n = 0;

    double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

struct SpectralResult {
    double rho = 0;
    std::vector<double> f, g;     // right/left eigenfunctions on the nodes, int f g = 1
    double harris_delta = 0;      // fitted geometric rate (0 until harris_check runs)
    int N0_pos = 0;               // primitivity index of the discrete kernel
    int iterations = 0;
    double residual = 0;
};

namespace detail {

inline void matvec(const KernelGrid& grid, const std::vector<double>& v, std::vector<double>& out) {
    const std::size_t n = grid.n;
    out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = grid.values.data() + i * n;
        double s = 0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * grid.weights[j] * v[j];
        out[i] = s;
    }
}

inline void matvec_left(const KernelGrid& grid, const std::vector<double>& v, std::vector<double>& out) {
    const std::size_t n = grid.n;
    out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = grid.values.data() + i * n;
        double c = grid.weights[i] * v[i];
        for (std::size_t j = 0; j < n; ++j) out[j] += c * row[j];
    }
}

template <class MatVec>
std::pair<double, std::vector<double>> power_iteration(std::size_t n, MatVec&& mv, int& iterations,
                                                       double& residual) {
    std::vector<double> v(n, 1.0), w;
    double rho = 0;
    const int cap = 100000;
    for (iterations = 1; iterations <= cap; ++iterations) {
        mv(v, w);
        double norm = 0;
        for (double x : w) norm = std::max(norm, std::fabs(x));
        if (norm == 0) throw Error(ErrorCode::NoConvergence, "power iteration hit the zero vector");
        double num = 0, den = 0;
        for (std::size_t i = 0; i < n; ++i) {
            num += w[i] * v[i];
            den += v[i] * v[i];
        }
        double rho_new = num / den;
        for (double& x : w) x /= norm;
        double res = 0;
        std::vector<double> w2;
        bool check = std::fabs(rho_new - rho) < 1e-12;
        rho = rho_new;
        v.swap(w);
        if (check) {
            mv(v, w2);
            for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::fabs(w2[i] - rho * v[i]));
            residual = res;
            if (res <= 1e-10 * std::max(1.0, rho)) return {rho, v};
        }
    }
    throw Error(ErrorCode::NoConvergence, "power iteration did not converge");
}

/// Rows as bit sets; boolean matrix powers for the primitivity index.
struct BitMatrix {
    std::size_t n = 0, words = 0;
    std::vector<std::uint64_t> bits;

    explicit BitMatrix(std::size_t n_) : n(n_), words((n_ + 63) / 64), bits(n_ * ((n_ + 63) / 64), 0) {}
    void set(std::size_t i, std::size_t j) { bits[i * words + j / 64] |= std::uint64_t(1) << (j % 64); }
    bool all() const {
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t* row = bits.data() + i * words;
            for (std::size_t w = 0; w < words; ++w) {
                std::uint64_t expect = (w + 1) * 64 <= n ? ~std::uint64_t(0)
                                                         : ((std::uint64_t(1) << (n % 64)) - 1);
                if ((row[w] & expect) != expect) return false;
            }
        }
        return true;
    }
    BitMatrix multiply(const BitMatrix& o) const {
        BitMatrix out(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t* row = bits.data() + i * words;
            std::uint64_t* orow = out.bits.data() + i * words;
            for (std::size_t k = 0; k < n; ++k) {
                if (row[k / 64] & (std::uint64_t(1) << (k % 64))) {
                    const std::uint64_t* brow = o.bits.data() + k * words;
                    for (std::size_t w = 0; w < words; ++w) orow[w] |= brow[w];
                }
            }
        }
        return out;
    }
};

} // namespace detail

inline std::pair<KernelGrid, SpectralResult> build_operator(const HomogeneousRIFS& h,
                                                            const TypeSpaceT<double>& ts,
                                                            std::size_t points_per_component,
                                                            int primitivity_cap = 64) {
    if (points_per_component < 8)
        throw Error(ErrorCode::InvalidParameters, "need at least 8 points per component");
    KernelGrid grid;
    for (std::size_t c = 0; c < ts.T_eps.size(); ++c) {
        const auto& comp = ts.T_eps.components()[c];
        double hstep = comp.length() / static_cast<double>(points_per_component);
        for (std::size_t j = 0; j < points_per_component; ++j) {
            grid.nodes.push_back(comp.lo + (static_cast<double>(j) + 0.5) * hstep);
            grid.weights.push_back(hstep);
            grid.component.push_back(c);
        }
    }
    grid.n = grid.nodes.size();
    grid.values.resize(grid.n * grid.n);
    for (std::size_t i = 0; i < grid.n; ++i)
        for (std::size_t j = 0; j < grid.n; ++j)
            grid.values[i * grid.n + j] =
                kernel_cell_average(h, grid.nodes[i], grid.nodes[j] - 0.5 * grid.weights[j],
                                    grid.nodes[j] + 0.5 * grid.weights[j]);

    SpectralResult res;
    auto [rho, f] = detail::power_iteration(
        grid.n, [&](const std::vector<double>& v, std::vector<double>& out) { detail::matvec(grid, v, out); },
        res.iterations, res.residual);
    int it2 = 0;
    double res2 = 0;
    auto [rho_g, g] = detail::power_iteration(
        grid.n,
        [&](const std::vector<double>& v, std::vector<double>& out) { detail::matvec_left(grid, v, out); },
        it2, res2);
    (void)rho_g;
    res.rho = rho;
    // normalize: max f = scale-free choice f_max = 1, then int f g = 1
    double fmax = 0;
    for (double x : f) fmax = std::max(fmax, x);
    for (double& x : f) x /= fmax;
    double inner = 0;
    for (std::size_t i = 0; i < grid.n; ++i) inner += grid.weights[i] * f[i] * g[i];
    if (inner <= 0) throw Error(ErrorCode::NoConvergence, "degenerate eigenfunction pairing");
    for (double& x : g) x /= inner;
    res.f = std::move(f);
    res.g = std::move(g);

    detail::BitMatrix adj(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i)
        for (std::size_t j = 0; j < grid.n; ++j)
            if (grid.values[i * grid.n + j] > 0) adj.set(i, j);
    detail::BitMatrix power = adj;
    res.N0_pos = 1;
    while (!power.all()) {
        if (++res.N0_pos > primitivity_cap)
            throw Error(ErrorCode::NotPrimitive, "discrete kernel has no positive power within cap");
        power = power.multiply(adj);
    }
    return {std::move(grid), std::move(res)};
}

struct HarrisDiagnostics {
    std::vector<double> errors;  // error_n for n = 1..n_max
    double delta = 0;            // least-squares geometric rate over the tail
};

inline HarrisDiagnostics harris_check(const KernelGrid& grid, SpectralResult& spectral, int n_max) {
    const std::size_t n = grid.n;
    HarrisDiagnostics diag;
    std::vector<double> Mn = grid.values;  // m_1
    double rho_pow = spectral.rho;
    for (int step = 1; step <= n_max; ++step) {
        double err = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double target = spectral.f[i] * spectral.g[j];
                if (target <= 0) continue;
                err = std::max(err, std::fabs(Mn[i * n + j] / rho_pow - target) / target);
            }
        diag.errors.push_back(err);
        if (step == n_max) break;
        // M_{n+1} = M_n * W * M_1
        std::vector<double> next(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                double c = Mn[i * n + k] * grid.weights[k];
                if (c == 0) continue;
                const double* row = grid.values.data() + k * n;
                double* orow = next.data() + i * n;
                for (std::size_t j = 0; j < n; ++j) orow[j] += c * row[j];
            }
        Mn.swap(next);
        rho_pow *= spectral.rho;
    }
    // fit log err_n = log C + n log delta over the second half
    std::size_t start = diag.errors.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (std::size_t i = start; i < diag.errors.size(); ++i) {
        if (diag.errors[i] <= 0) continue;
        double x = static_cast<double>(i + 1), y = std::log(diag.errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++cnt;
    }
    if (cnt >= 2) {
        double m = static_cast<double>(cnt);
        diag.delta = std::exp((m * sxy - sx * sy) / (m * sxx - sx * sx));
    }
    spectral.harris_delta = diag.delta;
    return diag;
}

struct GrowthConstants {
    double U = 0;       // sup of the kernel
    double C_star = 0;  // rho * (min f)^2 / max f
    double C_0 = 0;     // C_star / (2 max f)
    double eta = 0;
    IntervalUnion<double> W;  // T(eps + eta)
    int r = 0;          // smallest n with min_x E[Z_n(x, W)] > 6L
};

inline GrowthConstants growth_constants(const HomogeneousRIFS& h, const KernelGrid& grid,
                                        const SpectralResult& spectral, const TypeSpaceT<double>& ts,
                                        double eps_main, int r_cap = 512) {
    if (spectral.rho <= 1)
        throw Error(ErrorCode::NotSupercritical, "subcritical operator: rho <= 1");
    GrowthConstants gc;
    double a = to_double(h.ratio);
    for (const auto& law : h.laws) gc.U = std::max(gc.U, a * law.sup_density());
    double fmin = spectral.f[0], fmax = spectral.f[0];
    for (double x : spectral.f) {
        fmin = std::min(fmin, x);
        fmax = std::max(fmax, x);
    }
    gc.C_star = spectral.rho * fmin * fmin / fmax;
    gc.C_0 = gc.C_star / (2.0 * fmax);

    double head = eps_main - ts.eps;
    if (head <= 0) throw Error(ErrorCode::NoEta, "no room above eps for the collar");
    bool found = false;
    std::size_t tau = ts.T_eps.size();
    for (int j = 1; j <= 60 && !found; ++j) {
        double eta = head * std::pow(0.5, j);
        double leb_gap = 2.0 * eta * static_cast<double>(tau);
        if (leb_gap * gc.U * fmax < gc.C_star / 2.0) {
            gc.eta = eta;
            found = true;
        }
    }
    if (!found) throw Error(ErrorCode::NoEta, "no eta in the geometric grid satisfies the bound");
    std::vector<Interval<double>> wparts;
    for (const auto& c : ts.T_eps.components())
        wparts.push_back(Interval<double>::closed(c.lo + gc.eta, c.hi - gc.eta));
    gc.W = IntervalUnion<double>(std::move(wparts));

    // iterate u <- (M W) u from the indicator of W; u_i = E[Z_n(x_i, W)].
    // The eigenfunction vanishes toward the endpoints, so the worst starting
    // type can need many generations: r grows like log(1/min f)/log(rho).
    const std::size_t n = grid.n;
    std::vector<double> u(n), next;
    for (std::size_t j = 0; j < n; ++j) u[j] = gc.W.contains(grid.nodes[j]) ? 1.0 : 0.0;
    double threshold = 6.0 * static_cast<double>(h.L());
    for (int step = 1; step <= r_cap; ++step) {
        detail::matvec(grid, u, next);
        u.swap(next);
        double umin = u[0];
        for (double x : u) umin = std::min(umin, x);
        if (umin > threshold) {
            gc.r = step;
            return gc;
        }
    }
    throw Error(ErrorCode::NoR, "expected counts never exceeded 6L within cap");
}

} // namespace rifslab

#endif
