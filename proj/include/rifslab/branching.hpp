#ifndef RIFSLAB_BRANCHING_HPP
#define RIFSLAB_BRANCHING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rifslab/cylinders.hpp"
#include "rifslab/errors.hpp"
#include "rifslab/interval_union.hpp"
#include "rifslab/rifs.hpp"
#include "rifslab/rng.hpp"
#include "rifslab/spectral.hpp"
#include "rifslab/typespace.hpp"

namespace rifslab {

struct BranchingRun {
    double x = 0;
    int n = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> Z;  // Z_k(x, T(eps)) for k = 0..n-1, then Z_n(x, A)
    std::uint64_t absorbed = 0;    // lineages that left the type space
};

/// Walks the L-ary tree: child i of a node of type z has type (z - D_i)/a,
/// absorbed (pruned) when it leaves the type space. Draws come from the same
/// keyed tree as cylinder sampling, so both are views of one realization.
inline BranchingRun simulate_Z(const HomogeneousRIFS& h, const TypeSpaceT<double>& ts, double x, int n,
                               const IntervalUnion<double>& A, const RealizationTree& tree,
                               std::uint64_t budget = kDefaultCylinderBudget) {
    if (n < 0) throw Error(ErrorCode::InvalidWord, "negative depth");
    detail::check_budget(h.L(), n, budget);
    if (!ts.T_eps.contains(x)) throw Error(ErrorCode::NotInTypeSpace, "start type outside type space");

    BranchingRun run;
    run.x = x;
    run.n = n;
    run.seed = tree.master_seed();
    run.Z.assign(static_cast<std::size_t>(n) + 1, 0);

    double a = to_double(h.ratio);
    const int L = static_cast<int>(h.L());
    struct Frame { int depth; std::uint64_t state; double type; };
    std::vector<Frame> stack{{0, tree.root_state(), x}};
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        if (fr.depth == n) {
            if (A.contains(fr.type)) ++run.Z[static_cast<std::size_t>(n)];
            continue;
        }
        ++run.Z[static_cast<std::size_t>(fr.depth)];
        // Z_k counts survivors in T(eps); the count was attributed on entry, so
        // the root contributes Z_0 = 1
        for (int i = 1; i <= L; ++i) {
            double child = (fr.type - tree.draw_at(fr.state, i)) / a;
            if (!ts.T_eps.contains(child)) {
                ++run.absorbed;
                continue;
            }
            stack.push_back({fr.depth + 1, RealizationTree::child_state(fr.state, i), child});
        }
    }
    if (n == 0) run.Z[0] = A.contains(x) ? 1 : 0;
    return run;
}

struct GrowthEstimate {
    double rho_hat = 0;
    double ci_lo = 0, ci_hi = 0;
    bool degenerate = false;  // too little data for a meaningful fit
    std::vector<double> mean_Z;  // empirical E[Z_k(x, T)], k = 0..n_max
};

namespace detail {
inline double slope_of_log(const std::vector<double>& means) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (std::size_t k = 1; k < means.size(); ++k) {
        if (means[k] <= 0) break;
        double xk = static_cast<double>(k), yk = std::log(means[k]);
        sx += xk;
        sy += yk;
        sxx += xk * xk;
        sxy += xk * yk;
        ++cnt;
    }
    if (cnt < 2) return 0;
    double m = static_cast<double>(cnt);
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}
} // namespace detail

inline GrowthEstimate estimate_growth(const HomogeneousRIFS& h, const TypeSpaceT<double>& ts, double x,
                                      int n_max, int trials, std::uint64_t seed,
                                      std::uint64_t budget = kDefaultCylinderBudget) {
    GrowthEstimate est;
    if (trials < 2 || n_max < 2) est.degenerate = true;
    std::vector<std::vector<double>> per_trial(static_cast<std::size_t>(std::max(trials, 1)));
    IntervalUnion<double> all = ts.T_eps;
    for (int t = 0; t < std::max(trials, 1); ++t) {
        RealizationTree tree(detail::splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (t + 1))), h.laws);
        BranchingRun run = simulate_Z(h, ts, x, n_max, all, tree, budget);
        auto& v = per_trial[static_cast<std::size_t>(t)];
        v.assign(run.Z.begin(), run.Z.end());
    }
    est.mean_Z.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (const auto& v : per_trial)
        for (std::size_t k = 0; k < v.size(); ++k) est.mean_Z[k] += v[k];
    for (double& m : est.mean_Z) m /= static_cast<double>(per_trial.size());
    est.rho_hat = std::exp(detail::slope_of_log(est.mean_Z));
    if (est.degenerate) return est;

    // bootstrap over trials
    const int B = 200;
    std::vector<double> boots;
    std::uint64_t bs = detail::splitmix64(seed ^ 0xa0761d6478bd642fULL);
    for (int b = 0; b < B; ++b) {
        std::vector<double> means(static_cast<std::size_t>(n_max) + 1, 0.0);
        for (std::size_t t = 0; t < per_trial.size(); ++t) {
            bs = detail::splitmix64(bs);
            std::size_t pick = static_cast<std::size_t>(bs % per_trial.size());
            for (std::size_t k = 0; k < means.size(); ++k) means[k] += per_trial[pick][k];
        }
        for (double& m : means) m /= static_cast<double>(per_trial.size());
        boots.push_back(std::exp(detail::slope_of_log(means)));
    }
    std::sort(boots.begin(), boots.end());
    est.ci_lo = boots[static_cast<std::size_t>(0.025 * B)];
    est.ci_hi = boots[static_cast<std::size_t>(0.975 * B) - 1];
    return est;
}

struct Certificate {
    int n = 0;          // the depth the bound is issued at (= n_2)
    int r = 0;
    double tau = 0;     // exp(-32 / L^{2r})
    double N_of_n = 0;  // Leb(W)/(2(beta-alpha)) * (L a)^n
    int n_1 = 0;
    int n_2 = 0;
    double ell_1 = 0;   // smallest component of W
    double c_1 = 0;     // smallest component of T(0)
    double L_tilde = 0; // ceil(6 |I| / (ell_1 a^n))
    std::vector<double> a_k;  // until terms drop below 1e-300
    double xi_bound = 0;      // 1 - 2 sum a_k
};

/// a_k(n) = L^{n + k r} * tau^{2^{k-1} N}, evaluated in log space.
inline double certificate_a_k(double L, int n, int r, double tau, double N, int k) {
    double log_ak = (n + static_cast<double>(k) * r) * std::log(L) +
                    std::ldexp(1.0, k - 1) * N * std::log(tau);
    return std::exp(log_ak);
}

/// The explicit constants whose finiteness gives
/// P(attractor contains an interval) > 1 - xi.
inline Certificate assemble_certificate(const HomogeneousRIFS& h, const TypeSpaceT<double>& ts,
                                        const GrowthConstants& gc, double c_1, double xi,
                                        int n_cap = 100000) {
    const double L = static_cast<double>(h.L());
    const double a = to_double(h.ratio);
    if (L * a <= 1)
        throw Error(ErrorCode::NotSupercritical, "L*a <= 1: the cylinder count cannot outgrow the scale");
    if (xi <= 0 || xi >= 1) throw Error(ErrorCode::InvalidParameters, "xi must be in (0,1)");

    Certificate cert;
    cert.r = gc.r;
    double log_tau = -32.0 * std::pow(L, -2.0 * gc.r);
    cert.tau = std::exp(log_tau);
    double lebW = gc.W.measure();
    auto [alpha, beta] = supporting_interval(h);
    double I_len = to_double(beta - alpha);
    cert.ell_1 = 0;
    for (const auto& c : gc.W.components())
        if (cert.ell_1 == 0 || c.length() < cert.ell_1) cert.ell_1 = c.length();
    cert.c_1 = c_1;
    cert.n_1 = std::max(1, static_cast<int>(std::ceil(std::log(c_1 / lebW) / std::log(a))));

    const double logL = std::log(L);
    const double logLa = std::log(L * a);
    for (int n = std::max(cert.n_1, 1); n <= n_cap; ++n) {
        double N_n = lebW / (2.0 * I_len) * std::exp(n * logLa);
        if (cert.ell_1 / gc.eta > std::exp(n * logLa)) continue;
        // a_k(n) = L^{n + k r} tau^{2^{k-1} N(n)}, all in log space
        std::vector<double> aks;
        double sum = 0;
        bool ok = true, monotone = true;
        double pow2 = 1.0;  // 2^{k-1} for k starting at... k = 0 uses 2^{-1}
        pow2 = 0.5;
        double prev = 2.0;
        for (int k = 0; k < 10000; ++k) {
            double log_ak = (n + static_cast<double>(k) * gc.r) * logL + pow2 * N_n * log_tau;
            double ak = std::exp(log_ak);
            if (ak >= 0.5) {
                ok = false;
                break;
            }
            if (k > 0 && ak >= prev) monotone = false;
            prev = ak;
            aks.push_back(ak);
            sum += ak;
            if (log_ak < std::log(1e-300)) break;
            pow2 *= 2.0;
            if (!std::isfinite(pow2 * N_n * log_tau)) break;
        }
        if (!ok || !monotone || sum >= xi / 2.0) continue;
        cert.n = cert.n_2 = n;
        cert.N_of_n = N_n;
        cert.a_k = std::move(aks);
        cert.xi_bound = 1.0 - 2.0 * sum;
        cert.L_tilde = std::ceil(6.0 * I_len / (cert.ell_1 * std::pow(a, n)));
        return cert;
    }
    throw Error(ErrorCode::NoConvergence, "no depth satisfied the certificate constraints within cap");
}

} // namespace rifslab

#endif
