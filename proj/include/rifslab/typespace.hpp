#ifndef RIFSLAB_TYPESPACE_HPP
#define RIFSLAB_TYPESPACE_HPP

#include <algorithm>
#include <cstddef>
#include <tuple>
#include <vector>

#include "rifslab/errors.hpp"
#include "rifslab/interval_union.hpp"
#include "rifslab/rifs.hpp"

namespace rifslab {

/// Per-letter offset strips (t_i - theta_i, t_i + theta_i), their merged
/// components, and the invariant interval of the offset dynamics.
template <class T>
struct StripSystem {
    T a{};
    std::vector<std::pair<T, T>> raw;     // per letter, sorted by lower end
    std::vector<std::pair<T, T>> merged;  // disjoint components (lo_k, hi_k)
    T w{};                                // minimal merged width
    T theta_min{};
    T alpha_tilde{}, beta_tilde{};        // fixed interval of the offset map
    T tol{};                              // endpoint-equality tolerance (0 in exact mode)

    std::size_t M() const { return merged.size(); }
};

template <class T>
StripSystem<T> build_strips(const HomogeneousRIFS& h) {
    if (h.L() < 2) throw Error(ErrorCode::Validation, "build_strips: L >= 2 required");
    if (h.ratio <= 0 || h.ratio >= 1) throw Error(ErrorCode::Validation, "ratio must be in (0,1)");
    StripSystem<T> s;
    s.a = scalar_policy<T>::from_rat(h.ratio);
    for (std::size_t i = 0; i < h.L(); ++i) {
        if (h.laws[i].half_width <= 0) throw Error(ErrorCode::Validation, "degenerate strip");
        T lo = scalar_policy<T>::from_rat(h.laws[i].center - h.laws[i].half_width);
        T hi = scalar_policy<T>::from_rat(h.laws[i].center + h.laws[i].half_width);
        s.raw.push_back({lo, hi});
        T th = scalar_policy<T>::from_rat(h.laws[i].half_width);
        if (i == 0 || th < s.theta_min) s.theta_min = th;
    }
    std::sort(s.raw.begin(), s.raw.end());
    for (const auto& [lo, hi] : s.raw) {
        if (!s.merged.empty() && lo <= s.merged.back().second)
            s.merged.back().second = std::max(s.merged.back().second, hi);
        else
            s.merged.push_back({lo, hi});
    }
    for (std::size_t k = 0; k < s.merged.size(); ++k) {
        T width = s.merged[k].second - s.merged[k].first;
        if (k == 0 || width < s.w) s.w = width;
    }
    s.alpha_tilde = s.merged.front().first / (T(1) - s.a);
    s.beta_tilde = s.merged.back().second / (T(1) - s.a);
    s.tol = scalar_policy<T>::zero_tol(s.beta_tilde - s.alpha_tilde);
    return s;
}

/// Psi(H) = union over letters i of (a*H + t_i - theta_i, a*H + t_i + theta_i).
template <class T>
IntervalUnion<T> psi(const StripSystem<T>& s, const IntervalUnion<T>& H) {
    for (const auto& c : H.components())
        if (c.lo < s.alpha_tilde - s.tol || c.hi > s.beta_tilde + s.tol)
            throw Error(ErrorCode::OutOfDomain, "psi: argument leaves the invariant interval");
    std::vector<Interval<T>> parts;
    parts.reserve(H.size() * s.raw.size());
    for (const auto& c : H.components())
        for (const auto& [lo, hi] : s.raw)
            parts.push_back(Interval<T>::open(s.a * c.lo + lo, s.a * c.hi + hi));
    return IntervalUnion<T>(std::move(parts), s.tol);
}

template <class T>
struct PretypeResult {
    IntervalUnion<T> T0;
    int N0 = 0;
    std::vector<IntervalUnion<T>> history;           // V_0 .. V_{N0}
    std::vector<std::vector<Interval<T>>> red;       // level m -> closures of V_{m-1} \ V_m
    int analytic_bound = 0;
};

/// Iterations of g(x) = a*x - theta_min staying nonnegative, starting from the
/// invariant-interval length: an a-priori cap on the stabilization depth.
template <class T>
int pretype_depth_bound(const StripSystem<T>& s) {
    double a = to_double(s.a), th = to_double(s.theta_min);
    double x = to_double(s.beta_tilde - s.alpha_tilde);
    int m = 0;
    while (a * x - th >= 0 && m < 10000) {
        x = a * x - th;
        ++m;
    }
    return m;
}

template <class T>
PretypeResult<T> build_pretype(const StripSystem<T>& s) {
    PretypeResult<T> res;
    res.analytic_bound = pretype_depth_bound(s);
    IntervalUnion<T> V(Interval<T>::open(s.alpha_tilde, s.beta_tilde));
    res.history.push_back(V);
    for (int m = 0; m <= res.analytic_bound + 1; ++m) {
        IntervalUnion<T> next = psi(s, V);
        if (next.equals_closure(V, s.tol)) {
            res.N0 = m;
            res.T0 = V;
            return res;
        }
        std::vector<Interval<T>> red;
        IntervalUnion<T> removed = V.subtract(next);
        for (const auto& c : removed.components())
            red.push_back(Interval<T>::closed(c.lo, c.hi));
        res.red.push_back(std::move(red));
        V = next;
        res.history.push_back(V);
    }
    throw Error(ErrorCode::BoundExceeded, "pretype iteration passed the analytic depth bound");
}

template <class T>
struct EpsilonMain {
    T eps_main{};
    T w{}, d_hat{}, min_component{};       // the three geometric min-terms
    bool has_eps_tilde = false;            // spectral certification slot
    T eps_tilde{};
    std::vector<std::tuple<std::size_t, std::size_t, T, T>> projections;  // (i, k, a_{i,k}, b_{i,k})
};

template <class T>
EpsilonMain<T> epsilon_main(const StripSystem<T>& s, const PretypeResult<T>& pre) {
    EpsilonMain<T> res;
    res.w = s.w;
    const auto& comps = pre.T0.components();
    std::vector<T> endpoints;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        T len = comps[i].length();
        if (i == 0 || len < res.min_component) res.min_component = len;
        for (std::size_t k = 0; k < s.merged.size(); ++k) {
            T a_ik = s.a * comps[i].lo + s.merged[k].first;
            T b_ik = s.a * comps[i].hi + s.merged[k].second;
            res.projections.push_back({i, k, a_ik, b_ik});
            endpoints.push_back(a_ik);
            endpoints.push_back(b_ik);
        }
    }
    std::sort(endpoints.begin(), endpoints.end());
    bool have_gap = false;
    for (std::size_t j = 0; j + 1 < endpoints.size(); ++j) {
        T gap = endpoints[j + 1] - endpoints[j];
        if (gap > s.tol && (!have_gap || gap < res.d_hat)) {
            res.d_hat = gap;
            have_gap = true;
        }
    }
    if (!have_gap) res.d_hat = res.min_component;  // all projections coincide
    T m = res.w;
    if (res.d_hat < m) m = res.d_hat;
    if (res.min_component < m) m = res.min_component;
    res.eps_main = s.a * m / T(10);
    return res;
}

template <class T>
struct TypeSpaceT {
    T eps{};
    IntervalUnion<T> T_eps;  // closed components [alpha_i + eps, beta_i - eps]
    T eps_main{};
    T d_hat{};
    T kappa{};               // eps * (1/a - 1)
};

template <class T>
TypeSpaceT<T> type_space(const StripSystem<T>& s, const PretypeResult<T>& pre,
                         const EpsilonMain<T>& em, const T& eps) {
    if (!(eps > 0) || !(eps < em.eps_main))
        throw Error(ErrorCode::EpsTooLarge, "eps must lie strictly in (0, eps_main)");
    TypeSpaceT<T> ts;
    ts.eps = eps;
    ts.eps_main = em.eps_main;
    ts.d_hat = em.d_hat;
    ts.kappa = eps * (T(1) / s.a - T(1));
    std::vector<Interval<T>> parts;
    for (const auto& c : pre.T0.components())
        parts.push_back(Interval<T>::closed(c.lo + eps, c.hi - eps));
    ts.T_eps = IntervalUnion<T>(std::move(parts), s.tol);
    if (ts.T_eps.size() != pre.T0.size())
        throw Error(ErrorCode::EpsTooLarge, "collar removal changed the component count");
    // projection identity: the same set as the union of shrunk projections
    std::vector<Interval<T>> proj;
    for (const auto& [i, k, a_ik, b_ik] : em.projections) {
        Interval<T> iv = Interval<T>::closed(a_ik + eps, b_ik - eps);
        if (!iv.empty()) proj.push_back(iv);
    }
    IntervalUnion<T> via_proj(std::move(proj), s.tol);
    if (!via_proj.equals_closure(ts.T_eps, s.tol))
        throw Error(ErrorCode::Validation, "projection identity for the type space failed");
    return ts;
}

/// One reachability step: preimages of the component under the strip sections,
/// clipped to the type space.
template <class T>
IntervalUnion<T> reach_step(const StripSystem<T>& s, const TypeSpaceT<T>& ts,
                            const IntervalUnion<T>& E) {
    std::vector<Interval<T>> parts;
    for (const auto& c : E.components())
        for (const auto& [lo, hi] : s.merged)
            parts.push_back(Interval<T>::open((c.lo - hi) / s.a, (c.hi - lo) / s.a));
    IntervalUnion<T> img(std::move(parts), s.tol);
    return img.intersect(ts.T_eps, s.tol);
}

template <class T>
IntervalUnion<T> support_reach(const StripSystem<T>& s, const TypeSpaceT<T>& ts, const T& x, int n) {
    if (!ts.T_eps.contains(x)) throw Error(ErrorCode::NotInTypeSpace, "x outside the type space");
    IntervalUnion<T> E(Interval<T>::point(x));
    for (int i = 0; i < n; ++i) E = reach_step(s, ts, E);
    return E;
}

struct SaturationResult {
    int N_star = 0;
    std::vector<int> depths;  // per grid point
};

template <class T>
SaturationResult saturation_depth(const StripSystem<T>& s, const TypeSpaceT<T>& ts,
                                  const std::vector<T>& grid_of_x, int max_depth = 64) {
    SaturationResult res;
    for (const T& x : grid_of_x) {
        if (!ts.T_eps.contains(x)) throw Error(ErrorCode::NotInTypeSpace, "grid point outside type space");
        IntervalUnion<T> E(Interval<T>::point(x));
        int n = 0;
        while (!E.equals_closure(ts.T_eps, s.tol)) {
            if (++n > max_depth)
                throw Error(ErrorCode::SaturationTimeout, "no saturation within max depth");
            E = reach_step(s, ts, E);
        }
        res.depths.push_back(n);
        res.N_star = std::max(res.N_star, n);
    }
    return res;
}

template <class T>
bool check_invariance(const StripSystem<T>& s, const PretypeResult<T>& pre) {
    IntervalUnion<T> img = psi(s, pre.T0);
    return pre.T0.closure().contains(img);
}

/// Grid covering every component of T(eps) at the given spacing (both
/// endpoints of each component included).
template <class T>
std::vector<T> type_space_grid(const TypeSpaceT<T>& ts, const T& spacing) {
    std::vector<T> out;
    for (const auto& c : ts.T_eps.components()) {
        T x = c.lo;
        while (x < c.hi) {
            out.push_back(x);
            x += spacing;
        }
        out.push_back(c.hi);
    }
    return out;
}

} // namespace rifslab

#endif
