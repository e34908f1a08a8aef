// Acceptance checks: one line per criterion, nonzero exit if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rifslab/branching.hpp"
#include "rifslab/cylinders.hpp"
#include "rifslab/larsson.hpp"
#include "rifslab/pipeline.hpp"
#include "rifslab/spectral.hpp"
#include "rifslab/transforms.hpp"
#include "rifslab/typespace.hpp"

using namespace rifslab;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& desc, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << desc;
    if (!ok && !detail.empty()) std::cout << " [" << detail << "]";
    std::cout << "\n";
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

HomogeneousRIFS system_a() {
    HomogeneousRIFS h;
    h.ratio = Rat(2, 5);
    for (int t : {0, 1, 2}) h.laws.push_back(make_uniform_law(Rat(t), Rat(3, 10)));
    return h;
}

HomogeneousRIFS system_b() {
    HomogeneousRIFS h;
    h.ratio = Rat(2, 5);
    h.laws.push_back(make_uniform_law(Rat(0), Rat(1, 2)));
    h.laws.push_back(make_uniform_law(Rat(10), Rat(1, 2)));
    return h;
}

HomogeneousRIFS diff_larsson() {
    return difference_system(larsson_homogeneous(Rat(3, 10), Rat(1, 25)));
}

struct SetupD {
    StripSystem<double> s;
    PretypeResult<double> pre;
    EpsilonMain<double> em;
    TypeSpaceT<double> ts;
};

SetupD setup_double(const HomogeneousRIFS& h, double eps = -1) {
    SetupD t;
    t.s = build_strips<double>(h);
    t.pre = build_pretype(t.s);
    t.em = epsilon_main(t.s, t.pre);
    t.ts = type_space(t.s, t.pre, t.em, eps > 0 ? eps : t.em.eps_main / 2);
    return t;
}

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// -------- 1: dimension formula on the two-map preset --------
void criterion_1() {
    bool ok = true;
    std::ostringstream why;
    struct Case { Rat a, b; };
    std::vector<Case> cases{{Rat(26, 100), Rat(1, 25)}, {Rat(3, 10), Rat(1, 25)},
                            {Rat(1, 4) + rat_from_double(1e-6), Rat(1, 10)}};
    for (const auto& [a, b] : cases) {
        auto spec = larsson_system(a, b);
        double best = 1e9;
        double s = 0;
        for (int rep = 0; rep < 3; ++rep) {
            auto t0 = Clock::now();
            s = similarity_dimension(spec);
            best = std::min(best, seconds_since(t0));
        }
        double expect = -std::log(2.0) / std::log(to_double(a));
        if (std::fabs(s - expect) > 1e-10) {
            ok = false;
            why << "a=" << to_double(a) << " got " << s << " want " << expect << "; ";
        }
        if (best > 1e-3) {
            ok = false;
            why << "a=" << to_double(a) << " took " << best * 1e3 << " ms; ";
        }
    }
    report(1, "two-map dimension formula within 1e-10, under 1 ms", ok, why.str());
}

// -------- 2: homogenization guarantee --------
void criterion_2() {
    bool ok = true;
    std::ostringstream why;
    try {
        RIFSSpec spec;
        spec.ratios = {Rat(1, 2), Rat(1, 4)};
        spec.laws.push_back(make_uniform_law(Rat(0), Rat(1, 10)));
        spec.laws.push_back(make_uniform_law(Rat(1), Rat(1, 10)));
        auto t0 = Clock::now();
        auto hom = homogenize(spec, 0.15);
        double dt = seconds_since(t0);
        double s = similarity_dimension(spec);
        if (hom.k != 10) { ok = false; why << "k=" << hom.k << "; "; }
        if (hom.h.L() != 210) { ok = false; why << "|J0|=" << hom.h.L() << "; "; }
        if (std::fabs(hom.achieved_s - 0.5510175369761516) > 1e-9) {
            ok = false;
            why << "s_k=" << hom.achieved_s << "; ";
        }
        if (hom.achieved_s <= s - 0.15) { ok = false; why << "s_k below s-eps; "; }
        if (dt > 1.0) { ok = false; why << dt << " s; "; }
    } catch (const std::exception& e) {
        ok = false;
        why << e.what();
    }
    report(2, "homogenize (1/2,1/4) at 0.15: k=10, 210 maps, s_k~0.5510, under 1 s", ok, why.str());
}

// -------- 3: difference doubling --------
void criterion_3() {
    bool ok = true;
    std::ostringstream why;
    std::uint64_t st = 12345;
    for (int trial = 0; trial < 20 && ok; ++trial) {
        HomogeneousRIFS h;
        st = mix(st);
        std::size_t L = 2 + st % 3;
        st = mix(st);
        h.ratio = Rat(static_cast<long>(10 + st % 36), 100);  // (0.10, 0.45)
        for (std::size_t i = 0; i < L; ++i) {
            st = mix(st);
            Rat center(static_cast<long>(st % 50), 10);
            st = mix(st);
            Rat theta(static_cast<long>(1 + st % 40), 100);
            h.laws.push_back(make_uniform_law(center, theta));
        }
        auto d = difference_system(h);
        double s = similarity_dimension(h), sd = similarity_dimension(d);
        if (std::fabs(sd - 2 * s) > 1e-9) {
            ok = false;
            why << "trial " << trial << ": " << sd << " vs 2*" << s;
        }
    }
    report(3, "difference system doubles the dimension on 20 random systems", ok, why.str());
}

// -------- 4: exact type spaces plus a bitmap oracle --------
bool bitmap_matches(const HomogeneousRIFS& h) {
    auto s = build_strips<double>(h);
    auto pre = build_pretype(s);
    const double step = 1e-5 * (s.beta_tilde - s.alpha_tilde);
    const std::size_t n = static_cast<std::size_t>((s.beta_tilde - s.alpha_tilde) / step) + 1;
    std::vector<char> cur(n, 1), next(n);
    auto xof = [&](std::size_t i) { return s.alpha_tilde + static_cast<double>(i) * step; };
    for (int it = 0; it <= pre.N0; ++it) {
        std::vector<std::pair<double, double>> runs;
        for (std::size_t i = 0; i < n;) {
            if (!cur[i]) { ++i; continue; }
            std::size_t j = i;
            while (j < n && cur[j]) ++j;
            runs.push_back({xof(i), xof(j - 1)});
            i = j;
        }
        std::fill(next.begin(), next.end(), 0);
        for (const auto& [y0, y1] : runs)
            for (const auto& [lo, hi] : s.raw) {
                double u = s.a * y0 + lo, v = s.a * y1 + hi;
                auto jlo = static_cast<std::size_t>(std::max(0.0, (u - s.alpha_tilde) / step + 1));
                auto jhi = static_cast<std::size_t>(std::max(0.0, (v - s.alpha_tilde) / step));
                for (std::size_t j = jlo; j <= jhi && j < n; ++j) next[j] = 1;
            }
        cur = next;
    }
    for (std::size_t i = 0; i < n; i += 5) {
        double x = xof(i);
        bool in_t0 = false, near_t0 = false;
        for (const auto& c : pre.T0.components()) {
            if (x > c.lo + 2 * step && x < c.hi - 2 * step) in_t0 = true;
            if (x > c.lo - 2 * step && x < c.hi + 2 * step) near_t0 = true;
        }
        if (in_t0 && !cur[i]) return false;
        if (!near_t0 && cur[i]) return false;
    }
    return true;
}

void criterion_4() {
    bool ok = true;
    std::ostringstream why;
    auto t0 = Clock::now();
    try {
        auto sa = build_strips<Rat>(system_a());
        auto pa = build_pretype(sa);
        if (pa.N0 != 0 || pa.T0.size() != 1 || pa.T0.components()[0].lo != Rat(-1, 2) ||
            pa.T0.components()[0].hi != Rat(23, 6)) {
            ok = false;
            why << "system A pretype; ";
        }
        auto sb = build_strips<Rat>(system_b());
        auto pb = build_pretype(sb);
        if (pb.N0 != 1 || pb.T0.size() != 2 || pb.red.size() != 1 || pb.red[0].size() != 1 ||
            pb.red[0][0].lo != Rat(15, 2) || pb.red[0][0].hi != Rat(55, 6)) {
            ok = false;
            why << "system B pretype/red; ";
        }
        if (!bitmap_matches(system_a()) || !bitmap_matches(system_b())) {
            ok = false;
            why << "bitmap oracle; ";
        }
        double dt = seconds_since(t0);
        if (dt > 1.0) { ok = false; why << dt << " s; "; }
    } catch (const std::exception& e) { ok = false; why << e.what(); }
    report(4, "exact pretypes for systems A and B match the 1e-5 bitmap oracle, under 1 s", ok,
           why.str());
}

// -------- 5: fixed point and component-count stability --------
void criterion_5() {
    bool ok = true;
    std::ostringstream why;
    try {
        int which = 0;
        for (const auto& h : {system_a(), system_b(), diff_larsson()}) {
            ++which;
            auto s = build_strips<Rat>(h);
            auto pre = build_pretype(s);
            if (!psi(s, pre.T0).equals_closure(pre.T0)) {
                ok = false;
                why << "system " << which << " not a fixed point; ";
            }
            auto em = epsilon_main(s, pre);
            for (int j = 1; j <= 10; ++j) {
                auto ts = type_space(s, pre, em, Rat(em.eps_main * Rat(j, 11)));
                if (ts.T_eps.size() != pre.T0.size()) {
                    ok = false;
                    why << "system " << which << " eps " << j << "/11 changed counts; ";
                }
            }
        }
    } catch (const std::exception& e) { ok = false; why << e.what(); }
    report(5, "psi fixes T(0); component counts stable for 10 eps below eps_main", ok, why.str());
}

// -------- 6: reachability depth vs primitivity index --------
void criterion_6() {
    bool ok = true;
    std::ostringstream why;
    auto t0 = Clock::now();
    try {
        auto h = system_a();
        auto sr = build_strips<Rat>(h);
        auto prer = build_pretype(sr);
        auto emr = epsilon_main(sr, prer);
        auto tsr = type_space(sr, prer, emr, Rat(emr.eps_main / 2));
        auto grid = type_space_grid(tsr, Rat(tsr.kappa / 2));
        auto sat = saturation_depth(sr, tsr, grid, 64);

        auto t = setup_double(h);
        auto [kgrid, spec] = build_operator(h, t.ts, 256);
        if (std::abs(sat.N_star - spec.N0_pos) > 1) {
            ok = false;
            why << "N*=" << sat.N_star << " N0_pos=" << spec.N0_pos << "; ";
        }
        double dt = seconds_since(t0);
        if (dt > 30.0) { ok = false; why << dt << " s; "; }
    } catch (const std::exception& e) { ok = false; why << e.what(); }
    report(6, "exact saturation depth within 1 of the kernel primitivity index, under 30 s", ok,
           why.str());
}

// -------- 7: supercriticality with refinement drift --------
void criterion_7() {
    bool ok = true;
    std::ostringstream why;
    try {
        int which = 0;
        for (const auto& h : {system_a(), diff_larsson()}) {
            ++which;
            auto t = setup_double(h);  // eps = eps_main / 2
            auto [g1, s1] = build_operator(h, t.ts, 256);
            auto [g2, s2] = build_operator(h, t.ts, 512);
            if (s1.rho <= 1.0) { ok = false; why << "system " << which << " rho<=1; "; }
            if (std::fabs(s1.rho - s2.rho) >= 1e-3) {
                ok = false;
                why << "system " << which << " drift " << std::fabs(s1.rho - s2.rho) << "; ";
            }
        }
    } catch (const std::exception& e) { ok = false; why << e.what(); }
    report(7, "rho > 1 at eps_main/2 with 256->512 drift under 1e-3", ok, why.str());
}

// -------- 8: Monte Carlo vs the discretized operator --------
void criterion_8() {
    bool ok = true;
    std::ostringstream why;
    auto t0 = Clock::now();
    try {
        auto h = system_a();
        auto t = setup_double(h);
        auto [grid, spec] = build_operator(h, t.ts, 256);
        auto gc = growth_constants(h, grid, spec, t.ts, t.em.eps_main);
        const double x = 1.0;
        const int trials = 2000;
        for (int n = 1; n <= 3; ++n) {
            double sum = 0, sumsq = 0;
            for (int tr = 0; tr < trials; ++tr) {
                RealizationTree tree(1000 + static_cast<std::uint64_t>(tr) * 77, h.laws);
                auto run = simulate_Z(h, t.ts, x, n, gc.W, tree);
                double z = static_cast<double>(run.Z[static_cast<std::size_t>(n)]);
                sum += z;
                sumsq += z * z;
            }
            double mean = sum / trials;
            double se = std::sqrt((sumsq / trials - mean * mean) / trials);
            std::vector<double> u(grid.n), nx;
            for (std::size_t j = 0; j < grid.n; ++j) {
                double lo = grid.nodes[j] - 0.5 * grid.weights[j];
                double hi = grid.nodes[j] + 0.5 * grid.weights[j];
                double ov = 0;
                for (const auto& c : gc.W.components())
                    ov += std::max(0.0, std::min(hi, c.hi) - std::max(lo, c.lo));
                u[j] = ov / grid.weights[j];
            }
            for (int step = 0; step < n; ++step) {
                detail::matvec(grid, u, nx);
                u.swap(nx);
            }
            std::size_t j = 0;
            while (j + 1 < grid.n && grid.nodes[j + 1] < x) ++j;
            double f = (x - grid.nodes[j]) / (grid.nodes[j + 1] - grid.nodes[j]);
            double pred = u[j] * (1 - f) + u[j + 1] * f;
            if (std::fabs(mean - pred) > 3 * se + 1e-3) {
                ok = false;
                why << "n=" << n << " mean=" << mean << " pred=" << pred << " se=" << se << "; ";
            }
        }
        auto est = estimate_growth(h, t.ts, x, 10, 600, 4242);
        if (std::fabs(est.rho_hat - spec.rho) > 0.05 * spec.rho) {
            ok = false;
            why << "rho_hat=" << est.rho_hat << " rho=" << spec.rho << "; ";
        }
        double dt = seconds_since(t0);
        if (dt > 120.0) { ok = false; why << dt << " s; "; }
    } catch (const std::exception& e) { ok = false; why << e.what(); }
    report(8, "Monte-Carlo means within 3 SE of the operator; growth rate within 5%, under 2 min",
           ok, why.str());
}

// -------- 9: certificate finiteness and the supercriticality gate --------
void criterion_9() {
    bool ok = true;
    std::ostringstream why;
    try {
        auto h = system_a();
        auto t = setup_double(h);
        auto [grid, spec] = build_operator(h, t.ts, 128);
        auto gc = growth_constants(h, grid, spec, t.ts, t.em.eps_main);
        double c1 = 0;
        for (const auto& c : t.pre.T0.components())
            if (c1 == 0 || c.length() < c1) c1 = c.length();
        auto cert = assemble_certificate(h, t.ts, gc, c1, 0.01);
        double sum = 0;
        for (double ak : cert.a_k) {
            if (ak >= 0.5) { ok = false; why << "a_k " << ak << " >= 1/2; "; }
            sum += ak;
        }
        if (cert.n_2 < 1) { ok = false; why << "n_2 " << cert.n_2 << "; "; }
        if (sum >= 0.005) { ok = false; why << "sum a_k " << sum << "; "; }
        if (cert.xi_bound < 0.99) { ok = false; why << "bound " << cert.xi_bound << "; "; }

        bool threw = false;
        try {
            GrowthConstants dummy;
            dummy.r = 2;
            dummy.eta = 0.01;
            dummy.W = IntervalUnion<double>(Interval<double>::closed(0, 1));
            assemble_certificate(system_b(), t.ts, dummy, 0.5, 0.01);  // L*a = 0.8
        } catch (const Error& e) {
            threw = e.code() == ErrorCode::NotSupercritical;
        }
        if (!threw) { ok = false; why << "La<=1 not rejected; "; }
    } catch (const std::exception& e) { ok = false; why << e.what(); }
    report(9, "certificate finite with bound >= 0.99; NotSupercritical raised when La <= 1", ok,
           why.str());
}

// -------- 10: coverage trend --------
void criterion_10() {
    bool ok = true;
    std::ostringstream why;
    auto t0 = Clock::now();
    try {
        auto spec = system_a().as_spec();
        spec.mode = ArithmeticMode::floating;
        int with_common = 0;
        double min_measure = 1e18;
        for (int seed = 1; seed <= 100; ++seed) {
            RealizationTree tree(static_cast<std::uint64_t>(seed), spec.laws);
            auto levels = sample_cylinder_levels(spec, tree, 12);
            auto stats = coverage_statistics(levels);
            if (stats.has_common) ++with_common;
            for (double m : stats.measures) min_measure = std::min(min_measure, m);
        }
        if (with_common < 95) { ok = false; why << "common in " << with_common << "/100; "; }
        if (min_measure <= 0.01) { ok = false; why << "measure floor " << min_measure << "; "; }

        RIFSSpec cantor;
        cantor.ratios = {Rat(1, 3), Rat(1, 3)};
        cantor.laws.push_back(make_uniform_law(Rat(0), Rat(0)));
        cantor.laws.push_back(make_uniform_law(Rat(2, 3), Rat(0)));
        RealizationTree tree(1, cantor.laws);
        auto stats = coverage_statistics(sample_cylinder_levels(cantor, tree, 10));
        for (std::size_t k = 0; k < stats.measures.size(); ++k)
            if (std::fabs(stats.measures[k] - std::pow(2.0 / 3.0, static_cast<double>(k) + 1)) > 1e-12) {
                ok = false;
                why << "control level " << k + 1 << "; ";
            }
        double dt = seconds_since(t0);
        if (dt > 120.0) { ok = false; why << dt << " s; "; }
    } catch (const std::exception& e) { ok = false; why << e.what(); }
    report(10, "coverage keeps a floor and a common interval in >= 95/100 seeds; control decays (2/3)^n",
           ok, why.str());
}

// -------- 11: box dimension estimates --------
std::uint64_t boxes_sorted(const std::vector<std::pair<double, double>>& sorted, double scale) {
    std::uint64_t cnt = 0;
    long long curhi = 0;
    bool open = false;
    for (const auto& [lo, hi] : sorted) {
        auto blo = static_cast<long long>(std::floor(lo / scale));
        auto bhi = static_cast<long long>(std::floor(hi / scale));
        if (!open || blo > curhi + 1) {
            cnt += static_cast<std::uint64_t>(bhi - blo + 1);
            curhi = bhi;
            open = true;
        } else if (bhi > curhi) {
            cnt += static_cast<std::uint64_t>(bhi - curhi);
            curhi = bhi;
        }
    }
    return cnt;
}

double box_dim_sorted(std::vector<std::pair<double, double>>& ivs, const std::vector<double>& scales) {
    std::sort(ivs.begin(), ivs.end());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double scale : scales) {
        double x = std::log(1.0 / scale);
        double y = std::log(static_cast<double>(boxes_sorted(ivs, scale)));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double m = static_cast<double>(scales.size());
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

void criterion_11() {
    bool ok = true;
    std::ostringstream why;
    try {
        {
            auto spec = larsson_system(Rat(3, 10), Rat(1, 25));
            spec.mode = ArithmeticMode::floating;
            std::vector<double> scales;
            for (int j = 2; j <= 7; ++j) scales.push_back(std::pow(0.3, j));
            double acc = 0;
            for (int seed = 1; seed <= 50; ++seed) {
                RealizationTree tree(static_cast<std::uint64_t>(seed), spec.laws);
                auto levels = sample_cylinder_levels(spec, tree, 14);
                acc += box_dim_sorted(levels.back(), scales);
            }
            double est = acc / 50, want = std::log(2.0) / -std::log(0.3);
            if (std::fabs(est - want) > 0.05) {
                ok = false;
                why << "two-map estimate " << est << " want " << want << "; ";
            }
        }
        {
            auto spec = system_a().as_spec();
            spec.mode = ArithmeticMode::floating;
            std::vector<double> scales;
            for (int j = 3; j <= 8; ++j) scales.push_back(std::pow(0.4, j));
            double acc = 0;
            const std::uint64_t budget = 5000000;  // 3^14 leaves
            for (int seed = 1; seed <= 50; ++seed) {
                RealizationTree tree(static_cast<std::uint64_t>(seed), spec.laws);
                auto levels = sample_cylinder_levels(spec, tree, 14, budget);
                acc += box_dim_sorted(levels.back(), scales);
            }
            double est = acc / 50;
            if (std::fabs(est - 1.0) > 0.05) {
                ok = false;
                why << "system A estimate " << est << " want 1.0; ";
            }
        }
    } catch (const std::exception& e) { ok = false; why << e.what(); }
    report(11, "box-counting dimension within 0.05 of min{1, s} over 50 seeds at level 14", ok,
           why.str());
}

// -------- 12: tail bound sanity --------
void criterion_12() {
    bool ok = true;
    std::ostringstream why;
    const int C = 200, reps = 10000;
    const double range = 8.0;  // L = 2, r = 3
    std::uint64_t st = 2718;
    int below = 0;
    for (int rep = 0; rep < reps; ++rep) {
        double sum = 0;
        for (int c = 0; c < C; ++c) {
            st = mix(st);
            double u = static_cast<double>(st >> 11) * 0x1.0p-53;
            sum += (u < 0.775) ? range : 0.0;  // per-copy mean 6.2 > 6
        }
        if (sum < 2.0 * C) ++below;
    }
    double tau = std::exp(-32.0 / (range * range));
    if (static_cast<double>(below) / reps > std::pow(tau, C)) {
        ok = false;
        why << below << "/" << reps << " below threshold";
    }
    report(12, "simulated tail probability stays under tau^C with C = 200", ok, why.str());
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    if (failures) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all 12 criteria passed\n";
    return 0;
}
