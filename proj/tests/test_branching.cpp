#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "helpers.hpp"
#include "rifslab/branching.hpp"
#include "rifslab/spectral.hpp"

using namespace rifslab;
using testsys::system_a;
using testsys::system_b;

namespace {
struct TypeSetup {
    StripSystem<double> s;
    PretypeResult<double> pre;
    EpsilonMain<double> em;
    TypeSpaceT<double> ts;
};

TypeSetup setup_double(const HomogeneousRIFS& h, double eps_frac = 0.75) {
    TypeSetup t;
    t.s = build_strips<double>(h);
    t.pre = build_pretype(t.s);
    t.em = epsilon_main(t.s, t.pre);
    t.ts = type_space(t.s, t.pre, t.em, eps_frac * t.em.eps_main);
    return t;
}
} // namespace

TEST_CASE("depth zero counts the root itself") {
    auto h = system_a();
    auto t = setup_double(h);
    RealizationTree tree(11, h.laws);
    IntervalUnion<double> A(Interval<double>::closed(0.9, 1.1));
    auto run = simulate_Z(h, t.ts, 1.0, 0, A, tree);
    REQUIRE(run.Z.size() == 1);
    CHECK(run.Z[0] == 1);
    IntervalUnion<double> far(Interval<double>::closed(3.0, 3.5));
    CHECK(simulate_Z(h, t.ts, 1.0, 0, far, tree).Z[0] == 0);
    CHECK_THROWS_AS(simulate_Z(h, t.ts, 100.0, 1, A, tree), Error);
}

TEST_CASE("one generation: survivors plus absorptions account for every child") {
    auto h = system_a();
    auto t = setup_double(h);
    for (std::uint64_t seed : {1u, 2u, 3u, 10u, 77u}) {
        RealizationTree tree(seed, h.laws);
        auto run = simulate_Z(h, t.ts, 1.0, 1, t.ts.T_eps, tree);
        CHECK(run.Z[0] == 1);
        CHECK(run.Z[1] <= h.L());
        CHECK(run.Z[1] + run.absorbed == h.L());
    }
}

TEST_CASE("runs replay exactly from the seed and respect the L^n cap") {
    auto h = system_a();
    auto t = setup_double(h);
    RealizationTree tree(2024, h.laws);
    auto r1 = simulate_Z(h, t.ts, 1.0, 6, t.ts.T_eps, tree);
    RealizationTree again(2024, h.laws);
    auto r2 = simulate_Z(h, t.ts, 1.0, 6, t.ts.T_eps, again);
    CHECK(r1.Z == r2.Z);
    CHECK(r1.absorbed == r2.absorbed);
    for (std::size_t k = 0; k < r1.Z.size(); ++k)
        CHECK(r1.Z[k] <= static_cast<std::uint64_t>(std::pow(3.0, static_cast<double>(k)) + 0.5));
    CHECK_THROWS_AS(simulate_Z(h, t.ts, 1.0, 30, t.ts.T_eps, tree), Error);
}

TEST_CASE("counts are monotone in the target set on a fixed realization") {
    auto h = system_a();
    auto t = setup_double(h);
    IntervalUnion<double> small(Interval<double>::closed(0.5, 1.5));
    IntervalUnion<double> big(Interval<double>::closed(0.0, 2.5));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        RealizationTree tree(seed, h.laws);
        auto rs = simulate_Z(h, t.ts, 1.0, 4, small, tree);
        auto rb = simulate_Z(h, t.ts, 1.0, 4, big, tree);
        CHECK(rs.Z[4] <= rb.Z[4]);
        CHECK(rb.Z[4] <= rb.Z[3] * 3);
    }
}

TEST_CASE("Monte-Carlo means match the discretized expectations") {
    auto h = system_a();
    auto t = setup_double(h);
    auto [grid, spec] = build_operator(h, t.ts, 256);
    IntervalUnion<double> A(Interval<double>::closed(0.5, 1.5));
    const double x = 1.0;
    const int trials = 2000;
    for (int n = 1; n <= 3; ++n) {
        double sum = 0, sumsq = 0;
        for (int tr = 0; tr < trials; ++tr) {
            RealizationTree tree(900 + static_cast<std::uint64_t>(tr) * 131, h.laws);
            auto run = simulate_Z(h, t.ts, x, n, A, tree);
            double z = static_cast<double>(run.Z[static_cast<std::size_t>(n)]);
            sum += z;
            sumsq += z * z;
        }
        double mean = sum / trials;
        double se = std::sqrt((sumsq / trials - mean * mean) / trials);

        // discrete prediction: u <- M u from the cell-overlap fractions of A
        std::vector<double> u(grid.n), next;
        for (std::size_t j = 0; j < grid.n; ++j) {
            double lo = grid.nodes[j] - 0.5 * grid.weights[j];
            double hi = grid.nodes[j] + 0.5 * grid.weights[j];
            double ov = std::min(hi, 1.5) - std::max(lo, 0.5);
            u[j] = std::max(ov, 0.0) / grid.weights[j];
        }
        for (int step = 0; step < n; ++step) {
            detail::matvec(grid, u, next);
            u.swap(next);
        }
        // linear interpolation of u at x
        std::size_t j = 0;
        while (j + 1 < grid.n && grid.nodes[j + 1] < x) ++j;
        double f = (x - grid.nodes[j]) / (grid.nodes[j + 1] - grid.nodes[j]);
        double pred = u[j] * (1 - f) + u[j + 1] * f;
        INFO("n=" << n << " mean=" << mean << " pred=" << pred << " se=" << se);
        CHECK(std::fabs(mean - pred) <= 3.0 * se + 1e-3);
    }
}

TEST_CASE("growth estimate recovers the spectral radius within 5 percent") {
    auto h = system_a();
    auto t = setup_double(h);
    auto [grid, spec] = build_operator(h, t.ts, 256);
    auto est = estimate_growth(h, t.ts, 1.0, 10, 600, 4242);
    CHECK_FALSE(est.degenerate);
    CHECK(est.rho_hat == Catch::Approx(spec.rho).epsilon(0.05));
    CHECK(est.ci_lo <= est.rho_hat);
    CHECK(est.rho_hat <= est.ci_hi);
}

TEST_CASE("subcritical systems estimate decay") {
    auto h = system_b();  // L*a = 0.8 < 1
    auto t = setup_double(h);
    auto est = estimate_growth(h, t.ts, 1.0, 8, 400, 7);
    CHECK(est.rho_hat < 1.0);
}

TEST_CASE("too little data flags a degenerate estimate") {
    auto h = system_a();
    auto t = setup_double(h);
    auto est = estimate_growth(h, t.ts, 1.0, 1, 1, 5);
    CHECK(est.degenerate);
}

TEST_CASE("log-space tail terms reproduce hand values") {
    // L=2, n=3, r=3, tau=1/2, N=12
    CHECK(certificate_a_k(2, 3, 3, 0.5, 12, 0) == Catch::Approx(0.125).margin(1e-12));
    CHECK(certificate_a_k(2, 3, 3, 0.5, 12, 1) == Catch::Approx(0.015625).margin(1e-12));
    // doubling exponent: a_2 = 2^9 * (1/2)^24
    CHECK(certificate_a_k(2, 3, 3, 0.5, 12, 2) == Catch::Approx(512.0 / 16777216.0).margin(1e-12));
}

TEST_CASE("tau matches the closed form for small r") {
    HomogeneousRIFS h;
    h.ratio = Rat(3, 5);
    h.laws.push_back(make_uniform_law(Rat(0), Rat(1, 2)));
    h.laws.push_back(make_uniform_law(Rat(10), Rat(1, 2)));
    TypeSpaceT<double> ts_unused;
    GrowthConstants gc;
    gc.r = 3;
    gc.eta = 0.01;
    gc.W = IntervalUnion<double>({Interval<double>::closed(0, 1), Interval<double>::closed(2, 3)});
    auto cert = assemble_certificate(h, ts_unused, gc, 0.5, 0.01);
    CHECK(cert.tau == Catch::Approx(std::exp(-0.5)).margin(1e-12));
    CHECK(cert.r == 3);
    CHECK(cert.ell_1 == 1.0);
    CHECK(cert.n_2 >= cert.n_1);
    CHECK(cert.xi_bound >= 0.99);
}

TEST_CASE("full certificate on System A") {
    auto h = system_a();
    auto t = setup_double(h);
    auto [grid, spec] = build_operator(h, t.ts, 128);
    auto gc = growth_constants(h, grid, spec, t.ts, t.em.eps_main);
    double c_1 = t.pre.T0.components()[0].length();
    for (const auto& c : t.pre.T0.components()) c_1 = std::min(c_1, c.length());
    auto cert = assemble_certificate(h, t.ts, gc, c_1, 0.01);
    CHECK(cert.n_2 >= 1);
    CHECK(cert.n_1 >= 1);
    CHECK(cert.xi_bound >= 0.99);
    double sum = 0;
    for (std::size_t k = 0; k < cert.a_k.size(); ++k) {
        CHECK(cert.a_k[k] < 0.5);
        if (k > 0) CHECK(cert.a_k[k] < cert.a_k[k - 1]);
        sum += cert.a_k[k];
    }
    CHECK(sum < 0.005);
    CHECK(cert.xi_bound == Catch::Approx(1.0 - 2.0 * sum));
    CHECK(cert.L_tilde >= 1);
}

TEST_CASE("non-supercritical systems are rejected") {
    auto h = system_b();  // L*a = 0.8
    TypeSpaceT<double> ts_unused;
    GrowthConstants gc;
    gc.r = 2;
    gc.eta = 0.01;
    gc.W = IntervalUnion<double>(Interval<double>::closed(0, 1));
    CHECK_THROWS_AS(assemble_certificate(h, ts_unused, gc, 0.5, 0.01), Error);
    try {
        assemble_certificate(h, ts_unused, gc, 0.5, 0.01);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotSupercritical);
    }
}

TEST_CASE("the tail bound is safe empirically") {
    // C independent copies, each in [0, L^r] with mean > 6: the chance that the
    // sum drops below 2C is at most tau^C
    const int C = 200, reps = 10000;
    const double range = 8.0;  // L = 2, r = 3
    std::uint64_t st = 99;
    auto next01 = [&] {
        st += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = st;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    };
    double mean_copy = 0.775 * range;  // 6.2
    REQUIRE(mean_copy > 6.0);
    int below = 0;
    for (int rep = 0; rep < reps; ++rep) {
        double sum = 0;
        for (int c = 0; c < C; ++c) sum += (next01() < 0.775) ? range : 0.0;
        if (sum < 2.0 * C) ++below;
    }
    double tau = std::exp(-32.0 / (range * range));  // exp(-32 / L^{2r})
    CHECK(static_cast<double>(below) / reps <= std::pow(tau, C) + 1e-12);
}
