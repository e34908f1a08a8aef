#ifndef RIFSLAB_PIPELINE_HPP
#define RIFSLAB_PIPELINE_HPP

#include <cstdint>
#include <string>

#include "rifslab/branching.hpp"
#include "rifslab/cylinders.hpp"
#include "rifslab/json_io.hpp"
#include "rifslab/larsson.hpp"
#include "rifslab/rifs.hpp"
#include "rifslab/rng.hpp"
#include "rifslab/spectral.hpp"
#include "rifslab/transforms.hpp"
#include "rifslab/typespace.hpp"

namespace rifslab {

struct PipelineConfig {
    RIFSSpec spec;
    bool difference = false;       // analyze C - C' instead of C itself
    double eps = -1;               // <= 0: use eps_main / 2
    double hom_eps = 0.1;          // dimension loss allowed by homogenize
    std::uint64_t seed = 1;
    std::size_t grid = 256;        // spectral points per component
    std::size_t law_grid = kDefaultLawGrid;
    std::uint64_t budget = kDefaultCylinderBudget;
    double xi = 0.01;
    int coverage_level = 8;
    int coverage_seeds = 20;
};

struct PipelineResult {
    json reports = json::object();
    bool stopped_early = false;
    std::string stop_reason;
};

namespace detail {
template <class F>
auto run_stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.code(), "stage '" + name + "' failed: " + e.what());
    }
}
} // namespace detail

inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
    PipelineResult out;

    // validate
    auto violations = validate_spec(cfg.spec);
    {
        json v = json::array();
        for (const auto& x : violations) v.push_back(x.str());
        out.reports["validate"] = json{{"violations", v}};
    }
    if (!violations.empty())
        throw Error(ErrorCode::Validation, "stage 'validate' failed: " + violations.front().str());

    // dimension
    double s = similarity_dimension(cfg.spec);
    auto [alpha, beta] = supporting_interval(cfg.spec);
    out.reports["dimension"] = json{{"s", s},
                                    {"alpha", rat_to_json(alpha, cfg.spec.mode)},
                                    {"beta", rat_to_json(beta, cfg.spec.mode)}};

    // positivize + homogenize
    HomogenizeResult hom = detail::run_stage("homogenize", [&] {
        return homogenize(cfg.spec, cfg.hom_eps, cfg.law_grid);
    });
    {
        json comp = json::array();
        for (int k : hom.composition) comp.push_back(k);
        out.reports["homogenize"] = json{{"k", hom.k},
                                         {"composition", comp},
                                         {"map_count", hom.h.L()},
                                         {"ratio", rat_to_json(hom.h.ratio, hom.h.mode)},
                                         {"achieved_s", hom.achieved_s}};
    }

    HomogeneousRIFS h = hom.h;
    double s_h = similarity_dimension(h);
    if (cfg.difference) {
        h = detail::run_stage("difference", [&] { return difference_system(hom.h, cfg.law_grid); });
        s_h = similarity_dimension(h);
        out.reports["difference"] = json{{"map_count", h.L()}, {"s", s_h}};
    }

    if (s_h <= 1.0) {
        out.stopped_early = true;
        out.stop_reason = cfg.difference
                              ? "difference dimension < 1, interval impossible"
                              : "dimension <= 1, interior certificate impossible";
        out.reports["verdict"] = json{{"supercritical", false}, {"reason", out.stop_reason}};
        return out;
    }

    // typespace (double arithmetic feeds the spectral stage; exact variant is
    // available through the library for rational inputs)
    auto strips = detail::run_stage("typespace", [&] { return build_strips<double>(h); });
    auto pre = detail::run_stage("typespace", [&] { return build_pretype(strips); });
    auto em = epsilon_main(strips, pre);
    double eps = cfg.eps > 0 ? cfg.eps : em.eps_main / 2.0;
    auto ts = detail::run_stage("typespace", [&] { return type_space(strips, pre, em, eps); });
    out.reports["typespace"] = json{{"N0", pre.N0},
                                    {"components", interval_union_to_json(pre.T0, ArithmeticMode::floating)},
                                    {"eps_main", em.eps_main},
                                    {"eps", eps},
                                    {"w", em.w},
                                    {"d_hat", em.d_hat},
                                    {"min_component", em.min_component},
                                    {"kappa", ts.kappa},
                                    {"T_eps", interval_union_to_json(ts.T_eps, ArithmeticMode::floating)}};

    // spectral
    auto [grid, spectral] = detail::run_stage("spectral", [&] { return build_operator(h, ts, cfg.grid); });
    out.reports["spectral"] = json{{"rho", spectral.rho},
                                   {"N0_pos", spectral.N0_pos},
                                   {"nodes", grid.n},
                                   {"iterations", spectral.iterations},
                                   {"residual", spectral.residual}};

    if (spectral.rho <= 1.0) {
        out.stopped_early = true;
        out.stop_reason = "rho <= 1: branching process subcritical at this eps";
        out.reports["verdict"] = json{{"supercritical", false}, {"reason", out.stop_reason}};
        return out;
    }

    // growth constants
    auto gc = detail::run_stage("growth", [&] {
        return growth_constants(h, grid, spectral, ts, em.eps_main);
    });
    out.reports["growth"] = json{{"U", gc.U}, {"C_star", gc.C_star}, {"C_0", gc.C_0},
                                 {"eta", gc.eta}, {"r", gc.r},
                                 {"W", interval_union_to_json(gc.W, ArithmeticMode::floating)}};

    // certificate
    double c1 = 0;
    for (const auto& c : pre.T0.components())
        if (c1 == 0 || c.length() < c1) c1 = c.length();
    auto cert = detail::run_stage("certificate", [&] {
        return assemble_certificate(h, ts, gc, c1, cfg.xi);
    });
    {
        json aks = json::array();
        for (double v : cert.a_k) aks.push_back(v);
        out.reports["certificate"] = json{{"n", cert.n},       {"r", cert.r},
                                          {"tau", cert.tau},   {"N_of_n", cert.N_of_n},
                                          {"n_1", cert.n_1},   {"n_2", cert.n_2},
                                          {"ell_1", cert.ell_1}, {"c_1", cert.c_1},
                                          {"L_tilde", cert.L_tilde}, {"a_k", aks},
                                          {"bound", cert.xi_bound}, {"xi", cfg.xi}};
    }

    // Monte-Carlo coverage on the input system
    {
        json runs = json::array();
        for (int t = 0; t < cfg.coverage_seeds; ++t) {
            RealizationTree tree(rifslab::detail::splitmix64(cfg.seed + static_cast<std::uint64_t>(t)),
                                 cfg.spec.laws);
            auto levels = sample_cylinder_levels(cfg.spec, tree, cfg.coverage_level, cfg.budget);
            auto stats = coverage_statistics(levels);
            json measures = json::array();
            for (double m : stats.measures) measures.push_back(m);
            runs.push_back(json{{"measures", measures},
                                {"common_interval",
                                 stats.has_common ? json::array({stats.common_lo, stats.common_hi})
                                                  : json::array()}});
        }
        out.reports["coverage"] = json{{"level", cfg.coverage_level}, {"runs", runs}};
    }
    out.reports["verdict"] = json{{"supercritical", true}, {"bound", cert.xi_bound}};
    return out;
}

} // namespace rifslab

#endif
