#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rifslab/branching.hpp"
#include "rifslab/cylinders.hpp"
#include "rifslab/json_io.hpp"
#include "rifslab/larsson.hpp"
#include "rifslab/pipeline.hpp"
#include "rifslab/spectral.hpp"
#include "rifslab/transforms.hpp"
#include "rifslab/typespace.hpp"

namespace fs = std::filesystem;
using namespace rifslab;

namespace {

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::Validation:
        case ErrorCode::InvalidParameters:
        case ErrorCode::InvalidWord:
        case ErrorCode::OutOfDomain:
        case ErrorCode::EpsTooLarge:
        case ErrorCode::NotInTypeSpace:
            return 2;
        case ErrorCode::BudgetExceeded:
        case ErrorCode::InsufficientScales:
        case ErrorCode::BoundExceeded:
            return 3;
        case ErrorCode::NotSupercritical:
            return 4;
        case ErrorCode::NotPrimitive:
        case ErrorCode::NoConvergence:
        case ErrorCode::NoEta:
        case ErrorCode::NoR:
        case ErrorCode::SaturationTimeout:
            return 5;
    }
    return 1;
}

struct GlobalOpts {
    std::uint64_t seed = 1;
    std::string eps = "auto";
    int grid = 256;
    std::uint64_t budget = kDefaultCylinderBudget;
    std::string out;
    std::string mode = "rational";
};

RIFSSpec load_spec(const std::string& path, const std::string& mode) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Validation, "cannot open spec file: " + path);
    json j;
    in >> j;
    RIFSSpec spec = spec_from_json(j);
    if (mode == "float") spec.mode = ArithmeticMode::floating;
    return spec;
}

HomogeneousRIFS to_homogeneous(const RIFSSpec& spec) {
    require_valid(spec);
    for (const auto& r : spec.ratios)
        if (r != spec.ratios[0])
            throw Error(ErrorCode::Validation, "command needs a homogeneous system (equal ratios)");
    if (spec.ratios[0] <= 0) throw Error(ErrorCode::Validation, "homogeneous ratio must be positive");
    HomogeneousRIFS h;
    h.ratio = spec.ratios[0];
    h.laws = spec.laws;
    h.mode = spec.mode;
    return h;
}

void emit(const GlobalOpts& g, const std::string& name, const json& j) {
    if (g.out.empty()) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    fs::create_directories(g.out);
    fs::path p = fs::path(g.out) / name;
    std::ofstream f(p);
    f << j.dump(2) << "\n";
    std::cout << p.string() << "\n";
}

void emit_text(const GlobalOpts& g, const std::string& name, const std::string& body) {
    if (g.out.empty()) {
        std::cout << body;
        return;
    }
    fs::create_directories(g.out);
    fs::path p = fs::path(g.out) / name;
    std::ofstream f(p);
    f << body;
    std::cout << p.string() << "\n";
}

struct TypeSetup {
    HomogeneousRIFS h;
    StripSystem<double> strips;
    PretypeResult<double> pre;
    EpsilonMain<double> em;
    TypeSpaceT<double> ts;
    double eps = 0;
};

TypeSetup build_typespace_double(const RIFSSpec& spec, const GlobalOpts& g) {
    TypeSetup setup;
    setup.h = to_homogeneous(spec);
    setup.strips = build_strips<double>(setup.h);
    setup.pre = build_pretype(setup.strips);
    setup.em = epsilon_main(setup.strips, setup.pre);
    setup.eps = g.eps == "auto" ? setup.em.eps_main / 2.0 : std::stod(g.eps);
    setup.ts = type_space(setup.strips, setup.pre, setup.em, setup.eps);
    return setup;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"analysis lab for randomly perturbed self-similar sets on the line"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    GlobalOpts g;
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--eps", g.eps, "collar width, or 'auto' for eps_main/2");
    app.add_option("--grid", g.grid, "spectral grid points per component");
    app.add_option("--budget", g.budget, "cylinder/tree budget");
    app.add_option("--out", g.out, "output directory (stdout when omitted)");
    app.add_option("--mode", g.mode, "arithmetic mode: rational|float")
        ->check(CLI::IsMember({"rational", "float"}));

    std::string spec_path;
    double opt_eps_transform = 0.1, opt_xi = 0.01, opt_x = 0;
    std::string opt_a = "3/10", opt_b = "1/25";
    int opt_depth = 8, opt_trials = 100, opt_level = 8;
    bool opt_difference = false, opt_x_set = false;

    auto add_spec = [&](CLI::App* cmd) { cmd->add_option("--spec", spec_path, "RIFS spec JSON file")->required(); };

    auto* c_dim = app.add_subcommand("dim", "similarity dimension and supporting interval");
    add_spec(c_dim);
    auto* c_pos = app.add_subcommand("positivize", "sign-correcting iterate");
    add_spec(c_pos);
    c_pos->add_option("--tol", opt_eps_transform, "allowed dimension loss");
    auto* c_hom = app.add_subcommand("homogenize", "equal-ratio subsystem");
    add_spec(c_hom);
    c_hom->add_option("--tol", opt_eps_transform, "allowed dimension loss");
    auto* c_diff = app.add_subcommand("difference", "pairwise difference system");
    add_spec(c_diff);
    auto* c_type = app.add_subcommand("typespace", "strips, pretype, type space");
    add_spec(c_type);
    auto* c_spec = app.add_subcommand("spectral", "kernel operator analysis");
    add_spec(c_spec);
    auto* c_sim = app.add_subcommand("simulate", "branching process Monte Carlo");
    add_spec(c_sim);
    c_sim->add_option("--depth", opt_depth, "tree depth");
    c_sim->add_option("--trials", opt_trials, "number of trials");
    c_sim->add_option("-x", opt_x, "start type (default: midpoint of the first component)")
        ->each([&](const std::string&) { opt_x_set = true; });
    auto* c_cert = app.add_subcommand("certify", "interval-containment certificate");
    add_spec(c_cert);
    c_cert->add_option("--xi", opt_xi, "failure probability budget");
    auto* c_pipe = app.add_subcommand("pipeline", "full end-to-end experiment");
    add_spec(c_pipe);
    c_pipe->add_flag("--difference", opt_difference, "analyze the difference of two copies");
    c_pipe->add_option("--xi", opt_xi, "failure probability budget");
    c_pipe->add_option("--level", opt_level, "coverage Monte-Carlo depth");
    auto* c_lar = app.add_subcommand("larsson", "preset two-map family");
    c_lar->add_option("-a", opt_a, "contraction ratio")->required();
    c_lar->add_option("-b", opt_b, "edge offset")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_dim->parsed()) {
            RIFSSpec spec = load_spec(spec_path, g.mode);
            auto violations = validate_spec(spec);
            if (!violations.empty()) {
                json v = json::array();
                for (const auto& x : violations) v.push_back(x.str());
                emit(g, "dim.json", json{{"violations", v}});
                return 2;
            }
            auto [alpha, beta] = supporting_interval(spec);
            emit(g, "dim.json",
                 json{{"s", similarity_dimension(spec)},
                      {"alpha", rat_to_json(alpha, spec.mode)},
                      {"beta", rat_to_json(beta, spec.mode)}});
        } else if (c_pos->parsed()) {
            RIFSSpec spec = load_spec(spec_path, g.mode);
            auto res = positivize(spec, opt_eps_transform);
            emit(g, "positivize.json",
                 json{{"depth", res.depth},
                      {"map_count", res.spec.L()},
                      {"achieved_s", res.achieved_s},
                      {"spec", spec_to_json(res.spec)}});
        } else if (c_hom->parsed()) {
            RIFSSpec spec = load_spec(spec_path, g.mode);
            auto res = homogenize(spec, opt_eps_transform);
            json comp = json::array();
            for (int k : res.composition) comp.push_back(k);
            emit(g, "homogenize.json",
                 json{{"k", res.k},
                      {"composition", comp},
                      {"map_count", res.h.L()},
                      {"achieved_s", res.achieved_s},
                      {"system", homogeneous_to_json(res.h)}});
        } else if (c_diff->parsed()) {
            RIFSSpec spec = load_spec(spec_path, g.mode);
            auto h = to_homogeneous(spec);
            auto d = difference_system(h);
            emit(g, "difference.json",
                 json{{"map_count", d.L()},
                      {"s", similarity_dimension(d)},
                      {"system", homogeneous_to_json(d)}});
        } else if (c_type->parsed()) {
            RIFSSpec spec = load_spec(spec_path, g.mode);
            json report;
            if (spec.mode == ArithmeticMode::rational) {
                auto h = to_homogeneous(spec);
                auto strips = build_strips<Rat>(h);
                auto pre = build_pretype(strips);
                auto em = epsilon_main(strips, pre);
                Rat eps = g.eps == "auto" ? em.eps_main / 2 : parse_rational(g.eps);
                auto ts = type_space(strips, pre, em, eps);
                json red = json::array();
                for (const auto& level : pre.red) {
                    json lv = json::array();
                    for (const auto& iv : level)
                        lv.push_back(json{{"lo", rational_to_string(iv.lo)}, {"hi", rational_to_string(iv.hi)}});
                    red.push_back(lv);
                }
                report = json{{"N0", pre.N0},
                              {"T0", interval_union_to_json(pre.T0, spec.mode)},
                              {"red", red},
                              {"eps_main", rational_to_string(em.eps_main)},
                              {"w", rational_to_string(em.w)},
                              {"d_hat", rational_to_string(em.d_hat)},
                              {"min_component", rational_to_string(em.min_component)},
                              {"eps", rational_to_string(eps)},
                              {"kappa", rational_to_string(ts.kappa)},
                              {"T_eps", interval_union_to_json(ts.T_eps, spec.mode)}};
            } else {
                auto setup = build_typespace_double(spec, g);
                report = json{{"N0", setup.pre.N0},
                              {"T0", interval_union_to_json(setup.pre.T0, spec.mode)},
                              {"eps_main", setup.em.eps_main},
                              {"w", setup.em.w},
                              {"d_hat", setup.em.d_hat},
                              {"min_component", setup.em.min_component},
                              {"eps", setup.eps},
                              {"kappa", setup.ts.kappa},
                              {"T_eps", interval_union_to_json(setup.ts.T_eps, spec.mode)}};
            }
            emit(g, "typespace.json", report);
        } else if (c_spec->parsed()) {
            RIFSSpec spec = load_spec(spec_path, g.mode);
            auto setup = build_typespace_double(spec, g);
            auto [grid, sp] = build_operator(setup.h, setup.ts, static_cast<std::size_t>(g.grid));
            double fmin = sp.f[0], fmax = sp.f[0], gmin = sp.g[0], gmax = sp.g[0];
            for (double v : sp.f) { fmin = std::min(fmin, v); fmax = std::max(fmax, v); }
            for (double v : sp.g) { gmin = std::min(gmin, v); gmax = std::max(gmax, v); }
            emit(g, "spectral.json",
                 json{{"rho", sp.rho}, {"N0_pos", sp.N0_pos}, {"nodes", grid.n},
                      {"f_min", fmin}, {"f_max", fmax}, {"g_min", gmin}, {"g_max", gmax},
                      {"eps", setup.eps}, {"grid_per_component", g.grid}});
        } else if (c_sim->parsed()) {
            RIFSSpec spec = load_spec(spec_path, g.mode);
            auto setup = build_typespace_double(spec, g);
            double x = opt_x_set ? opt_x
                                 : 0.5 * (setup.ts.T_eps.components().front().lo +
                                          setup.ts.T_eps.components().front().hi);
            std::string csv = "trial,level,count\n";
            for (int t = 0; t < opt_trials; ++t) {
                RealizationTree tree(detail::splitmix64(g.seed + static_cast<std::uint64_t>(t)),
                                     setup.h.laws);
                auto run = simulate_Z(setup.h, setup.ts, x, opt_depth, setup.ts.T_eps, tree, g.budget);
                for (std::size_t k = 0; k < run.Z.size(); ++k)
                    csv += std::to_string(t) + "," + std::to_string(k) + "," + std::to_string(run.Z[k]) + "\n";
            }
            emit_text(g, "simulation.csv", csv);
        } else if (c_cert->parsed()) {
            RIFSSpec spec = load_spec(spec_path, g.mode);
            auto setup = build_typespace_double(spec, g);
            auto [grid, sp] = build_operator(setup.h, setup.ts, static_cast<std::size_t>(g.grid));
            auto gc = growth_constants(setup.h, grid, sp, setup.ts, setup.em.eps_main);
            double c1 = 0;
            for (const auto& c : setup.pre.T0.components())
                if (c1 == 0 || c.length() < c1) c1 = c.length();
            auto cert = assemble_certificate(setup.h, setup.ts, gc, c1, opt_xi);
            json aks = json::array();
            for (double v : cert.a_k) aks.push_back(v);
            emit(g, "certificate.json",
                 json{{"n", cert.n}, {"r", cert.r}, {"tau", cert.tau}, {"N_of_n", cert.N_of_n},
                      {"n_1", cert.n_1}, {"n_2", cert.n_2}, {"ell_1", cert.ell_1},
                      {"c_1", cert.c_1}, {"L_tilde", cert.L_tilde}, {"a_k", aks},
                      {"bound", cert.xi_bound}, {"xi", opt_xi}, {"rho", sp.rho}});
        } else if (c_pipe->parsed()) {
            PipelineConfig cfg;
            cfg.spec = load_spec(spec_path, g.mode);
            cfg.difference = opt_difference;
            cfg.eps = g.eps == "auto" ? -1 : std::stod(g.eps);
            cfg.seed = g.seed;
            cfg.grid = static_cast<std::size_t>(g.grid);
            cfg.budget = g.budget;
            cfg.xi = opt_xi;
            cfg.coverage_level = opt_level;
            auto res = run_pipeline(cfg);
            if (!g.out.empty()) {
                fs::create_directories(g.out);
                for (const auto& [stage, report] : res.reports.items()) {
                    std::ofstream f(fs::path(g.out) / (stage + ".json"));
                    f << report.dump(2) << "\n";
                }
            }
            json summary{{"stopped_early", res.stopped_early}, {"reports", res.reports}};
            if (res.stopped_early) summary["reason"] = res.stop_reason;
            emit(g, "pipeline.json", summary);
        } else if (c_lar->parsed()) {
            RIFSSpec spec = larsson_system(parse_rational(opt_a), parse_rational(opt_b));
            if (g.mode == "float") spec.mode = ArithmeticMode::floating;
            emit(g, "larsson.json", spec_to_json(spec));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
