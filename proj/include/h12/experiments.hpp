#pragma once

#include <filesystem>
#include <random>

#include "h12/counterexample.hpp"
#include "h12/diagnostic.hpp"
#include "h12/fixtures.hpp"
#include "h12/halfspace_density.hpp"
#include "h12/io.hpp"

namespace h12::experiments {

struct RunResult {
    int exit_code = 0;
    std::vector<std::string> artifacts;
    nlohmann::ordered_json summary;
};

namespace detail {

inline KernelSpec kernel_by_name(const std::string& name, int dim) {
    if (name == "phi") return KernelSpec::phi(dim);
    if (name == "gaussian") return KernelSpec::gaussian(dim);
    if (name == "psi") return KernelSpec::psi(dim);
    throw h12_error("unknown kernel: " + name);
}

inline SampledField load_input(const nlohmann::json& cfg, int dim_default) {
    if (cfg.contains("input")) return read_field(cfg["input"]);
    if (cfg.contains("shape_file")) {
        std::ifstream is(cfg["shape_file"].get<std::string>());
        if (!is) throw h12_error("cannot open shape file");
        nlohmann::json sj;
        is >> sj;
        const ShapeSet shape = shape_from_json(sj);
        const int dim = std::holds_alternative<Intervals>(shape) ? 1 : 2;
        Grid g(dim, cfg.value("period", 1.0),
               cfg.value("resolution", dim == 1 ? std::int64_t(1) << 16 : 1024));
        return rasterize(shape, g);
    }
    if (cfg.contains("fixture")) {
        const std::string fx = cfg["fixture"];
        if (fx == "single-jump")
            return fixtures::single_unit_jump(
                Grid(1, cfg.value("period", 1.0),
                     cfg.value("resolution", std::int64_t(1) << 16)));
        if (fx == "three-jumps")
            return fixtures::three_jumps(Grid(
                1, cfg.value("period", 1.0), cfg.value("resolution", std::int64_t(1) << 16)));
        if (fx == "triangle")
            return fixtures::triangle_no_jump(Grid(
                1, cfg.value("period", 1.0), cfg.value("resolution", std::int64_t(1) << 16)));
        if (fx == "disk")
            return fixtures::disk(
                Grid(2, cfg.value("period", 1.0), cfg.value("resolution", 1024)));
        if (fx == "checkerboard")
            return fixtures::checkerboard(
                Grid(2, cfg.value("period", 1.0), cfg.value("resolution", 1024)),
                cfg.value("cells", 16));
        throw h12_error("unknown fixture: " + fx);
    }
    (void)dim_default;
    throw h12_error("config needs one of: input, shape_file, fixture");
}

inline std::vector<double> schedule_from(const nlohmann::json& cfg, const char* key,
                                         int lo_def, int hi_def) {
    const int lo = cfg.value(std::string(key) + "_from", lo_def);
    const int hi = cfg.value(std::string(key) + "_to", hi_def);
    std::vector<double> out;
    for (int j = lo; j <= hi; ++j) out.push_back(std::pow(2.0, -j));
    return out;
}

inline std::string artifact_path(const std::string& out_dir, const std::string& name,
                                 const std::string& hash, const std::string& ext) {
    std::filesystem::create_directories(out_dir);
    return out_dir + "/" + name + "-" + hash + ext;
}

}  // namespace detail

/// Multiscale smoothed-energy trace |log eps|^{-1} ||gamma_eps * u||^2 with
/// the plateau extrapolated affinely in 1/|log eps|.
inline void maybe_dump_field(const nlohmann::json& cfg, const SampledField& u,
                             RunResult& res) {
    if (cfg.contains("dump_field")) {
        const std::string path = cfg["dump_field"];
        write_field(u, path);
        res.artifacts.push_back(path);
    }
}

inline RunResult run_energy(const nlohmann::ordered_json& cfg, const std::string& out_dir) {
    RunResult res;
    const std::string hash = config_hash(cfg);
    const SampledField u = detail::load_input(cfg, 1);
    maybe_dump_field(cfg, u, res);
    const SpectralField spec = transform(u);
    const auto eps_list = detail::schedule_from(cfg, "eps", 5, 10);
    std::ostringstream csv;
    csv << "eps,value\n";
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double eps : eps_list) {
        const double v = smoothed_h12_energy(spec, eps);
        csv << format_double(eps) << "," << format_double(v) << "\n";
        const double x = 1.0 / std::fabs(std::log(eps));
        sx += x; sy += v; sxx += x * x; sxy += x * v;
    }
    const double n = static_cast<double>(eps_list.size());
    const double plateau = (sxx * sy - sx * sxy) / (n * sxx - sx * sx);
    const std::string csv_path = detail::artifact_path(out_dir, "energy", hash, ".csv");
    write_text(csv_path, csv.str());
    res.artifacts.push_back(csv_path);
    res.summary = {{"experiment", "energy"}, {"config_hash", hash},
                   {"plateau_estimate", plateau}};
    const std::string js = detail::artifact_path(out_dir, "energy", hash, ".json");
    write_text(js, res.summary.dump(2) + "\n");
    res.artifacts.push_back(js);
    return res;
}

inline RunResult run_decompose(const nlohmann::ordered_json& cfg, const std::string& out_dir) {
    RunResult res;
    const std::string hash = config_hash(cfg);
    const SampledField u = detail::load_input(cfg, 1);
    const double eps = cfg.value("eps", 1.0 / 128.0);
    const DyadicDecomposition dd = dyadic_decomposition(u, eps);
    std::ostringstream csv;
    csv << "k,term\n";
    for (std::size_t k = 0; k < dd.terms.size(); ++k)
        csv << (k + 1) << "," << format_double(dd.terms[k]) << "\n";
    const std::string csv_path = detail::artifact_path(out_dir, "decompose", hash, ".csv");
    write_text(csv_path, csv.str());
    res.artifacts.push_back(csv_path);
    res.summary = {{"experiment", "decompose"},
                   {"config_hash", hash},
                   {"eps", eps},
                   {"sum", dd.sum},
                   {"smoothed_h_half", dd.smoothed_h_half},
                   {"remainder_over_l2", dd.remainder_over_l2}};
    const std::string js = detail::artifact_path(out_dir, "decompose", hash, ".json");
    write_text(js, res.summary.dump(2) + "\n");
    res.artifacts.push_back(js);
    return res;
}

inline RunResult run_scan(const nlohmann::ordered_json& cfg, const std::string& out_dir) {
    RunResult res;
    const std::string hash = config_hash(cfg);
    const SampledField u = detail::load_input(cfg, 1);
    maybe_dump_field(cfg, u, res);
    const KernelSpec kernel =
        detail::kernel_by_name(cfg.value("kernel", "phi"), u.grid().dimension());
    const auto schedule = detail::schedule_from(cfg, "r", 5, 10);
    const ScaleTrace tr = scale_scan(u, ScanFunctional::ScaleLocalizedL2, kernel, schedule);
    const std::string csv_path = detail::artifact_path(out_dir, "scan", hash, ".csv");
    write_text(csv_path, trace_to_csv(tr));
    res.artifacts.push_back(csv_path);
    res.summary = {{"experiment", "scan"}, {"config_hash", hash}};
    res.summary["fit"] = trace_to_json(tr);
    const std::string js = detail::artifact_path(out_dir, "scan", hash, ".json");
    write_text(js, res.summary.dump(2) + "\n");
    res.artifacts.push_back(js);
    return res;
}

inline RunResult run_jump1d(const nlohmann::ordered_json& cfg, const std::string& out_dir) {
    RunResult res;
    const std::string hash = config_hash(cfg);
    const Grid grid(1, 1.0, cfg.value("resolution", std::int64_t(1) << 18));
    const SampledField u = fixtures::three_jumps(grid);
    const KernelSpec phi1 = KernelSpec::phi(1);
    const auto schedule = detail::schedule_from(cfg, "r", 5, 10);
    const ScaleTrace tr = scale_scan(u, ScanFunctional::ScaleLocalizedL2, phi1, schedule);
    const double cf = c_f(phi1);
    PiecewiseConstant1D pc;
    pc.breakpoints = {0.2, 0.45, 0.7};
    pc.values = {0.0, 1.0, -1.0, -0.5};
    const double expected = jump_functional_1d(pc, cf);
    const double rel = std::fabs(tr.limit_estimate - expected) / expected;
    const double tol = cfg.value("rel_tol", 0.03);
    const std::string csv_path = detail::artifact_path(out_dir, "jump1d", hash, ".csv");
    write_text(csv_path, trace_to_csv(tr));
    res.artifacts.push_back(csv_path);
    res.summary = {{"experiment", "jump1d"},   {"config_hash", hash},
                   {"c_f", cf},                {"expected", expected},
                   {"limit", tr.limit_estimate}, {"rel_error", rel},
                   {"pass", rel <= tol}};
    const std::string js = detail::artifact_path(out_dir, "jump1d", hash, ".json");
    write_text(js, res.summary.dump(2) + "\n");
    res.artifacts.push_back(js);
    if (rel > tol) res.exit_code = 1;
    return res;
}

inline RunResult run_fnu(const nlohmann::ordered_json& cfg, const std::string& out_dir) {
    RunResult res;
    const std::string hash = config_hash(cfg);
    const KernelSpec kernel = detail::kernel_by_name(cfg.value("kernel", "phi"), 2);
    const int m = cfg.value("normals", 16);
    std::mt19937_64 rng(cfg.value("seed", 12345));
    std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
    std::ostringstream csv;
    csv << "nu_x,nu_y,F_marginal,F_halfspace\n";
    double worst_rel = 0.0;
    std::vector<std::array<double, 2>> normals;
    for (int i = 0; i < m; ++i) {
        const double th = uni(rng);
        normals.push_back({std::cos(th), std::sin(th)});
    }
    for (auto nu : normals) {
        const double fm = F_via_marginal(kernel, nu);
        const double fh = F_via_halfspace(kernel, nu);
        worst_rel = std::max(worst_rel, std::fabs(fm - fh) / std::max(fm, fh));
        csv << format_double(nu[0]) << "," << format_double(nu[1]) << ","
            << format_double(fm) << "," << format_double(fh) << "\n";
    }
    // Lipschitz audit over consecutive pairs
    const MomentReport moments = moment_report(kernel, Grid(2, 64.0, 2048));
    bool lips_ok = true;
    for (std::size_t i = 0; i + 1 < normals.size(); i += 2) {
        const auto chk = lipschitz_check(kernel, normals[i], normals[i + 1], moments);
        lips_ok = lips_ok && chk.ok;
    }
    const std::string csv_path = detail::artifact_path(out_dir, "fnu", hash, ".csv");
    write_text(csv_path, csv.str());
    res.artifacts.push_back(csv_path);
    res.summary = {{"experiment", "fnu"},
                   {"config_hash", hash},
                   {"route_agreement_worst_rel", worst_rel},
                   {"lipschitz_ok", lips_ok}};
    const std::string js = detail::artifact_path(out_dir, "fnu", hash, ".json");
    write_text(js, res.summary.dump(2) + "\n");
    res.artifacts.push_back(js);
    if (worst_rel > cfg.value("rel_tol", 1e-4) || !lips_ok) res.exit_code = 1;
    return res;
}

inline RunResult run_boundary(const nlohmann::ordered_json& cfg, const std::string& out_dir) {
    RunResult res;
    const std::string hash = config_hash(cfg);
    ShapeSet shape = Box{{0.5, 0.5}, {1.0, 1.0}};
    if (cfg.contains("shape_file")) {
        std::ifstream is(cfg["shape_file"].get<std::string>());
        nlohmann::json sj;
        is >> sj;
        shape = shape_from_json(sj);
    }
    const KernelSpec kernel = detail::kernel_by_name(cfg.value("kernel", "phi"), 2);
    const double bi = boundary_integral(shape, kernel);
    const auto per = perimeter(shape);
    DensityProfile prof(kernel);
    const double f_ref = prof.F({1.0, 0.0});
    res.summary = {{"experiment", "boundary"},
                   {"config_hash", hash},
                   {"boundary_integral", bi},
                   {"perimeter", per.value},
                   {"perimeter_exact", per.exact},
                   {"F_e1", f_ref},
                   {"perimeter_times_F", per.value * f_ref}};
    const std::string js = detail::artifact_path(out_dir, "boundary", hash, ".json");
    write_text(js, res.summary.dump(2) + "\n");
    res.artifacts.push_back(js);
    return res;
}

inline RunResult run_product_check(const nlohmann::ordered_json& cfg,
                                   const std::string& out_dir) {
    RunResult res;
    const std::string hash = config_hash(cfg);
    Intervals e;
    e.period = 1.0;
    e.parts = {{0.0, 0.25}};
    if (cfg.contains("interval")) e.parts = {{cfg["interval"][0], cfg["interval"][1]}};
    const Grid g2(2, 1.0, cfg.value("resolution", 1024));
    std::ostringstream csv;
    csv << "eps,lhs,rhs,ok\n";
    bool all_ok = true;
    for (double eps : detail::schedule_from(cfg, "eps", 5, 9)) {
        const auto pc = product_energy_check(e, eps, g2);
        all_ok = all_ok && pc.ok;
        csv << format_double(eps) << "," << format_double(pc.lhs) << ","
            << format_double(pc.rhs) << "," << (pc.ok ? 1 : 0) << "\n";
    }
    const std::string csv_path = detail::artifact_path(out_dir, "product-check", hash, ".csv");
    write_text(csv_path, csv.str());
    res.artifacts.push_back(csv_path);
    res.summary = {{"experiment", "product-check"}, {"config_hash", hash}, {"pass", all_ok}};
    const std::string js = detail::artifact_path(out_dir, "product-check", hash, ".json");
    write_text(js, res.summary.dump(2) + "\n");
    res.artifacts.push_back(js);
    if (!all_ok) res.exit_code = 1;
    return res;
}

inline nlohmann::ordered_json state_to_json(const cx::CompatibleState& st) {
    nlohmann::ordered_json j;
    j["level"] = st.level;
    j["eps"] = st.eps;
    j["cells"] = st.cells.size();
    j["undecided"] = st.cert.undecided;
    j["undecided_bound"] = st.cert.undecided_bound;
    j["interval_count"] = st.cert.interval_count;
    j["smooth_value"] = st.cert.smooth_value;
    j["smooth_bound"] = st.cert.smooth_bound;
    j["inclusions_ok"] = st.cert.inclusions_ok;
    j["cells_exact"] = st.cert.cells_exact;
    j["cells_matched"] = st.cert.cells_matched;
    j["cells_mismatched"] = st.cert.cells_mismatched;
    j["max_avg_mismatch"] = st.cert.max_avg_mismatch;
    auto compat = nlohmann::ordered_json::array();
    for (const auto& c : st.cert.compat)
        compat.push_back({{"r", c.r}, {"value", c.value}, {"bound", c.bound}});
    j["compatibility"] = compat;
    return j;
}

inline RunResult run_counterexample(const nlohmann::ordered_json& cfg,
                                    const std::string& out_dir) {
    RunResult res;
    const std::string hash = config_hash(cfg);
    const int depth = cfg.value("depth", 3);
    cx::EmbedConfig embed;
    embed.resolution = cfg.value("resolution_cap", std::int64_t(1) << 22);
    std::vector<double> thresholds;
    if (cfg.contains("thresholds"))
        for (double t : cfg["thresholds"]) thresholds.push_back(t);
    try {
        const cx::BuildResult br = cx::build_sequence(depth, thresholds, embed);
        auto stages = nlohmann::ordered_json::array();
        for (const auto& st : br.states) stages.push_back(state_to_json(st));
        res.summary = {{"experiment", "counterexample"},
                       {"config_hash", hash},
                       {"depth", depth},
                       {"feasible", true},
                       {"stages", stages},
                       {"energy_trace", br.energy_trace},
                       {"limit_energy_trace", br.limit_energy_trace}};
        const auto e = cx::limit_set(br.states);
        auto parts = nlohmann::ordered_json::array();
        for (auto& [a, b] : e.parts) parts.push_back({a, b});
        res.summary["limit_set"] = parts;
    } catch (const infeasible_error& err) {
        res.summary = {{"experiment", "counterexample"},
                       {"config_hash", hash},
                       {"depth", depth},
                       {"feasible", false},
                       {"error", err.what()},
                       {"binding_constraint", err.binding}};
        res.exit_code = 1;
    }
    const std::string js = detail::artifact_path(out_dir, "counterexample", hash, ".json");
    write_text(js, res.summary.dump(2) + "\n");
    res.artifacts.push_back(js);
    return res;
}

inline RunResult run_diagnose(const nlohmann::ordered_json& cfg, const std::string& out_dir) {
    RunResult res;
    const std::string hash = config_hash(cfg);
    const SampledField u = detail::load_input(cfg, 2);
    maybe_dump_field(cfg, u, res);
    std::vector<double> deltas;
    if (cfg.contains("scales"))
        for (double d : cfg["scales"]) deltas.push_back(d);
    else
        deltas = detail::schedule_from(cfg, "delta", 4, 6);
    const DiagnosticReport rep = finite_perimeter_verdict(u, deltas);
    std::ostringstream csv;
    csv << "delta,intermediate,census_mass,defect\n";
    for (std::size_t i = 0; i < rep.census_trace.size(); ++i) {
        const auto& c = rep.census_trace[i];
        csv << format_double(c.delta) << "," << c.intermediate << ","
            << format_double(static_cast<double>(c.intermediate) * c.delta) << ","
            << format_double(rep.defect_trace[i].second) << "\n";
    }
    const std::string csv_path = detail::artifact_path(out_dir, "diagnose", hash, ".csv");
    write_text(csv_path, csv.str());
    res.artifacts.push_back(csv_path);
    res.summary = {{"experiment", "diagnose"},
                   {"config_hash", hash},
                   {"verdict", to_string(rep.verdict)},
                   {"growth_factors", rep.growth_factors}};
    const std::string js = detail::artifact_path(out_dir, "diagnose", hash, ".json");
    write_text(js, res.summary.dump(2) + "\n");
    res.artifacts.push_back(js);
    return res;
}

inline RunResult run_kernel_audit(const nlohmann::ordered_json& cfg,
                                  const std::string& out_dir) {
    RunResult res;
    const std::string hash = config_hash(cfg);
    const KernelSpec phi1 = KernelSpec::phi(1);
    const KernelSpec psi1 = KernelSpec::psi(1);
    const Grid line(1, 256.0, std::int64_t(1) << 15);
    const MomentReport mp = moment_report(phi1, line);
    const double cdom = domination_constant();
    // band-domination spot check on a seeded random field
    std::mt19937_64 rng(cfg.value("seed", 7));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Grid g(1, 1.0, 4096);
    std::vector<double> samples(g.size());
    for (auto& v : samples) v = gauss(rng);
    const SpectralField spec = transform(SampledField(g, std::move(samples)));
    bool domination_ok = true;
    for (double r : {0.25, 0.125, 0.0625}) {
        const double band = h12::detail::weighted_plancherel_sum(spec, [&](double a) {
            const double m = psi1.radial(r * a) - psi1.radial(r * a / 2.0);
            return m * m;
        });
        const double dom = cdom * convolved_l2_sq(spec, phi1, r / 2.0);
        domination_ok = domination_ok && band <= dom * (1.0 + 1e-9);
    }
    res.summary = {{"experiment", "kernel-audit"},
                   {"config_hash", hash},
                   {"phi_mass", mp.mass},
                   {"phi_abs_first_moment", mp.abs_first_moment},
                   {"phi_l1", mp.l1},
                   {"phi_multiplier_at_1", phi1.radial(1.0)},
                   {"psi_plateau_check", psi1.radial(0.25) == 1.0 && psi1.radial(2.0) == 0.0},
                   {"domination_constant", cdom},
                   {"band_domination_ok", domination_ok}};
    const std::string js = detail::artifact_path(out_dir, "kernel-audit", hash, ".json");
    write_text(js, res.summary.dump(2) + "\n");
    res.artifacts.push_back(js);
    if (!domination_ok) res.exit_code = 1;
    return res;
}

inline RunResult run(const std::string& name, const nlohmann::ordered_json& cfg,
                     const std::string& out_dir) {
    if (name == "energy") return run_energy(cfg, out_dir);
    if (name == "decompose") return run_decompose(cfg, out_dir);
    if (name == "scan") return run_scan(cfg, out_dir);
    if (name == "jump1d") return run_jump1d(cfg, out_dir);
    if (name == "fnu") return run_fnu(cfg, out_dir);
    if (name == "boundary") return run_boundary(cfg, out_dir);
    if (name == "product-check") return run_product_check(cfg, out_dir);
    if (name == "counterexample") return run_counterexample(cfg, out_dir);
    if (name == "diagnose") return run_diagnose(cfg, out_dir);
    if (name == "kernel-audit") return run_kernel_audit(cfg, out_dir);
    throw h12_error("unknown experiment: " + name);
}

}  // namespace h12::experiments
