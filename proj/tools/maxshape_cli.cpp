#include <maxshape/config.hpp>
#include <maxshape/errors.hpp>
#include <maxshape/io.hpp>
#include <maxshape/optimizer.hpp>
#include <maxshape/verify.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>

using namespace maxshape;

namespace {

std::string snapshot_name(const char* prefix, int iter, const char* ext)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04d.%s", prefix, iter, ext);
    return buf;
}

int optimize(const std::string& config_path, const std::string& cost_override, const std::string& output_override,
             int max_iterations)
{
    ConfigFile cfg = config_path.empty() ? ConfigFile{} : load_config(config_path);
    if (!cost_override.empty()) cfg.cost = cost_kind_from_string(cost_override);
    if (!output_override.empty()) cfg.run.output_dir = output_override;
    if (max_iterations >= 0) cfg.run.max_iterations = max_iterations;
    cfg.run.validate();

    const std::filesystem::path dir = cfg.run.output_dir;
    std::filesystem::create_directories(dir);
    const Problem problem = make_problem(cfg.run.load, cfg.run.target, cfg.run.law);

    auto snapshot = [&](int iter, const ScalarField& u, const ActiveSet* active) {
        write_shape(*u.mesh, active, dir / snapshot_name("shape", iter, "csv"));
        const ScalarField cost(u.mesh, Eigen::Map<const Vector>(nodal_cost(u, problem.cost).data(), u.mesh->num_nodes()));
        write_vtk(*u.mesh, {{"u", &u}, {"cost", &cost}}, {}, dir / snapshot_name("mesh", iter, "vtk"));
    };
    const int every = cfg.run.snapshot_every;
    const RunResult result = run(cfg.run, cfg.cost, [&](const IterationRecord& row, const ScalarField& u, const ActiveSet* active) {
        if (row.iter == 0 || (every > 0 && row.iter % every == 0)) snapshot(row.iter, u, active);
    });
    const auto& last = result.history.rows.back();
    if (!(last.iter == 0 || (every > 0 && last.iter % every == 0)))
        snapshot(last.iter, result.final_state, cfg.cost == CostKind::linfty ? &result.final_active : nullptr);
    write_history(result.history, dir / "history.csv");

    std::cout << "termination=" << result.history.termination << " iterations=" << last.iter
              << " J_inf=" << format_double(last.j_inf) << " J_2=" << format_double(last.j_2)
              << " nodes=" << result.final_mesh->num_nodes() << '\n';
    return 0;
}

int verify(const std::string& suite, const std::string& config_path, const std::string& report_override)
{
    ConfigFile cfg = config_path.empty() ? ConfigFile{} : load_config(config_path);
    std::vector<std::string> suites = suite.empty() ? cfg.verify.suites : std::vector<std::string>{suite};
    std::vector<ReportRow> rows;
    for (const auto& s : suites) {
        auto r = run_verify_suite(s);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    const std::string report = report_override.empty() ? cfg.verify.report : report_override;
    write_report(rows, report);
    bool ok = true;
    for (const auto& r : rows) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.test << ' ' << r.metric << '=' << format_double(r.value) << '\n';
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}

int mesh_info(const std::string& config_path)
{
    const ConfigFile cfg = config_path.empty() ? ConfigFile{} : load_config(config_path);
    const Mesh mesh = make_initial_mesh(cfg.run.domain);
    const MeshQualityReport q = assess_quality(mesh, cfg.run.floors);
    std::cout << "nodes=" << mesh.num_nodes() << '\n'
              << "triangles=" << mesh.num_triangles() << '\n'
              << "boundary_nodes=" << mesh.boundary().size() << '\n'
              << "h_max=" << format_double(mesh.h_max()) << '\n'
              << "area=" << format_double(mesh.area()) << '\n'
              << "min_area=" << format_double(q.min_area) << '\n'
              << "min_angle_deg=" << format_double(q.min_angle * 180.0 / std::numbers::pi) << '\n'
              << "max_aspect=" << format_double(q.max_aspect) << '\n'
              << "boundary_simple=" << (q.boundary_simple ? 1 : 0) << '\n'
              << "is_valid=" << (q.is_valid ? 1 : 0) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Nonsmooth shape optimisation with max-type tracking costs"};
    app.require_subcommand(1);

    std::string config_path, cost, output, suite, report;
    int max_iterations = -1;

    auto* opt = app.add_subcommand("optimize", "run steepest descent and write history and shapes");
    opt->add_option("--config", config_path, "JSON config (see `template`)");
    opt->add_option("--cost", cost, "linfty or l2, overrides the config")->check(CLI::IsMember({"linfty", "l2"}));
    opt->add_option("--output", output, "output directory, overrides the config");
    opt->add_option("--max-iterations", max_iterations, "overrides the config");

    auto* ver = app.add_subcommand("verify", "run numerical self-checks and write a CSV report");
    ver->add_option("--suite", suite, "convergence, taylor, danskin, reciprocity or all");
    ver->add_option("--config", config_path, "JSON config");
    ver->add_option("--report", report, "report path, overrides the config");

    app.add_subcommand("template", "print the default config");

    auto* info = app.add_subcommand("mesh-info", "print the quality report of the initial mesh");
    info->add_option("--config", config_path, "JSON config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: usage: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*opt) return optimize(config_path, cost, output, max_iterations);
        if (*ver) return verify(suite, config_path, report);
        if (*info) return mesh_info(config_path);
        std::cout << config_template();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: runtime: " << e.what() << '\n';
        return 1;
    }
}
