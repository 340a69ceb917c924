#include "msopt/cli.hpp"

#include <cctype>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#ifndef MSOPT_VERSION
#define MSOPT_VERSION "unknown"
#endif

namespace msopt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void save_shapes(const TriMesh& mesh, const ConstraintSpec& constraints, const fs::path& path) {
    fs::create_directories(path.parent_path());
    save_shape_manifest({mesh.shape_polylines(), constraints}, path);
}

void write_flow_vtk(const Problem& pb, const TriMesh& mesh, const Sample& xi, const fs::path& path) {
    const FlowSolver solver(mesh);
    const FlowState state = solver.solve_state(xi, pb.field, pb.nu, pb.force, pb.solver);
    write_vtk(solver, state, path);
}

}  // namespace

void write_manifest(const RunConfig& config, const std::string& command, const fs::path& out) {
    fs::create_directories(out);
    json j;
    j["command"] = command;
    j["version"] = MSOPT_VERSION;
    j["config_hash"] = config_hash(config);
    j["seed"] = config.seed;
    j["config"] = to_json(config);
    write_json(j, out / "manifest.json");
}

void write_error_record(const fs::path& out, int exit_code, const std::string& kind, const std::string& message,
                        const std::string& field) {
    std::error_code ec;
    fs::create_directories(out, ec);
    json j{{"exit_code", exit_code}, {"kind", kind}, {"message", message}};
    if (!field.empty()) j["field"] = field;
    std::ofstream f(out / "error.json");
    if (f) f << j.dump(2) << '\n';
}

void cmd_mesh(const RunConfig& config, const fs::path& out) {
    const Problem pb = build_problem(config);
    fs::create_directories(out);
    save_msh(pb.mesh, out / "mesh.msh");
    save_native(pb.mesh, out / "mesh.txt");
    save_shapes(pb.mesh, pb.constraints, out / "shapes" / "initial.json");
    const MeshQuality q = quality(pb.mesh);
    int shape_edges = 0;
    for (const BoundaryEdge& e : pb.mesh.boundary_edges) shape_edges += e.tag.is_outer() ? 0 : 1;
    write_json({{"vertices", pb.mesh.num_vertices()},
                {"triangles", pb.mesh.num_triangles()},
                {"boundary_edges", pb.mesh.boundary_edges.size()},
                {"shape_edges", shape_edges},
                {"min_radius_ratio", q.min_radius_ratio}},
               out / "mesh_stats.json");
    std::cout << pb.mesh.num_triangles() << " triangles, " << pb.mesh.num_vertices() << " vertices, "
              << pb.mesh.boundary_edges.size() << " boundary edges, min radius ratio " << q.min_radius_ratio << '\n';
}

double cmd_solve(const RunConfig& config, const Sample& xi, const fs::path& out) {
    const Problem pb = build_problem(config);
    fs::create_directories(out);
    const FlowSolver solver(pb.mesh);
    const FlowState state = solver.solve_state(xi, pb.field, pb.nu, pb.force, pb.solver);
    const double J = solver.objective(state, pb.nu);
    write_vtk(solver, state, out / "solve.vtk");
    write_json({{"J", J}, {"newton_iterations", state.newton_iterations}, {"xi", xi}}, out / "solve.json");
    std::cout << std::setprecision(12) << "J = " << J << '\n';
    return J;
}

std::vector<OuterRecord> cmd_optimize(const RunConfig& config, const fs::path& out, bool resume) {
    const Problem pb = build_problem(config);
    const AlgorithmParams params = algorithm_params(config);
    fs::create_directories(out / "shapes");
    const fs::path ckpt = out / "checkpoint";
    OptimizerState state = resume ? load_checkpoint(ckpt) : OptimizerState::initial(pb, params);
    if (resume && state.seed != params.seed) throw ConfigError("seed", "differs from the checkpoint");
    if (!resume) {
        save_shapes(pb.mesh, pb.constraints, out / "shapes" / "k0.json");
        write_flow_vtk(pb, pb.mesh, zero_sample(), out / "start.vtk");
    }
    const int nc = 5 * pb.constraints.size();
    RunObserver obs;
    obs.on_outer_iteration = [&](const OptimizerState& s) {
        const OuterRecord& r = s.log.back();
        save_shapes(s.mesh, pb.constraints, out / "shapes" / ("k" + std::to_string(r.k) + ".json"));
        write_run_log(s.log, nc, out / "run_log.csv");
        write_trajectory(s.trajectory, out / "trajectory.csv");
        save_checkpoint(s, ckpt);
        std::cout << std::setprecision(6) << "k " << r.k << "  N " << r.N << "  m " << r.m << "  j " << r.objective
                  << "  S " << r.S << "  mu " << r.mu << "  H " << r.H << std::endl;
    };
    outer_loop(pb, params, state, obs);
    write_run_log(state.log, nc, out / "run_log.csv");
    write_trajectory(state.trajectory, out / "trajectory.csv");
    write_flow_vtk(pb, state.mesh, zero_sample(), out / "end.vtk");
    return state.log;
}

DeterministicLog cmd_optimize_deterministic(const RunConfig& config, const fs::path& out) {
    const Problem pb = build_problem(config);
    const AlgorithmParams params = algorithm_params(config);
    fs::create_directories(out / "shapes");
    save_shapes(pb.mesh, pb.constraints, out / "shapes" / "k0.json");
    write_flow_vtk(pb, pb.mesh, zero_sample(), out / "start.vtk");
    const int nc = 5 * pb.constraints.size();
    DeterministicLog partial;
    auto on_outer = [&](const DeterministicRecord& r, const TriMesh& mesh) {
        partial.records.push_back(r);
        save_shapes(mesh, pb.constraints, out / "shapes" / ("k" + std::to_string(r.k) + ".json"));
        write_deterministic_log(partial, nc, out / "deterministic_log.csv");
        std::cout << std::setprecision(6) << "k " << r.k << "  inner " << r.inner_iterations << "  J " << r.objective
                  << "  r " << r.r_hat << "  mu " << r.mu << "  H " << r.H << std::endl;
    };
    DeterministicLog log = deterministic_loop(pb, params, config.deterministic, on_outer);
    write_deterministic_log(log, nc, out / "deterministic_log.csv");
    std::ofstream steps(out / "deterministic_steps.csv");
    steps << std::setprecision(17) << "k,i,merit,step\n";
    for (const DeterministicRecord& r : log.records)
        for (std::size_t i = 0; i < r.accepted_merits.size(); ++i)
            steps << r.k << ',' << i << ',' << r.accepted_merits[i] << ','
                  << (i == 0 ? 0.0 : r.accepted_steps[i - 1]) << '\n';
    write_flow_vtk(pb, log.mesh, zero_sample(), out / "end.vtk");
    return log;
}

LipschitzFit cmd_estimate_lipschitz(const RunConfig& config, const fs::path& out,
                                    const std::optional<fs::path>& from_csv) {
    fs::create_directories(out);
    LipschitzFit fit;
    if (from_csv) {
        std::ifstream in(*from_csv);
        if (!in) throw ConfigError("from_csv", "cannot open " + from_csv->string());
        std::vector<std::pair<double, double>> pts;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
            std::stringstream ss(line);
            double mu = 0.0, t = 0.0;
            char comma = 0;
            if (!(ss >> mu >> comma >> t) || comma != ',')
                throw ConfigError("from_csv", "malformed row '" + line + "'");
            pts.emplace_back(mu, t);
        }
        try {
            fit = fit_lipschitz(pts, config.lipschitz.sigma);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("from_csv", e.what());
        }
    } else {
        const Problem pb = build_problem(config);
        try {
            fit = estimate_lipschitz(pb, algorithm_params(config), config.lipschitz);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("lipschitz.mu", e.what());
        }
    }
    std::ofstream csv(out / "lipschitz_steps.csv");
    csv << std::setprecision(17) << "mu,min_step\n";
    for (const auto& [mu, t] : fit.raw) csv << mu << ',' << t << '\n';
    write_json({{"L_jtilde", fit.L_jtilde}, {"L_h", fit.L_h}, {"r_squared", fit.r_squared}, {"sigma", config.lipschitz.sigma}},
               out / "lipschitz_fit.json");
    std::cout << std::setprecision(6) << "L_jtilde " << fit.L_jtilde << "  L_h " << fit.L_h << "  R^2 " << fit.r_squared
              << '\n';
    return fit;
}

}  // namespace msopt
