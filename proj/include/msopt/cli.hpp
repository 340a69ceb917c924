#pragma once

#include "msopt/optimizer.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace msopt {

/// Everything a run needs. Serialized as one JSON object whose sections
/// mirror the members below; missing keys keep their defaults.
struct RunConfig {
    Rectangle domain;

    // Shapes: either a manifest file or regular triangles at the barycenters.
    std::string shape_manifest;
    std::vector<Vec2> barycenters{{-0.5, 5.5}, {4.5, 0.5}, {-5.5, 0.5}, {-4.5, -5.0}, {2.5, -7.0}};
    double shape_area = 1.0;

    // Constraints: empty volume_lower means the initial areas.
    std::vector<double> volume_lower;
    Vec2 box_lower_offset{-0.2, -0.3};
    Vec2 box_upper_offset{0.5, 0.4};

    MeshSpec mesh;
    std::string mesh_file;  // .msh or native; replaces the built-in mesher
    double remesh_threshold = 0.4;

    double nu = 0.2;
    Vec2 force{0.0, 0.0};  // constant volume force
    SolverSettings solver;
    double eta = 2.5;

    std::uint64_t seed = 863860;
    AlgorithmParams algorithm;
    double stiffness_max = 33.0;
    double stiffness_min = 10.0;
    LipschitzEstimationParams lipschitz;
    DeterministicParams deterministic;

    std::string output_dir = "out";

    RunConfig();
    /// Throws ConfigError naming the dotted path of the first invalid key.
    void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Throws ConfigError on unknown keys or wrong types.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& config, const std::filesystem::path& path);

/// Applies "a.b.c=value". The value is parsed as JSON and falls back to a
/// plain string.
void apply_override(nlohmann::json& tree, const std::string& assignment);

/// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Initial shapes and their constraint set.
ShapeManifest build_shapes(const RunConfig& config);

/// Mesh plus everything the solvers need.
Problem build_problem(const RunConfig& config);

AlgorithmParams algorithm_params(const RunConfig& config);

/// Named presets "-1", "0", "1" (every coefficient equal) or a CSV file with
/// one row of coefficients.
Sample parse_xi(const std::string& text);

// Command drivers; each returns after writing its artifacts into `out`.
void cmd_mesh(const RunConfig& config, const std::filesystem::path& out);
double cmd_solve(const RunConfig& config, const Sample& xi, const std::filesystem::path& out);
std::vector<OuterRecord> cmd_optimize(const RunConfig& config, const std::filesystem::path& out, bool resume);
DeterministicLog cmd_optimize_deterministic(const RunConfig& config, const std::filesystem::path& out);
LipschitzFit cmd_estimate_lipschitz(const RunConfig& config, const std::filesystem::path& out,
                                    const std::optional<std::filesystem::path>& from_csv);
void write_manifest(const RunConfig& config, const std::string& command, const std::filesystem::path& out);

/// Writes the machine-readable record of a fatal failure.
void write_error_record(const std::filesystem::path& out, int exit_code, const std::string& kind,
                        const std::string& message, const std::string& field = {});

// Plotting. Raster images are deterministic: fixed size, fixed colors, no
// text. Throws Error("no rows") for empty inputs.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

    Image(int w, int h);
    void set(int x, int y, std::array<std::uint8_t, 3> c);
    std::array<std::uint8_t, 3> get(int x, int y) const;
};

void save_png(const Image& img, const std::filesystem::path& path);

struct RunLogRow {
    int k = 0;
    double objective = 0.0;
    double S = 0.0;
};

std::vector<RunLogRow> read_run_log(const std::filesystem::path& path);
std::vector<TrajectoryPoint> read_trajectory(const std::filesystem::path& path);

Image plot_stationarity(const std::vector<RunLogRow>& rows);
Image plot_objective(const std::vector<RunLogRow>& rows);
Image plot_barycenters(const std::vector<TrajectoryPoint>& traj, const ConstraintSpec& boxes);

/// Renders every plot whose inputs exist in `run_dir` into `out`; returns the files written.
std::vector<std::filesystem::path> cmd_plot(const std::filesystem::path& run_dir, const std::filesystem::path& out);

/// FNV-1a over the pixel buffer; used by fixture tests.
std::uint64_t pixel_hash(const Image& img);

}  // namespace msopt
