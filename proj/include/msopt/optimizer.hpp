#pragma once

#include "msopt/common.hpp"
#include "msopt/flow.hpp"
#include "msopt/geometry.hpp"
#include "msopt/mesh.hpp"
#include "msopt/randfield.hpp"
#include "msopt/shapegrad.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace msopt {

/// Batch sizes m_k = m_first * m_growth^(k-1) and iteration counts
/// N_k = n_first * n_growth^(k-1), rounded to the nearest integer.
struct Schedules {
    int m_first = 1;
    double m_growth = 2.0;
    int n_first = 8;
    double n_growth = 2.0;
    double alpha = 1.0;

    int batch_size(int k) const;
    int iterations(int k) const;
    void check() const;
};

/// Affine model L(mu) = L_jtilde + mu * L_h of the Lipschitz constant of the
/// augmented Lagrangian gradient.
struct LipschitzFit {
    double L_jtilde = 0.42215;
    double L_h = 0.36036;
    double r_squared = 1.0;
    std::vector<std::pair<double, double>> raw;  // (mu, minimal accepted step)

    double L(double mu) const { return L_jtilde + mu * L_h; }
};

/// Least-squares fit of L = 2(1 - sigma)/t_min against mu. Throws
/// std::invalid_argument("underdetermined fit") with fewer than two distinct mu.
LipschitzFit fit_lipschitz(std::span<const std::pair<double, double>> mu_min_step, double sigma = 1e-4);

/// t = alpha / (L_jtilde + mu L_h).
double step_size(const LipschitzFit& fit, double mu, double alpha = 1.0);

struct SafeguardBox {
    double lower = -100.0;
    double upper = 100.0;
};

Eigen::VectorXd project_safeguard(const Eigen::VectorXd& lambda, const SafeguardBox& box);

///   kkt-standard:   max(0, w + mu h)
///   paper-verbatim: mu (h + w/mu - max(0, h + w/mu)) = mu min(0, h + w/mu)
Eigen::VectorXd multiplier_update(const Eigen::VectorXd& h, const Eigen::VectorXd& w, double mu, Variant variant);

/// mu unchanged when H_new <= tau H_prev or k == 1, otherwise gamma mu.
double penalty_update(double H_new, double H_prev, double mu, int k, double tau = 0.9, double gamma = 2.0);

/// Feasibility part of the deterministic optimality measure:
///   kkt-standard:   ||max(h, -lambda)||
///   paper-verbatim: ||h + max(0, h + lambda)||
double optimality_feasibility(const Eigen::VectorXd& h, const Eigen::VectorXd& lambda, Variant variant);

/// Everything that defines the PDE-constrained problem on the current geometry.
struct Problem {
    TriMesh mesh;
    ConstraintSpec constraints;
    double nu = 0.2;
    BodyForce force;
    FieldParams field;
    SolverSettings solver;
    MeshSpec mesh_spec;  // sizing used when remeshing
    double remesh_threshold = 0.4;
    double stiffness_max = 33.0;
    double stiffness_min = 10.0;
};

struct AlgorithmParams {
    Schedules schedules;
    LipschitzFit lipschitz;
    double tau = 0.9;
    double gamma = 2.0;
    double mu1 = 1.0;
    double lambda1 = 0.0;
    SafeguardBox box;
    Variant variant = Variant::KktStandard;
    int max_outer = 5;
    double stationarity_tol = 0.0;  // stop when S_k <= tol and max(h) <= feasibility_tol
    double feasibility_tol = 0.0;
    std::uint64_t seed = 863860;
    int threads = 0;  // 0: hardware concurrency
    int max_step_halvings = 30;
    /// Overrides t_k when set (t_k = fixed_step for every k).
    double fixed_step = -1.0;

    void check() const;
};

struct OuterRecord {
    int k = 0;
    int N = 0;
    int m = 0;
    double objective = 0.0;  // batch average of J over the last inner step
    double S = 0.0;
    double mu = 0.0;         // penalty used during iteration k
    double H = 0.0;          // feasibility measure after iteration k
    double step = 0.0;
    Eigen::VectorXd lambda;  // multipliers after iteration k
    int remeshes = 0;
    int step_halvings = 0;
};

struct TrajectoryPoint {
    int k = 0;
    int j = 0;  // 0 before the first inner step
    int shape = 0;
    Vec2 barycenter;
};

struct OptimizerState {
    int k = 1;  // next outer iteration
    double mu = 1.0;
    Eigen::VectorXd lambda;
    Eigen::VectorXd w;
    double H_prev = 0.0;
    TriMesh mesh;
    std::uint64_t seed = 0;
    long long state_solves = 0;
    long long adjoint_solves = 0;
    std::vector<OuterRecord> log;
    std::vector<TrajectoryPoint> trajectory;

    static OptimizerState initial(const Problem& problem, const AlgorithmParams& params);
};

void save_checkpoint(const OptimizerState& state, const std::filesystem::path& dir);
OptimizerState load_checkpoint(const std::filesystem::path& dir);

/// Sample average over one batch on one mesh. Samples are evaluated in
/// parallel and reduced in sample order, so the result does not depend on the
/// thread count.
struct BatchResult {
    DerivativeFunctional gradient;  // mean of the per-sample derivative functionals
    std::vector<DerivativeFunctional> per_sample;  // only when requested
    double objective = 0.0;  // mean of J
    double merit = 0.0;      // mean of the augmented Lagrangian
    int state_solves = 0;
    int adjoint_solves = 0;
};

BatchResult evaluate_batch(const Problem& problem, const TriMesh& mesh, std::span<const Sample> samples,
                           const Eigen::VectorXd& w, double mu, Variant variant, int threads,
                           bool with_gradient, bool keep_per_sample = false);

/// Runs fn(i) for i in [0, n) on up to `threads` threads (0: hardware concurrency).
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

struct InnerResult {
    double S = 0.0;
    double objective = 0.0;
    double step = 0.0;
    int remeshes = 0;
    int step_halvings = 0;
};

/// Callbacks for artifact emission; all optional.
struct RunObserver {
    std::function<void(const OptimizerState&, int k, int j)> on_inner_step;
    std::function<void(const OptimizerState&)> on_outer_iteration;
};

/// N_k stochastic gradient steps on the augmented Lagrangian with the state's
/// current penalty and safeguarded multipliers.
InnerResult inner_loop(const Problem& problem, const AlgorithmParams& params, OptimizerState& state,
                       const RunObserver& observer = {});

/// Algorithm driver: continues from `state` until max_outer iterations are
/// logged or the stopping rule holds. Returns the full log.
std::vector<OuterRecord> outer_loop(const Problem& problem, const AlgorithmParams& params, OptimizerState& state,
                                    const RunObserver& observer = {});

struct LipschitzEstimationParams {
    std::vector<double> mu{1, 2, 4, 8, 16, 32, 64};
    int samples = 4;
    int iterations = 8;
    double sigma = 1e-4;
    double beta = 0.9;
    double t0 = 8.0;
    int max_backtracks = 80;
};

/// Armijo-based offline estimate: for every mu, runs inner iterations from the
/// initial mesh and records the smallest accepted step.
LipschitzFit estimate_lipschitz(const Problem& problem, const AlgorithmParams& params,
                                const LipschitzEstimationParams& est);

struct DeterministicParams {
    double sigma = 1e-4;
    double beta = 0.5;
    double t0 = 8.0;
    int warmup_steps = 10;
    int max_inner = 200;
    int max_backtracks = 40;
    double tol = 0.0;  // stop when the optimality measure drops below tol
};

struct DeterministicRecord {
    int k = 0;
    int inner_iterations = 0;
    double objective = 0.0;  // J(u, 0) at the end of the inner loop
    double r_hat = 0.0;
    double mu = 0.0;
    double H = 0.0;
    Eigen::VectorXd lambda;
    std::vector<double> accepted_merits;  // augmented Lagrangian after each accepted step, first entry at start
    std::vector<double> accepted_steps;
    bool ratio_rule_fired = false;
};

struct DeterministicLog {
    double r_hat_initial = 0.0;
    std::vector<DeterministicRecord> records;
    TriMesh mesh;
};

/// Mean-inflow baseline with Armijo steps and the r-hat inner stopping rule.
DeterministicLog deterministic_loop(const Problem& problem, const AlgorithmParams& params,
                                    const DeterministicParams& det,
                                    const std::function<void(const DeterministicRecord&, const TriMesh&)>& on_outer = {});

// CSV writers (header row, full precision).
void write_run_log(const std::vector<OuterRecord>& log, int num_constraints, const std::filesystem::path& path);
void write_trajectory(const std::vector<TrajectoryPoint>& traj, const std::filesystem::path& path);
void write_deterministic_log(const DeterministicLog& log, int num_constraints, const std::filesystem::path& path);

}  // namespace msopt
