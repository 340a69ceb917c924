#include "msopt/optimizer.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <thread>

namespace msopt {

namespace {

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

int geometric(int first, double growth, int k) {
    return static_cast<int>(std::lround(first * std::pow(growth, k - 1)));
}

void append_trajectory(OptimizerState& state, int k, int j) {
    for (int i = 0; i < state.mesh.num_shapes(); ++i)
        state.trajectory.push_back({k, j, i, barycenter(state.mesh.shape_polyline(i))});
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Moves the mesh by -t V, halving t while triangles invert.
DeformResult retract(const TriMesh& mesh, const std::vector<Vec2>& V, double& t, int max_halvings, int& halvings) {
    for (int h = 0;; ++h) {
        DeformResult d = deform(mesh, V, -t);
        if (d.valid()) return d;
        if (h >= max_halvings) throw MeshError("step keeps inverting triangles after " + std::to_string(h) + " halvings");
        t *= 0.5;
        ++halvings;
    }
}

TriMesh maybe_remesh(TriMesh mesh, const Problem& problem, int& remeshes) {
    if (!needs_remesh(mesh, problem.remesh_threshold)) return mesh;
    ++remeshes;
    MeshSpec spec = problem.mesh_spec;
    return remesh(mesh, spec);
}

StiffnessField stiffness_for(const Problem& problem, const TriMesh& mesh) {
    StiffnessField s = solve_stiffness(mesh, problem.stiffness_max, problem.stiffness_min);
    if (!s.within_bounds())
        std::clog << "warning: stiffness field leaves [" << s.mu_min << ", " << s.mu_max << "] (min "
                  << s.values.minCoeff() << ", max " << s.values.maxCoeff() << ")\n";
    return s;
}

}  // namespace

int Schedules::batch_size(int k) const { return geometric(m_first, m_growth, k); }
int Schedules::iterations(int k) const { return geometric(n_first, n_growth, k); }

void Schedules::check() const {
    if (m_first < 1) throw ConfigError("schedules.m_first", "must be at least 1");
    if (n_first < 1) throw ConfigError("schedules.n_first", "must be at least 1");
    if (!(m_growth >= 1.0)) throw ConfigError("schedules.m_growth", "must be at least 1");
    if (!(n_growth >= 1.0)) throw ConfigError("schedules.n_growth", "must be at least 1");
    if (!(alpha >= 0.0 && alpha < 2.0)) throw ConfigError("schedules.alpha", "must lie in [0, 2)");
}

LipschitzFit fit_lipschitz(std::span<const std::pair<double, double>> mu_min_step, double sigma) {
    if (mu_min_step.size() < 2) throw std::invalid_argument("underdetermined fit");
    const double mu0 = mu_min_step.front().first;
    if (std::all_of(mu_min_step.begin(), mu_min_step.end(), [&](const auto& p) { return p.first == mu0; }))
        throw std::invalid_argument("underdetermined fit");
    const double n = static_cast<double>(mu_min_step.size());
    double sx = 0, sy = 0;
    std::vector<double> L;
    for (const auto& [mu, t] : mu_min_step) {
        if (!(t > 0.0)) throw std::invalid_argument("minimal step sizes must be positive");
        L.push_back(2.0 * (1.0 - sigma) / t);
        sx += mu;
        sy += L.back();
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < L.size(); ++i) {
        const double dx = mu_min_step[i].first - mx, dy = L[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LipschitzFit fit;
    fit.L_h = sxy / sxx;
    fit.L_jtilde = my - fit.L_h * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < L.size(); ++i) {
        const double r = L[i] - fit.L(mu_min_step[i].first);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    fit.raw.assign(mu_min_step.begin(), mu_min_step.end());
    return fit;
}

double step_size(const LipschitzFit& fit, double mu, double alpha) { return alpha / fit.L(mu); }

Eigen::VectorXd project_safeguard(const Eigen::VectorXd& lambda, const SafeguardBox& box) {
    return lambda.cwiseMax(box.lower).cwiseMin(box.upper);
}

Eigen::VectorXd multiplier_update(const Eigen::VectorXd& h, const Eigen::VectorXd& w, double mu, Variant variant) {
    if (h.size() != w.size()) throw std::invalid_argument("multiplier update: dimension mismatch");
    if (!(mu > 0.0)) throw std::invalid_argument("multiplier update: penalty must be positive");
    if (variant == Variant::KktStandard) return (w + mu * h).cwiseMax(0.0);
    const Eigen::VectorXd s = h + w / mu;
    return mu * (s - s.cwiseMax(0.0));
}

double penalty_update(double H_new, double H_prev, double mu, int k, double tau, double gamma) {
    return (k == 1 || H_new <= tau * H_prev) ? mu : gamma * mu;
}

double optimality_feasibility(const Eigen::VectorXd& h, const Eigen::VectorXd& lambda, Variant variant) {
    if (h.size() != lambda.size()) throw std::invalid_argument("optimality measure: dimension mismatch");
    if (variant == Variant::KktStandard) return h.cwiseMax(-lambda).norm();
    return (h + (h + lambda).cwiseMax(0.0)).norm();
}

void AlgorithmParams::check() const {
    schedules.check();
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("algorithm.tau", "must lie in (0, 1)");
    if (!(gamma > 1.0)) throw ConfigError("algorithm.gamma", "must be greater than 1");
    if (!(mu1 > 0.0)) throw ConfigError("algorithm.mu1", "must be positive");
    if (!(box.lower < box.upper) || !std::isfinite(box.lower) || !std::isfinite(box.upper))
        throw ConfigError("algorithm.safeguard", "needs finite bounds with lower < upper");
    if (!(lambda1 >= box.lower && lambda1 <= box.upper))
        throw ConfigError("algorithm.lambda1", "must lie in the safeguard box");
    if (max_outer < 1) throw ConfigError("algorithm.outer_iterations", "must be at least 1");
    if (!(lipschitz.L(1.0) > 0.0) || lipschitz.L_jtilde < 0.0 || lipschitz.L_h < 0.0)
        throw ConfigError("algorithm.lipschitz", "constants must be non-negative with a positive sum");
    if (threads < 0) throw ConfigError("algorithm.threads", "must be non-negative");
}

OptimizerState OptimizerState::initial(const Problem& problem, const AlgorithmParams& params) {
    OptimizerState s;
    const int n = 5 * problem.constraints.size();
    s.k = 1;
    s.mu = params.mu1;
    s.lambda = Eigen::VectorXd::Constant(n, params.lambda1);
    s.w = project_safeguard(s.lambda, params.box);
    s.mesh = problem.mesh;
    s.seed = params.seed;
    append_trajectory(s, 1, 0);
    return s;
}

void save_checkpoint(const OptimizerState& state, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["k"] = state.k;
    j["mu"] = state.mu;
    j["lambda"] = to_vector(state.lambda);
    j["w"] = to_vector(state.w);
    j["H_prev"] = state.H_prev;
    j["seed"] = state.seed;
    j["state_solves"] = state.state_solves;
    j["adjoint_solves"] = state.adjoint_solves;
    for (const OuterRecord& r : state.log)
        j["log"].push_back({{"k", r.k},
                            {"N", r.N},
                            {"m", r.m},
                            {"objective", r.objective},
                            {"S", r.S},
                            {"mu", r.mu},
                            {"H", r.H},
                            {"step", r.step},
                            {"lambda", to_vector(r.lambda)},
                            {"remeshes", r.remeshes},
                            {"step_halvings", r.step_halvings}});
    for (const TrajectoryPoint& p : state.trajectory)
        j["trajectory"].push_back({p.k, p.j, p.shape, p.barycenter.x(), p.barycenter.y()});
    save_native(state.mesh, dir / "mesh.txt");
    std::ofstream out(dir / "state.json");
    if (!out) throw Error("cannot write checkpoint in " + dir.string());
    out << j.dump(1) << '\n';
}

OptimizerState load_checkpoint(const std::filesystem::path& dir) {
    std::ifstream in(dir / "state.json");
    if (!in) throw ConfigError("resume", "no checkpoint in " + dir.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("resume", std::string("corrupt checkpoint: ") + e.what());
    }
    OptimizerState s;
    s.k = j.at("k").get<int>();
    s.mu = j.at("mu").get<double>();
    s.lambda = from_vector(j.at("lambda").get<std::vector<double>>());
    s.w = from_vector(j.at("w").get<std::vector<double>>());
    s.H_prev = j.at("H_prev").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.state_solves = j.at("state_solves").get<long long>();
    s.adjoint_solves = j.at("adjoint_solves").get<long long>();
    if (j.contains("log"))
        for (const auto& r : j["log"]) {
            OuterRecord o;
            o.k = r.at("k");
            o.N = r.at("N");
            o.m = r.at("m");
            o.objective = r.at("objective");
            o.S = r.at("S");
            o.mu = r.at("mu");
            o.H = r.at("H");
            o.step = r.at("step");
            o.lambda = from_vector(r.at("lambda").get<std::vector<double>>());
            o.remeshes = r.at("remeshes");
            o.step_halvings = r.at("step_halvings");
            s.log.push_back(std::move(o));
        }
    if (j.contains("trajectory"))
        for (const auto& p : j["trajectory"])
            s.trajectory.push_back({p[0].get<int>(), p[1].get<int>(), p[2].get<int>(),
                                    Vec2{p[3].get<double>(), p[4].get<double>()}});
    s.mesh = load_native(dir / "mesh.txt");
    return s;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    const int nt = std::min(resolve_threads(threads), n);
    if (nt <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

BatchResult evaluate_batch(const Problem& problem, const TriMesh& mesh, std::span<const Sample> samples,
                           const Eigen::VectorXd& w, double mu, Variant variant, int threads, bool with_gradient,
                           bool keep_per_sample) {
    const int m = static_cast<int>(samples.size());
    if (m < 1) throw std::invalid_argument("empty batch");
    const FlowSolver solver(mesh);
    const ConstraintVector h = constraint_vector(mesh.shape_polylines(), problem.constraints);
    const double penalty = augmented_penalty(h, w, mu);
    const Eigen::VectorXd weights = constraint_weights(h, w, mu, variant);

    std::vector<double> objective(m);
    std::vector<DerivativeFunctional> grads(with_gradient ? m : 0);
    parallel_for(m, threads, [&](int l) {
        try {
            const FlowState s = solver.solve_state(samples[l], problem.field, problem.nu, problem.force, problem.solver);
            objective[l] = solver.objective(s, problem.nu);
            if (!with_gradient) return;
            const AdjointState a = solver.solve_adjoint(s, problem.nu);
            grads[l] = assemble_volume_terms(solver, s, a, problem.nu, problem.force);
        } catch (const SolverError& e) {
            throw SolverError("sample " + std::to_string(l + 1) + ": " + e.what(), e.last_residual());
        }
    });

    BatchResult r;
    r.state_solves = m;
    for (int l = 0; l < m; ++l) r.objective += objective[l];
    r.objective /= m;
    r.merit = r.objective + penalty;
    if (with_gradient) {
        r.adjoint_solves = m;
        // Ordered reduction: the sum does not depend on which thread ran which sample.
        const DerivativeFunctional bterms = constraint_terms(mesh, weights);
        r.gradient = DerivativeFunctional::Zero(2 * mesh.num_vertices());
        for (int l = 0; l < m; ++l) {
            grads[l] += bterms;
            r.gradient += grads[l];
        }
        r.gradient /= m;
        if (keep_per_sample) r.per_sample = std::move(grads);
    }
    return r;
}

InnerResult inner_loop(const Problem& problem, const AlgorithmParams& params, OptimizerState& state,
                       const RunObserver& observer) {
    const int k = state.k;
    const int m = params.schedules.batch_size(k);
    const int N = params.schedules.iterations(k);
    InnerResult out;
    out.step = params.fixed_step >= 0.0 ? params.fixed_step : step_size(params.lipschitz, state.mu, params.schedules.alpha);

    for (int j = 1; j <= N; ++j) {
        const std::vector<Sample> batch = draw_batch(state.seed, k, j, m);
        BatchResult res;
        try {
            res = evaluate_batch(problem, state.mesh, batch, state.w, state.mu, params.variant, params.threads, true);
        } catch (const SolverError& e) {
            throw SolverError("outer iteration " + std::to_string(k) + ", inner step " + std::to_string(j) + ", " +
                                  e.what(),
                              e.last_residual());
        }
        state.state_solves += res.state_solves;
        state.adjoint_solves += res.adjoint_solves;
        if (j == N) out.objective = res.objective;

        const DeformationOperator op(state.mesh, stiffness_for(problem, state.mesh));
        const DeformationField field = op.solve(res.gradient);
        out.S += field.h1_norm * field.h1_norm;

        if (out.step > 0.0) {
            double t = out.step;
            DeformResult moved = retract(state.mesh, field.V, t, params.max_step_halvings, out.step_halvings);
            state.mesh = maybe_remesh(std::move(moved.mesh), problem, out.remeshes);
        }
        append_trajectory(state, k, j);
        if (observer.on_inner_step) observer.on_inner_step(state, k, j);
    }
    out.S /= N;
    return out;
}

std::vector<OuterRecord> outer_loop(const Problem& problem, const AlgorithmParams& params, OptimizerState& state,
                                    const RunObserver& observer) {
    params.check();
    problem.constraints.check();
    if (problem.constraints.size() != state.mesh.num_shapes())
        throw ConfigError("constraints", "one constraint entry per shape expected");
    while (state.k <= params.max_outer) {
        const int k = state.k;
        state.w = project_safeguard(state.lambda, params.box);
        const InnerResult inner = inner_loop(problem, params, state, observer);

        const ConstraintVector h = constraint_vector(state.mesh.shape_polylines(), problem.constraints);
        const Eigen::VectorXd lambda_new = multiplier_update(h, state.w, state.mu, params.variant);
        const double H_new = feasibility_H(h, state.w, state.mu, params.variant);
        const double mu_new = penalty_update(H_new, state.H_prev, state.mu, k, params.tau, params.gamma);

        OuterRecord rec;
        rec.k = k;
        rec.N = params.schedules.iterations(k);
        rec.m = params.schedules.batch_size(k);
        rec.objective = inner.objective;
        rec.S = inner.S;
        rec.mu = state.mu;
        rec.H = H_new;
        rec.step = inner.step;
        rec.lambda = lambda_new;
        rec.remeshes = inner.remeshes;
        rec.step_halvings = inner.step_halvings;

        state.lambda = lambda_new;
        state.H_prev = H_new;
        state.mu = mu_new;
        state.k = k + 1;
        state.log.push_back(rec);
        if (observer.on_outer_iteration) observer.on_outer_iteration(state);
        const double violation = h.size() > 0 ? h.maxCoeff() : 0.0;
        if (inner.S <= params.stationarity_tol && violation <= params.feasibility_tol) break;
    }
    return state.log;
}

LipschitzFit estimate_lipschitz(const Problem& problem, const AlgorithmParams& params,
                                const LipschitzEstimationParams& est) {
    if (est.mu.empty()) throw ConfigError("lipschitz.mu", "list of penalty factors is empty");
    if (!(est.beta > 0.0 && est.beta < 1.0)) throw ConfigError("lipschitz.beta", "must lie in (0, 1)");
    if (est.samples < 1 || est.iterations < 1) throw ConfigError("lipschitz", "samples and iterations must be positive");
    std::vector<std::pair<double, double>> raw;
    const Eigen::VectorXd w =
        project_safeguard(Eigen::VectorXd::Constant(5 * problem.constraints.size(), params.lambda1), params.box);
    for (double mu : est.mu) {
        if (!(mu > 0.0)) throw ConfigError("lipschitz.mu", "penalty factors must be positive");
        TriMesh mesh = problem.mesh;
        double t_min = std::numeric_limits<double>::infinity();
        int remeshes = 0;
        for (int j = 1; j <= est.iterations; ++j) {
            const std::vector<Sample> batch = draw_batch(params.seed, 1, j, est.samples);
            const BatchResult res =
                evaluate_batch(problem, mesh, batch, w, mu, params.variant, params.threads, true, true);
            const DeformationOperator op(mesh, stiffness_for(problem, mesh));
            // Average of the per-sample deformation fields.
            std::vector<Vec2> vbar(mesh.num_vertices(), Vec2::Zero());
            for (const DerivativeFunctional& g : res.per_sample) {
                const DeformationField f = op.solve(g);
                for (int v = 0; v < mesh.num_vertices(); ++v) vbar[v] += f.V[v];
            }
            for (Vec2& v : vbar) v /= est.samples;
            const double norm2 = std::pow(op.h1_norm(vbar), 2);

            bool accepted = false;
            double t = est.t0;
            TriMesh next;
            for (int b = 0; b <= est.max_backtracks && !accepted; ++b, t *= est.beta) {
                DeformResult d = deform(mesh, vbar, -t);
                if (!d.valid()) continue;
                double trial = 0.0;
                try {
                    trial = evaluate_batch(problem, d.mesh, batch, w, mu, params.variant, params.threads, false).merit;
                } catch (const SolverError&) {
                    continue;
                }
                if (trial <= res.merit - est.sigma * t * norm2) {
                    accepted = true;
                    next = std::move(d.mesh);
                    break;
                }
            }
            if (!accepted)
                throw SolverError("no step accepted within backtracking budget (mu = " + std::to_string(mu) +
                                  ", step " + std::to_string(j) + ")");
            t_min = std::min(t_min, t);
            mesh = maybe_remesh(std::move(next), problem, remeshes);
        }
        raw.emplace_back(mu, t_min);
    }
    return fit_lipschitz(raw, est.sigma);
}

DeterministicLog deterministic_loop(const Problem& problem, const AlgorithmParams& params,
                                    const DeterministicParams& det,
                                    const std::function<void(const DeterministicRecord&, const TriMesh&)>& on_outer) {
    params.check();
    problem.constraints.check();
    if (!(det.beta > 0.0 && det.beta < 1.0)) throw ConfigError("deterministic.beta", "must lie in (0, 1)");
    const std::vector<Sample> mean_inflow{zero_sample()};
    DeterministicLog log;
    TriMesh mesh = problem.mesh;
    const int n = 5 * problem.constraints.size();
    Eigen::VectorXd lambda = Eigen::VectorXd::Constant(n, params.lambda1);
    double mu = params.mu1;
    double H_prev = 0.0;

    // Optimality measure from the augmented-Lagrangian derivative at the same
    // state: swap the constraint weights for the candidate multipliers.
    auto r_hat = [&](const TriMesh& msh, const BatchResult& res, const DeformationOperator& op,
                     const Eigen::VectorXd& w, double pen, const Eigen::VectorXd& lam) {
        const ConstraintVector h = constraint_vector(msh.shape_polylines(), problem.constraints);
        const DerivativeFunctional dl = res.gradient - constraint_terms(msh, constraint_weights(h, w, pen, params.variant)) +
                                        constraint_terms(msh, lam);
        return op.solve(dl).h1_norm + optimality_feasibility(h, lam, params.variant);
    };

    auto evaluate = [&](const TriMesh& msh, const Eigen::VectorXd& w, double pen) {
        return evaluate_batch(problem, msh, mean_inflow, w, pen, params.variant, params.threads, true);
    };

    {
        const Eigen::VectorXd w = project_safeguard(lambda, params.box);
        const BatchResult res = evaluate(mesh, w, mu);
        const DeformationOperator op(mesh, stiffness_for(problem, mesh));
        log.r_hat_initial = r_hat(mesh, res, op, w, mu, lambda);
    }
    double r_k = log.r_hat_initial;

    for (int k = 1; k <= params.max_outer; ++k) {
        const Eigen::VectorXd w = project_safeguard(lambda, params.box);
        DeterministicRecord rec;
        rec.k = k;
        rec.mu = mu;
        BatchResult res = evaluate(mesh, w, mu);
        rec.accepted_merits.push_back(res.merit);
        double r = r_k;
        double t0_late = std::numeric_limits<double>::infinity();
        int remeshes = 0;
        for (int j = 1; j <= det.max_inner; ++j) {
            const DeformationOperator op(mesh, stiffness_for(problem, mesh));
            const DeformationField field = op.solve(res.gradient);
            const double norm2 = field.h1_norm * field.h1_norm;
            const double t0 = j <= det.warmup_steps ? det.t0 : t0_late;
            bool accepted = false;
            double t = t0, merit = 0.0;
            TriMesh next;
            for (int b = 0; b <= det.max_backtracks; ++b, t *= det.beta) {
                DeformResult d = deform(mesh, field.V, -t);
                if (!d.valid()) continue;
                try {
                    merit = evaluate_batch(problem, d.mesh, mean_inflow, w, mu, params.variant, params.threads, false).merit;
                } catch (const SolverError&) {
                    continue;
                }
                if (merit <= res.merit - det.sigma * t * norm2) {
                    accepted = true;
                    next = std::move(d.mesh);
                    break;
                }
            }
            // No admissible step: stationary up to solver accuracy.
            if (!accepted) break;
            rec.accepted_steps.push_back(t);
            rec.accepted_merits.push_back(merit);
            if (j <= det.warmup_steps) t0_late = std::min(t0_late, t);
            ++rec.inner_iterations;
            mesh = maybe_remesh(std::move(next), problem, remeshes);

            res = evaluate(mesh, w, mu);
            const ConstraintVector h = constraint_vector(mesh.shape_polylines(), problem.constraints);
            const Eigen::VectorXd lam = multiplier_update(h, w, mu, params.variant);
            const DeformationOperator op_new(mesh, stiffness_for(problem, mesh));
            r = r_hat(mesh, res, op_new, w, mu, lam);
            if (r / r_k <= 1.0 / (k * k + 2.0)) {
                rec.ratio_rule_fired = true;
                break;
            }
        }
        const ConstraintVector h = constraint_vector(mesh.shape_polylines(), problem.constraints);
        const Eigen::VectorXd lambda_new = multiplier_update(h, w, mu, params.variant);
        const double H_new = feasibility_H(h, w, mu, params.variant);
        const double mu_new = penalty_update(H_new, H_prev, mu, k, params.tau, params.gamma);
        if (rec.inner_iterations == 0) {
            const DeformationOperator op(mesh, stiffness_for(problem, mesh));
            r = r_hat(mesh, res, op, w, mu, lambda_new);
        }
        rec.objective = res.objective;
        rec.r_hat = r;
        rec.H = H_new;
        rec.lambda = lambda_new;
        log.records.push_back(rec);
        if (on_outer) on_outer(rec, mesh);
        lambda = lambda_new;
        mu = mu_new;
        H_prev = H_new;
        r_k = r;
        if (r <= det.tol) break;
    }
    log.mesh = std::move(mesh);
    return log;
}

void write_run_log(const std::vector<OuterRecord>& log, int num_constraints, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(17) << "k,N_k,m_k,objective_estimate,S_k,mu_k,H_k";
    for (int i = 1; i <= num_constraints; ++i) out << ",lambda_" << i;
    out << '\n';
    for (const OuterRecord& r : log) {
        out << r.k << ',' << r.N << ',' << r.m << ',' << r.objective << ',' << r.S << ',' << r.mu << ',' << r.H;
        for (Eigen::Index i = 0; i < r.lambda.size(); ++i) out << ',' << r.lambda[i];
        out << '\n';
    }
}

void write_trajectory(const std::vector<TrajectoryPoint>& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(17) << "k,j,shape,x,y\n";
    for (const TrajectoryPoint& p : traj)
        out << p.k << ',' << p.j << ',' << p.shape + 1 << ',' << p.barycenter.x() << ',' << p.barycenter.y() << '\n';
}

void write_deterministic_log(const DeterministicLog& log, int num_constraints, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(17) << "k,inner_iterations,objective,r_hat,mu_k,H_k,ratio_rule_fired";
    for (int i = 1; i <= num_constraints; ++i) out << ",lambda_" << i;
    out << '\n';
    for (const DeterministicRecord& r : log.records) {
        out << r.k << ',' << r.inner_iterations << ',' << r.objective << ',' << r.r_hat << ',' << r.mu << ',' << r.H
            << ',' << (r.ratio_rule_fired ? 1 : 0);
        for (Eigen::Index i = 0; i < r.lambda.size(); ++i) out << ',' << r.lambda[i];
        out << '\n';
    }
}

}  // namespace msopt
