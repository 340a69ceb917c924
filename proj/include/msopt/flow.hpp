#pragma once

#include "msopt/common.hpp"
#include "msopt/mesh.hpp"
#include "msopt/randfield.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace msopt {

struct SolverSettings {
    double newton_tol = 1e-10;  // absolute, Euclidean norm over free dofs
    int newton_max_iter = 25;
};

/// Volume force. An empty `value` means f = 0. Without `jacobian` the shape
/// derivative uses the gradient of the P1 interpolant of f.
struct BodyForce {
    std::function<Vec2(const Vec2&)> value;
    std::function<Eigen::Matrix2d(const Vec2&)> jacobian;

    bool is_zero() const { return !value; }
};

/// Velocity prescribed on Dirichlet-tagged boundary points.
using DirichletData = std::function<Vec2(const Vec2& x, const BoundaryTag& tag)>;

/// Degree-4 six-point rule in barycentric coordinates; weights sum to one.
struct TriangleQuadrature {
    static constexpr int size = 6;
    static const std::array<std::array<double, 3>, 6> points;
    static const std::array<double, 6> weights;
};

/// P2 node numbering: vertices first, then one node per edge midpoint.
/// Local order on a triangle: v0, v1, v2, m01, m12, m20.
class P2Space {
public:
    explicit P2Space(const TriMesh& mesh);

    int num_vertices() const { return nv_; }
    int num_nodes() const { return static_cast<int>(coords_.size()); }
    int num_velocity_dofs() const { return 2 * num_nodes(); }
    int num_dofs() const { return num_velocity_dofs() + nv_; }

    int velocity_dof(int node, int c) const { return 2 * node + c; }
    int pressure_dof(int vertex) const { return num_velocity_dofs() + vertex; }

    const std::array<int, 6>& element_nodes(int t) const { return elem_[t]; }
    const Vec2& node(int n) const { return coords_[n]; }
    const std::vector<std::array<int, 2>>& edges() const { return edges_; }

    /// Boundary tag of a node on a Dirichlet part, if any. Corner nodes shared
    /// with the outflow edge count as Dirichlet.
    const std::optional<BoundaryTag>& dirichlet_tag(int n) const { return dirichlet_[n]; }
    bool has_neumann() const { return has_neumann_; }

private:
    int nv_ = 0;
    std::vector<Vec2> coords_;
    std::vector<std::array<int, 6>> elem_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::optional<BoundaryTag>> dirichlet_;
    bool has_neumann_ = false;
};

struct FlowState {
    Eigen::VectorXd v;  // 2 per P2 node, interleaved (x, y)
    Eigen::VectorXd p;  // 1 per vertex
    int newton_iterations = 0;
    std::vector<double> residual_history;  // after the Stokes start, one per Newton step

    Vec2 velocity(int node) const { return {v[2 * node], v[2 * node + 1]}; }
};

struct AdjointState {
    Eigen::VectorXd phi;
    Eigen::VectorXd psi;
};

/// Per-quadrature-point data of one element.
struct ElementGeometry {
    double area = 0.0;
    std::array<Vec2, 3> grad_lambda;                    // gradients of barycentric coordinates
    std::array<std::array<double, 6>, 6> n;             // [q][i] P2 basis values
    std::array<std::array<Vec2, 6>, 6> dn;              // [q][i] P2 basis gradients
    std::array<Vec2, 6> x;                              // [q] physical quadrature points
};

/// Taylor-Hood discretization of the steady Navier-Stokes equations on one
/// mesh. Immutable after construction; all solve methods are const and may
/// run concurrently.
class FlowSolver {
public:
    explicit FlowSolver(TriMesh mesh);

    const TriMesh& mesh() const { return mesh_; }
    const P2Space& space() const { return space_; }
    const ElementGeometry& geometry(int t) const { return geom_[t]; }

    /// Stokes start followed by undamped Newton. Throws SolverError.
    FlowState solve_state(const DirichletData& g, double nu, const BodyForce& f,
                          const SolverSettings& settings = {}) const;
    FlowState solve_state(const Sample& xi, const FieldParams& params, double nu, const BodyForce& f,
                          const SolverSettings& settings = {}) const;

    /// Transposed Newton system at the converged state with the objective
    /// derivative as right-hand side; homogeneous Dirichlet data.
    AdjointState solve_adjoint(const FlowState& state, double nu, double rhs_scale = 1.0) const;

    /// nu/2 * integral of grad v : grad v.
    double objective(const FlowState& state, double nu) const;

    /// Weak-form residual tested with the adjoint pair:
    /// integral of nu grad v : grad phi + ((v.grad) v).phi - p div phi - f.phi + psi div v.
    double weak_residual(const FlowState& state, const AdjointState& adj, double nu, const BodyForce& f) const;

    /// Full residual vector (all dofs) of the state equations.
    Eigen::VectorXd residual(const FlowState& state, double nu, const BodyForce& f) const;

    double divergence_l2(const Eigen::VectorXd& velocity) const;
    /// Per vertex: integral of lambda_v div(velocity). Zero for discrete solutions.
    Eigen::VectorXd weak_divergence(const Eigen::VectorXd& velocity) const;

    /// Interpolates Dirichlet data; dofs without a Dirichlet tag are zero.
    Eigen::VectorXd interpolate_dirichlet(const DirichletData& g) const;
    const std::vector<int>& free_index() const { return free_index_; }
    int num_free() const { return num_free_; }

    double velocity_l2_error(const FlowState& s, const std::function<Vec2(const Vec2&)>& exact) const;
    double pressure_l2_error(const FlowState& s, const std::function<double(const Vec2&)>& exact) const;

private:
    void assemble(const Eigen::VectorXd& x, double nu, const BodyForce& f, bool convection, bool jacobian,
                  Eigen::VectorXd& res, std::vector<Eigen::Triplet<double>>* trip) const;

    TriMesh mesh_;
    P2Space space_;
    std::vector<ElementGeometry> geom_;
    std::vector<int> free_index_;  // dof -> free index or -1
    int num_free_ = 0;
};

// Convenience wrappers matching the single-solve workflow.
FlowState solve_state(const TriMesh& mesh, const Sample& xi, double nu, const BodyForce& f = {},
                      const SolverSettings& settings = {}, const FieldParams& params = {});
AdjointState solve_adjoint(const FlowSolver& solver, const FlowState& state, double nu);
double objective(const FlowSolver& solver, const FlowState& state, double nu);

/// (mu/2) ||max(0, h + lambda/mu)||^2 - ||lambda||^2 / (2 mu).
double augmented_penalty(const Eigen::VectorXd& h, const Eigen::VectorXd& lambda, double mu);

/// J + weak residual + augmented penalty.
double aug_lagrangian_value(const FlowSolver& solver, const FlowState& state, const AdjointState& adj,
                            const Eigen::VectorXd& h, const Eigen::VectorXd& lambda, double mu, double nu,
                            const BodyForce& f = {});

/// Legacy ASCII VTK with quadratic triangles; point data v, p (linear
/// interpolation on edge nodes) and |v|. Extra point-data vectors on the
/// mesh vertices may be appended (edge nodes get the midpoint average).
void write_vtk(const FlowSolver& solver, const FlowState& state, const std::filesystem::path& path,
               const std::vector<std::pair<std::string, std::vector<Vec2>>>& extra_vertex_vectors = {});

}  // namespace msopt
