#pragma once

#include "msopt/common.hpp"
#include "msopt/flow.hpp"
#include "msopt/geometry.hpp"
#include "msopt/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include <span>
#include <vector>

namespace msopt {

/// Linear functional on P1 vector fields: two coefficients per mesh vertex,
/// interleaved (x, y). Entries of outer-boundary vertices are zero.
using DerivativeFunctional = Eigen::VectorXd;

/// <functional, W> for a vertex field W.
double pairing(const DerivativeFunctional& d, std::span<const Vec2> w);

/// Volume part shared by all derivative functionals: the shape derivative of
/// J + weak residual at a converged state/adjoint pair.
DerivativeFunctional assemble_volume_terms(const FlowSolver& solver, const FlowState& state,
                                           const AdjointState& adj, double nu, const BodyForce& f = {});

/// Boundary terms sum_i m_i . [d vol-bound ; d lower-box ; d upper-box] for
/// given weights m (length 5s, same layout as the constraint vector).
DerivativeFunctional constraint_terms(const TriMesh& mesh, const Eigen::VectorXd& m);

/// Derivative of the augmented Lagrangian. The constraint weights are
/// mu*max(0, h + lambda/mu) (kkt-standard) or
/// mu*((h + lambda/mu) - max(0, h + lambda/mu)) (paper-verbatim).
DerivativeFunctional assemble_dLA(const FlowSolver& solver, const FlowState& state, const AdjointState& adj,
                                  const ConstraintSpec& spec, const Eigen::VectorXd& lambda, double mu, double nu,
                                  const BodyForce& f, Variant variant);

/// Derivative of the plain Lagrangian J + lambda^T h.
DerivativeFunctional assemble_dL_lagrangian(const FlowSolver& solver, const FlowState& state,
                                            const AdjointState& adj, const ConstraintSpec& spec,
                                            const Eigen::VectorXd& lambda, double nu, const BodyForce& f = {});

/// Weights of the constraint boundary terms in assemble_dLA.
Eigen::VectorXd constraint_weights(const Eigen::VectorXd& h, const Eigen::VectorXd& lambda, double mu,
                                   Variant variant);

/// P1 harmonic interpolation between mu_max on the shapes and mu_min on the
/// outer boundary.
struct StiffnessField {
    Eigen::VectorXd values;
    double mu_min = 10.0;
    double mu_max = 33.0;

    bool within_bounds(double tol = 1e-10) const {
        return values.size() == 0 || (values.minCoeff() >= mu_min - tol && values.maxCoeff() <= mu_max + tol);
    }
};

StiffnessField solve_stiffness(const TriMesh& mesh, double mu_max = 33.0, double mu_min = 10.0);

struct DeformationField {
    std::vector<Vec2> V;  // per vertex, zero on the outer boundary
    double h1_norm = 0.0;
};

/// Factorized elasticity operator a(V, W) = integral of 2 mu ε(V):ε(W) on P1
/// vector fields vanishing on the outer boundary. Reusable for many
/// right-hand sides on one mesh.
class DeformationOperator {
public:
    DeformationOperator(const TriMesh& mesh, const StiffnessField& stiffness);

    DeformationField solve(const DerivativeFunctional& rhs) const;
    double energy(std::span<const Vec2> v, std::span<const Vec2> w) const;
    /// Full H1 norm: sqrt of L2(V)^2 + L2(grad V)^2.
    double h1_norm(std::span<const Vec2> v) const;

private:
    int nv_ = 0;
    std::vector<int> free_index_;  // 2*vertex+c -> free index or -1
    Eigen::SparseMatrix<double> full_;
    Eigen::SparseMatrix<double> mass_;
    Eigen::SparseMatrix<double> laplace_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

DeformationField solve_deformation(const TriMesh& mesh, const DerivativeFunctional& rhs,
                                   const StiffnessField& stiffness);

}  // namespace msopt
