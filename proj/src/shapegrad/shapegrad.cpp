#include "msopt/shapegrad.hpp"

#include <algorithm>
#include <cmath>

namespace msopt {

namespace {

using Triplet = Eigen::Triplet<double>;
using SpMat = Eigen::SparseMatrix<double>;

void check_pair(const FlowSolver& solver, const FlowState& state, const AdjointState& adj) {
    const P2Space& sp = solver.space();
    if (state.v.size() != sp.num_velocity_dofs() || state.p.size() != sp.num_vertices() ||
        adj.phi.size() != sp.num_velocity_dofs() || adj.psi.size() != sp.num_vertices())
        throw SolverError("state or adjoint does not belong to this mesh");
}

void zero_outer(const TriMesh& mesh, DerivativeFunctional& d) {
    const std::vector<bool> outer = mesh.outer_boundary_vertices();
    for (int v = 0; v < mesh.num_vertices(); ++v)
        if (outer[v]) d.segment<2>(2 * v).setZero();
}

}  // namespace

double pairing(const DerivativeFunctional& d, std::span<const Vec2> w) {
    if (d.size() != 2 * static_cast<Eigen::Index>(w.size())) throw std::invalid_argument("pairing: size mismatch");
    double s = 0.0;
    for (std::size_t v = 0; v < w.size(); ++v) s += d[2 * v] * w[v].x() + d[2 * v + 1] * w[v].y();
    return s;
}

DerivativeFunctional assemble_volume_terms(const FlowSolver& solver, const FlowState& state,
                                           const AdjointState& adj, double nu, const BodyForce& f) {
    check_pair(solver, state, adj);
    const TriMesh& mesh = solver.mesh();
    const P2Space& sp = solver.space();
    DerivativeFunctional d = DerivativeFunctional::Zero(2 * mesh.num_vertices());
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();

    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const ElementGeometry& g = solver.geometry(t);
        const auto& nodes = sp.element_nodes(t);
        const auto& tri = mesh.triangles[t];

        // Gradient of the P1 interpolant of f when no exact Jacobian is given.
        Eigen::Matrix2d df_p1 = Eigen::Matrix2d::Zero();
        if (!f.is_zero() && !f.jacobian)
            for (int a = 0; a < 3; ++a) df_p1 += f.value(mesh.vertices[tri[a]]) * g.grad_lambda[a].transpose();

        for (int q = 0; q < TriangleQuadrature::size; ++q) {
            const double w = TriangleQuadrature::weights[q] * g.area;
            const auto& L = TriangleQuadrature::points[q];
            Vec2 v = Vec2::Zero(), phi = Vec2::Zero();
            Eigen::Matrix2d G = Eigen::Matrix2d::Zero(), Phi = Eigen::Matrix2d::Zero();
            for (int i = 0; i < 6; ++i) {
                const Vec2 vi = state.velocity(nodes[i]);
                const Vec2 pi{adj.phi[2 * nodes[i]], adj.phi[2 * nodes[i] + 1]};
                v += g.n[q][i] * vi;
                phi += g.n[q][i] * pi;
                G += vi * g.dn[q][i].transpose();
                Phi += pi * g.dn[q][i].transpose();
            }
            double p = 0.0, psi = 0.0;
            for (int j = 0; j < 3; ++j) {
                p += L[j] * state.p[tri[j]];
                psi += L[j] * adj.psi[tri[j]];
            }

            Vec2 fq = Vec2::Zero();
            Vec2 dvec = Vec2::Zero();
            if (!f.is_zero()) {
                fq = f.value(g.x[q]);
                const Eigen::Matrix2d df = f.jacobian ? f.jacobian(g.x[q]) : df_p1;
                dvec = -df.transpose() * phi;
            }

            const double s = nu * (G.cwiseProduct(0.5 * G + Phi)).sum() + (G * v).dot(phi) - p * Phi.trace() -
                             fq.dot(phi) + psi * G.trace();
            const Eigen::Matrix2d C = -nu * G.transpose() * (G + Phi) - nu * Phi.transpose() * G -
                                      (G.transpose() * phi) * v.transpose() + p * Phi.transpose() -
                                      psi * G.transpose() + s * I;

            for (int a = 0; a < 3; ++a) d.segment<2>(2 * tri[a]) += w * (C * g.grad_lambda[a] + L[a] * dvec);
        }
    }
    zero_outer(mesh, d);
    return d;
}

DerivativeFunctional constraint_terms(const TriMesh& mesh, const Eigen::VectorXd& m) {
    const int s = mesh.num_shapes();
    if (m.size() != 5 * s) throw std::invalid_argument("constraint weights must have length 5s");
    DerivativeFunctional d = DerivativeFunctional::Zero(2 * mesh.num_vertices());
    const double gq = 0.5 / std::sqrt(3.0);
    for (int i = 0; i < s; ++i) {
        const auto& loop = mesh.shape_vertex_map[i];
        const Polyline poly = mesh.shape_polyline(i);
        const double vol = volume(poly);
        const Vec2 b = barycenter(poly);
        const Vec2 box{m[s + 2 * i] - m[3 * s + 2 * i], m[s + 2 * i + 1] - m[3 * s + 2 * i + 1]};
        for (std::size_t e = 0; e < loop.size(); ++e) {
            const int ia = loop[e];
            const int ib = loop[(e + 1) % loop.size()];
            const Vec2& xa = mesh.vertices[ia];
            const Vec2& xb = mesh.vertices[ib];
            // Flow-domain normal (pointing into the obstacle) scaled by edge length.
            const Vec2 n = -scaled_normal(xa, xb);
            for (double sg : {0.5 - gq, 0.5 + gq}) {
                const Vec2 x = xa + sg * (xb - xa);
                const double weight = m[i] + (x - b).dot(box) / vol;
                d.segment<2>(2 * ia) += 0.5 * (1.0 - sg) * weight * n;
                d.segment<2>(2 * ib) += 0.5 * sg * weight * n;
            }
        }
    }
    return d;
}

Eigen::VectorXd constraint_weights(const Eigen::VectorXd& h, const Eigen::VectorXd& lambda, double mu,
                                   Variant variant) {
    if (!(mu > 0.0)) throw std::invalid_argument("constraint weights need mu > 0");
    if (h.size() != lambda.size()) throw std::invalid_argument("constraint weights: dimension mismatch");
    const Eigen::VectorXd shifted = h + lambda / mu;
    const Eigen::VectorXd plus = shifted.cwiseMax(0.0);
    return variant == Variant::KktStandard ? Eigen::VectorXd(mu * plus) : Eigen::VectorXd(mu * (shifted - plus));
}

DerivativeFunctional assemble_dLA(const FlowSolver& solver, const FlowState& state, const AdjointState& adj,
                                  const ConstraintSpec& spec, const Eigen::VectorXd& lambda, double mu, double nu,
                                  const BodyForce& f, Variant variant) {
    const ConstraintVector h = constraint_vector(solver.mesh().shape_polylines(), spec);
    return assemble_volume_terms(solver, state, adj, nu, f) +
           constraint_terms(solver.mesh(), constraint_weights(h, lambda, mu, variant));
}

DerivativeFunctional assemble_dL_lagrangian(const FlowSolver& solver, const FlowState& state,
                                            const AdjointState& adj, const ConstraintSpec& spec,
                                            const Eigen::VectorXd& lambda, double nu, const BodyForce& f) {
    if (lambda.size() != 5 * spec.size()) throw std::invalid_argument("multiplier vector must have length 5s");
    return assemble_volume_terms(solver, state, adj, nu, f) + constraint_terms(solver.mesh(), lambda);
}

StiffnessField solve_stiffness(const TriMesh& mesh, double mu_max, double mu_min) {
    const int nv = mesh.num_vertices();
    Eigen::VectorXd fixed = Eigen::VectorXd::Constant(nv, std::nan(""));
    const std::vector<bool> outer = mesh.outer_boundary_vertices();
    for (const auto& loop : mesh.shape_vertex_map)
        for (int v : loop) fixed[v] = mu_max;
    for (int v = 0; v < nv; ++v)
        if (outer[v]) fixed[v] = mu_min;

    std::vector<int> idx(nv, -1);
    int nf = 0;
    for (int v = 0; v < nv; ++v)
        if (std::isnan(fixed[v])) idx[v] = nf++;

    std::vector<Triplet> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
    for (const auto& tri : mesh.triangles) {
        double area = 0.0;
        const Vec2& a = mesh.vertices[tri[0]];
        const Vec2& b = mesh.vertices[tri[1]];
        const Vec2& c = mesh.vertices[tri[2]];
        const double twice = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
        area = 0.5 * twice;
        const std::array<Vec2, 3> gl{Vec2{b.y() - c.y(), c.x() - b.x()} / twice,
                                     Vec2{c.y() - a.y(), a.x() - c.x()} / twice,
                                     Vec2{a.y() - b.y(), b.x() - a.x()} / twice};
        for (int i = 0; i < 3; ++i) {
            const int fi = idx[tri[i]];
            if (fi < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const double k = area * gl[i].dot(gl[j]);
                const int fj = idx[tri[j]];
                if (fj >= 0)
                    trip.emplace_back(fi, fj, k);
                else
                    rhs[fi] -= k * fixed[tri[j]];
            }
        }
    }
    StiffnessField out;
    out.mu_min = mu_min;
    out.mu_max = mu_max;
    out.values = fixed;
    if (nf > 0) {
        SpMat k(nf, nf);
        k.setFromTriplets(trip.begin(), trip.end());
        Eigen::SimplicialLDLT<SpMat> ldlt(k);
        if (ldlt.info() != Eigen::Success) throw SolverError("singular stiffness system (disconnected mesh?)");
        const Eigen::VectorXd x = ldlt.solve(rhs);
        for (int v = 0; v < nv; ++v)
            if (idx[v] >= 0) out.values[v] = x[idx[v]];
    }
    return out;
}

DeformationOperator::DeformationOperator(const TriMesh& mesh, const StiffnessField& stiffness)
    : nv_(mesh.num_vertices()) {
    if (stiffness.values.size() != nv_) throw std::invalid_argument("stiffness field does not match the mesh");
    const std::vector<bool> outer = mesh.outer_boundary_vertices();
    free_index_.assign(2 * nv_, -1);
    int nf = 0;
    for (int v = 0; v < nv_; ++v)
        if (!outer[v])
            for (int c = 0; c < 2; ++c) free_index_[2 * v + c] = nf++;

    std::vector<Triplet> tk, tm, tl;
    for (const auto& tri : mesh.triangles) {
        const Vec2& a = mesh.vertices[tri[0]];
        const Vec2& b = mesh.vertices[tri[1]];
        const Vec2& c = mesh.vertices[tri[2]];
        const double twice = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
        if (!(twice > 0.0)) throw MeshError("deformation operator on an inverted triangle");
        const double area = 0.5 * twice;
        const std::array<Vec2, 3> gl{Vec2{b.y() - c.y(), c.x() - b.x()} / twice,
                                     Vec2{c.y() - a.y(), a.x() - c.x()} / twice,
                                     Vec2{a.y() - b.y(), b.x() - a.x()} / twice};
        const double mu = (stiffness.values[tri[0]] + stiffness.values[tri[1]] + stiffness.values[tri[2]]) / 3.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double gg = gl[i].dot(gl[j]);
                tm.emplace_back(tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0));
                tl.emplace_back(tri[i], tri[j], area * gg);
                for (int ci = 0; ci < 2; ++ci)
                    for (int cj = 0; cj < 2; ++cj) {
                        const double k = mu * area * ((ci == cj ? gg : 0.0) + gl[i][cj] * gl[j][ci]);
                        tk.emplace_back(2 * tri[i] + ci, 2 * tri[j] + cj, k);
                    }
            }
    }
    full_.resize(2 * nv_, 2 * nv_);
    full_.setFromTriplets(tk.begin(), tk.end());
    mass_.resize(nv_, nv_);
    mass_.setFromTriplets(tm.begin(), tm.end());
    laplace_.resize(nv_, nv_);
    laplace_.setFromTriplets(tl.begin(), tl.end());

    std::vector<Triplet> tf;
    for (int k = 0; k < full_.outerSize(); ++k)
        for (SpMat::InnerIterator it(full_, k); it; ++it) {
            const int r = free_index_[it.row()], c = free_index_[it.col()];
            if (r >= 0 && c >= 0) tf.emplace_back(r, c, it.value());
        }
    SpMat kf(nf, nf);
    kf.setFromTriplets(tf.begin(), tf.end());
    if (nf == 0) return;
    ldlt_.compute(kf);
    if (ldlt_.info() != Eigen::Success) throw SolverError("singular deformation system");
}

DeformationField DeformationOperator::solve(const DerivativeFunctional& rhs) const {
    if (rhs.size() != 2 * nv_) throw std::invalid_argument("right-hand side does not match the mesh");
    DeformationField out;
    out.V.assign(nv_, Vec2::Zero());
    const int nf = static_cast<int>(std::count_if(free_index_.begin(), free_index_.end(), [](int i) { return i >= 0; }));
    if (nf == 0) return out;
    Eigen::VectorXd r(nf);
    for (int d = 0; d < 2 * nv_; ++d)
        if (free_index_[d] >= 0) r[free_index_[d]] = rhs[d];
    const Eigen::VectorXd x = ldlt_.solve(r);
    for (int v = 0; v < nv_; ++v)
        for (int c = 0; c < 2; ++c)
            if (free_index_[2 * v + c] >= 0) out.V[v][c] = x[free_index_[2 * v + c]];
    out.h1_norm = h1_norm(out.V);
    return out;
}

double DeformationOperator::energy(std::span<const Vec2> v, std::span<const Vec2> w) const {
    if (static_cast<int>(v.size()) != nv_ || static_cast<int>(w.size()) != nv_)
        throw std::invalid_argument("energy: field size mismatch");
    const Eigen::Map<const Eigen::VectorXd> a(v.data()->data(), 2 * nv_);
    const Eigen::Map<const Eigen::VectorXd> b(w.data()->data(), 2 * nv_);
    return a.dot(full_ * b);
}

double DeformationOperator::h1_norm(std::span<const Vec2> v) const {
    if (static_cast<int>(v.size()) != nv_) throw std::invalid_argument("h1_norm: field size mismatch");
    double s = 0.0;
    for (int c = 0; c < 2; ++c) {
        Eigen::VectorXd comp(nv_);
        for (int i = 0; i < nv_; ++i) comp[i] = v[i][c];
        s += comp.dot(mass_ * comp) + comp.dot(laplace_ * comp);
    }
    return std::sqrt(std::max(0.0, s));
}

DeformationField solve_deformation(const TriMesh& mesh, const DerivativeFunctional& rhs,
                                   const StiffnessField& stiffness) {
    return DeformationOperator(mesh, stiffness).solve(rhs);
}

}  // namespace msopt
