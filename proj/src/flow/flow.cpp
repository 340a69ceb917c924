#include "msopt/flow.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

namespace msopt {

namespace {

using Triplet = Eigen::Triplet<double>;
using SpMat = Eigen::SparseMatrix<double>;

constexpr double kA1 = 0.445948490915965, kB1 = 0.108103018168070, kW1 = 0.223381589678011;
constexpr double kA2 = 0.091576213509771, kB2 = 0.816847572980459, kW2 = 0.109951743655322;

// Local P2 basis in barycentric coordinates; edge nodes m01, m12, m20.
void p2_basis(const std::array<double, 3>& l, const std::array<Vec2, 3>& gl, std::array<double, 6>& n,
              std::array<Vec2, 6>& dn) {
    for (int i = 0; i < 3; ++i) {
        n[i] = l[i] * (2.0 * l[i] - 1.0);
        dn[i] = (4.0 * l[i] - 1.0) * gl[i];
    }
    constexpr int a[3] = {0, 1, 2};
    constexpr int b[3] = {1, 2, 0};
    for (int e = 0; e < 3; ++e) {
        n[3 + e] = 4.0 * l[a[e]] * l[b[e]];
        dn[3 + e] = 4.0 * (l[a[e]] * gl[b[e]] + l[b[e]] * gl[a[e]]);
    }
}

std::array<Vec2, 3> barycentric_gradients(const Vec2& a, const Vec2& b, const Vec2& c, double& area) {
    const double twice = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    area = 0.5 * twice;
    return {Vec2{b.y() - c.y(), c.x() - b.x()} / twice, Vec2{c.y() - a.y(), a.x() - c.x()} / twice,
            Vec2{a.y() - b.y(), b.x() - a.x()} / twice};
}

// Collapsed (Duffy) Gauss-Legendre rule on the reference triangle, used for
// error norms of smooth exact solutions.
struct CollapsedRule {
    std::vector<std::array<double, 3>> bary;
    std::vector<double> weights;  // sum to one
};

const CollapsedRule& collapsed_rule() {
    static const CollapsedRule rule = [] {
        constexpr int n = 8;
        std::vector<double> x(n), w(n);
        const double pi = std::acos(-1.0);
        for (int i = 0; i < n; ++i) {
            double z = std::cos(pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = z;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (z * p1 - p0) / (z * z - 1.0);
                const double dz = p1 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[i] = 0.5 * (1.0 - z);
            w[i] = 1.0 / ((1.0 - z * z) * dp * dp);  // weight on [0,1]
        }
        CollapsedRule r;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double xi = x[i];
                const double eta = x[j] * (1.0 - x[i]);
                r.bary.push_back({1.0 - xi - eta, xi, eta});
                r.weights.push_back(2.0 * w[i] * w[j] * (1.0 - x[i]));
            }
        return r;
    }();
    return rule;
}

}  // namespace

const std::array<std::array<double, 3>, 6> TriangleQuadrature::points = {{
    {kB1, kA1, kA1},
    {kA1, kB1, kA1},
    {kA1, kA1, kB1},
    {kB2, kA2, kA2},
    {kA2, kB2, kA2},
    {kA2, kA2, kB2},
}};
const std::array<double, 6> TriangleQuadrature::weights = {kW1, kW1, kW1, kW2, kW2, kW2};

P2Space::P2Space(const TriMesh& mesh) : nv_(mesh.num_vertices()) {
    coords_ = mesh.vertices;
    std::map<std::pair<int, int>, int> edge_id;
    elem_.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        std::array<int, 6> e{t[0], t[1], t[2], 0, 0, 0};
        for (int k = 0; k < 3; ++k) {
            const int a = t[k];
            const int b = t[(k + 1) % 3];
            const auto key = std::minmax(a, b);
            auto [it, inserted] = edge_id.emplace(key, static_cast<int>(edges_.size()));
            if (inserted) {
                edges_.push_back({key.first, key.second});
                coords_.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
            }
            e[3 + k] = nv_ + it->second;
        }
        elem_.push_back(e);
    }
    dirichlet_.assign(coords_.size(), std::nullopt);
    auto mark = [&](int n, const BoundaryTag& tag) {
        auto& d = dirichlet_[n];
        if (!d || (tag.kind == BoundaryTag::Kind::Shape && d->kind != BoundaryTag::Kind::Shape)) d = tag;
    };
    for (const BoundaryEdge& be : mesh.boundary_edges) {
        if (!be.tag.is_dirichlet()) {
            has_neumann_ = true;
            continue;
        }
        const auto key = std::minmax(be.v[0], be.v[1]);
        auto it = edge_id.find(key);
        if (it == edge_id.end()) throw MeshError("boundary edge is not an edge of the triangulation");
        mark(be.v[0], be.tag);
        mark(be.v[1], be.tag);
        mark(nv_ + it->second, be.tag);
    }
}

FlowSolver::FlowSolver(TriMesh mesh) : mesh_(std::move(mesh)), space_(mesh_) {
    if (!space_.has_neumann())
        throw SolverError("mesh has no outflow (Neumann) boundary; the pressure would be undetermined");
    geom_.resize(mesh_.triangles.size());
    for (int t = 0; t < mesh_.num_triangles(); ++t) {
        const auto& tri = mesh_.triangles[t];
        ElementGeometry& g = geom_[t];
        const Vec2& a = mesh_.vertices[tri[0]];
        const Vec2& b = mesh_.vertices[tri[1]];
        const Vec2& c = mesh_.vertices[tri[2]];
        g.grad_lambda = barycentric_gradients(a, b, c, g.area);
        if (!(g.area > 0.0)) throw MeshError("triangle " + std::to_string(t) + " has non-positive area");
        for (int q = 0; q < TriangleQuadrature::size; ++q) {
            const auto& l = TriangleQuadrature::points[q];
            p2_basis(l, g.grad_lambda, g.n[q], g.dn[q]);
            g.x[q] = l[0] * a + l[1] * b + l[2] * c;
        }
    }
    free_index_.assign(space_.num_dofs(), -1);
    for (int n = 0; n < space_.num_nodes(); ++n)
        if (!space_.dirichlet_tag(n))
            for (int c = 0; c < 2; ++c) free_index_[space_.velocity_dof(n, c)] = num_free_++;
    for (int v = 0; v < space_.num_vertices(); ++v) free_index_[space_.pressure_dof(v)] = num_free_++;
}

Eigen::VectorXd FlowSolver::interpolate_dirichlet(const DirichletData& g) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(space_.num_dofs());
    for (int n = 0; n < space_.num_nodes(); ++n) {
        const auto& tag = space_.dirichlet_tag(n);
        if (!tag) continue;
        const Vec2 val = g(space_.node(n), *tag);
        x[space_.velocity_dof(n, 0)] = val.x();
        x[space_.velocity_dof(n, 1)] = val.y();
    }
    return x;
}

void FlowSolver::assemble(const Eigen::VectorXd& x, double nu, const BodyForce& f, bool convection, bool jacobian,
                          Eigen::VectorXd& res, std::vector<Triplet>* trip) const {
    res.setZero(space_.num_dofs());
    if (trip) {
        trip->clear();
        trip->reserve(static_cast<std::size_t>(mesh_.num_triangles()) * 15 * 15);
    }
    std::array<int, 15> dof{};
    std::array<double, 15> rloc{};
    Eigen::Matrix<double, 15, 15> kloc;

    for (int t = 0; t < mesh_.num_triangles(); ++t) {
        const ElementGeometry& g = geom_[t];
        const auto& nodes = space_.element_nodes(t);
        for (int i = 0; i < 6; ++i) {
            dof[2 * i] = space_.velocity_dof(nodes[i], 0);
            dof[2 * i + 1] = space_.velocity_dof(nodes[i], 1);
        }
        for (int j = 0; j < 3; ++j) dof[12 + j] = space_.pressure_dof(nodes[j]);

        rloc.fill(0.0);
        if (jacobian) kloc.setZero();

        for (int q = 0; q < TriangleQuadrature::size; ++q) {
            const double w = TriangleQuadrature::weights[q] * g.area;
            const auto& N = g.n[q];
            const auto& dN = g.dn[q];
            const auto& L = TriangleQuadrature::points[q];
            Vec2 v = Vec2::Zero();
            Eigen::Matrix2d G = Eigen::Matrix2d::Zero();  // G(c, d) = d v_c / d x_d
            for (int i = 0; i < 6; ++i) {
                const Vec2 vi{x[dof[2 * i]], x[dof[2 * i + 1]]};
                v += N[i] * vi;
                G += vi * dN[i].transpose();
            }
            double p = 0.0;
            for (int j = 0; j < 3; ++j) p += L[j] * x[dof[12 + j]];
            const double div = G.trace();
            const Vec2 conv = convection ? Vec2(G * v) : Vec2::Zero();
            const Vec2 fq = f.is_zero() ? Vec2::Zero() : f.value(g.x[q]);

            for (int i = 0; i < 6; ++i) {
                const Vec2 gi = nu * (G * dN[i]) + (conv - fq) * N[i] - p * dN[i];
                rloc[2 * i] += w * gi.x();
                rloc[2 * i + 1] += w * gi.y();
            }
            for (int j = 0; j < 3; ++j) rloc[12 + j] += w * L[j] * div;

            if (!jacobian) continue;
            for (int i = 0; i < 6; ++i) {
                for (int k = 0; k < 6; ++k) {
                    const double lap = nu * dN[k].dot(dN[i]);
                    const double adv = convection ? N[i] * v.dot(dN[k]) : 0.0;
                    for (int c = 0; c < 2; ++c) {
                        kloc(2 * i + c, 2 * k + c) += w * (lap + adv);
                        if (convection)
                            for (int e = 0; e < 2; ++e) kloc(2 * i + c, 2 * k + e) += w * N[i] * G(c, e) * N[k];
                    }
                }
                for (int j = 0; j < 3; ++j)
                    for (int c = 0; c < 2; ++c) {
                        kloc(2 * i + c, 12 + j) -= w * L[j] * dN[i][c];
                        kloc(12 + j, 2 * i + c) += w * L[j] * dN[i][c];
                    }
            }
        }

        for (int a = 0; a < 15; ++a) res[dof[a]] += rloc[a];
        if (!jacobian) continue;
        for (int a = 0; a < 15; ++a) {
            const int ra = free_index_[dof[a]];
            if (ra < 0) continue;
            for (int b = 0; b < 15; ++b) {
                const int cb = free_index_[dof[b]];
                // Pressure-pressure block is structurally zero.
                if (cb < 0 || (a >= 12 && b >= 12)) continue;
                trip->emplace_back(ra, cb, kloc(a, b));
            }
        }
    }
}

FlowState FlowSolver::solve_state(const DirichletData& g, double nu, const BodyForce& f,
                                  const SolverSettings& settings) const {
    if (!(nu > 0.0)) throw ConfigError("nu", "viscosity must be positive");
    Eigen::VectorXd x = interpolate_dirichlet(g);
    Eigen::VectorXd res;
    std::vector<Triplet> trip;
    SpMat k(num_free_, num_free_);
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;

    auto free_part = [&](const Eigen::VectorXd& full) {
        Eigen::VectorXd r(num_free_);
        for (int d = 0; d < space_.num_dofs(); ++d)
            if (free_index_[d] >= 0) r[free_index_[d]] = full[d];
        return r;
    };
    auto newton_step = [&](bool convection) {
        assemble(x, nu, f, convection, true, res, &trip);
        k.setFromTriplets(trip.begin(), trip.end());
        if (!analyzed) {
            lu.analyzePattern(k);
            analyzed = true;
        }
        lu.factorize(k);
        if (lu.info() != Eigen::Success) throw SolverError("singular flow system: " + lu.lastErrorMessage());
        const Eigen::VectorXd delta = lu.solve(-free_part(res));
        for (int d = 0; d < space_.num_dofs(); ++d)
            if (free_index_[d] >= 0) x[d] += delta[free_index_[d]];
    };

    // Stokes start: the problem is linear without convection, one step solves it.
    newton_step(false);

    FlowState s;
    for (int it = 0;; ++it) {
        assemble(x, nu, f, true, false, res, nullptr);
        const double r = free_part(res).norm();
        s.residual_history.push_back(r);
        if (!std::isfinite(r)) throw SolverError("Newton iteration produced a non-finite residual", r);
        if (r <= settings.newton_tol) break;
        if (it >= settings.newton_max_iter)
            throw SolverError("Newton did not converge in " + std::to_string(settings.newton_max_iter) +
                                  " iterations (residual " + std::to_string(r) + ")",
                              r);
        newton_step(true);
        ++s.newton_iterations;
    }
    s.v = x.head(space_.num_velocity_dofs());
    s.p = x.tail(space_.num_vertices());
    return s;
}

FlowState FlowSolver::solve_state(const Sample& xi, const FieldParams& params, double nu, const BodyForce& f,
                                  const SolverSettings& settings) const {
    return solve_state([&](const Vec2& x, const BoundaryTag& tag) { return g_eval(x, tag, xi, params); }, nu, f,
                       settings);
}

AdjointState FlowSolver::solve_adjoint(const FlowState& state, double nu, double rhs_scale) const {
    if (state.v.size() != space_.num_velocity_dofs() || state.p.size() != space_.num_vertices())
        throw SolverError("state does not belong to this mesh");
    Eigen::VectorXd x(space_.num_dofs());
    x << state.v, state.p;
    Eigen::VectorXd res;
    std::vector<Triplet> trip;
    assemble(x, nu, BodyForce{}, true, true, res, &trip);
    SpMat k(num_free_, num_free_);
    k.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(k);
    if (lu.info() != Eigen::Success) throw SolverError("singular adjoint system: " + lu.lastErrorMessage());

    // Right-hand side: minus the derivative of the objective, nu * grad v : grad phi~.
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(num_free_);
    for (int t = 0; t < mesh_.num_triangles(); ++t) {
        const ElementGeometry& g = geom_[t];
        const auto& nodes = space_.element_nodes(t);
        for (int q = 0; q < TriangleQuadrature::size; ++q) {
            const double w = TriangleQuadrature::weights[q] * g.area;
            Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
            for (int i = 0; i < 6; ++i) G += state.velocity(nodes[i]) * g.dn[q][i].transpose();
            for (int i = 0; i < 6; ++i) {
                const Vec2 gi = nu * (G * g.dn[q][i]);
                for (int c = 0; c < 2; ++c) {
                    const int fi = free_index_[space_.velocity_dof(nodes[i], c)];
                    if (fi >= 0) rhs[fi] -= rhs_scale * w * gi[c];
                }
            }
        }
    }
    const Eigen::VectorXd y = lu.transpose().solve(rhs);
    AdjointState a;
    a.phi = Eigen::VectorXd::Zero(space_.num_velocity_dofs());
    a.psi = Eigen::VectorXd::Zero(space_.num_vertices());
    for (int d = 0; d < space_.num_velocity_dofs(); ++d)
        if (free_index_[d] >= 0) a.phi[d] = y[free_index_[d]];
    for (int v = 0; v < space_.num_vertices(); ++v) a.psi[v] = y[free_index_[space_.pressure_dof(v)]];
    return a;
}

double FlowSolver::objective(const FlowState& state, double nu) const {
    double j = 0.0;
    for (int t = 0; t < mesh_.num_triangles(); ++t) {
        const ElementGeometry& g = geom_[t];
        const auto& nodes = space_.element_nodes(t);
        for (int q = 0; q < TriangleQuadrature::size; ++q) {
            Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
            for (int i = 0; i < 6; ++i) G += state.velocity(nodes[i]) * g.dn[q][i].transpose();
            j += TriangleQuadrature::weights[q] * g.area * G.squaredNorm();
        }
    }
    return 0.5 * nu * j;
}

Eigen::VectorXd FlowSolver::residual(const FlowState& state, double nu, const BodyForce& f) const {
    Eigen::VectorXd x(space_.num_dofs());
    x << state.v, state.p;
    Eigen::VectorXd res;
    assemble(x, nu, f, true, false, res, nullptr);
    return res;
}

double FlowSolver::weak_residual(const FlowState& state, const AdjointState& adj, double nu,
                                 const BodyForce& f) const {
    Eigen::VectorXd y(space_.num_dofs());
    y << adj.phi, adj.psi;
    return residual(state, nu, f).dot(y);
}

double FlowSolver::divergence_l2(const Eigen::VectorXd& velocity) const {
    double s = 0.0;
    for (int t = 0; t < mesh_.num_triangles(); ++t) {
        const ElementGeometry& g = geom_[t];
        const auto& nodes = space_.element_nodes(t);
        for (int q = 0; q < TriangleQuadrature::size; ++q) {
            double div = 0.0;
            for (int i = 0; i < 6; ++i)
                for (int c = 0; c < 2; ++c) div += velocity[space_.velocity_dof(nodes[i], c)] * g.dn[q][i][c];
            s += TriangleQuadrature::weights[q] * g.area * div * div;
        }
    }
    return std::sqrt(s);
}

Eigen::VectorXd FlowSolver::weak_divergence(const Eigen::VectorXd& velocity) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(space_.num_vertices());
    for (int t = 0; t < mesh_.num_triangles(); ++t) {
        const ElementGeometry& g = geom_[t];
        const auto& nodes = space_.element_nodes(t);
        for (int q = 0; q < TriangleQuadrature::size; ++q) {
            double div = 0.0;
            for (int i = 0; i < 6; ++i)
                for (int c = 0; c < 2; ++c) div += velocity[space_.velocity_dof(nodes[i], c)] * g.dn[q][i][c];
            for (int j = 0; j < 3; ++j)
                out[nodes[j]] += TriangleQuadrature::weights[q] * g.area * TriangleQuadrature::points[q][j] * div;
        }
    }
    return out;
}

double FlowSolver::velocity_l2_error(const FlowState& s, const std::function<Vec2(const Vec2&)>& exact) const {
    const CollapsedRule& rule = collapsed_rule();
    double err = 0.0;
    for (int t = 0; t < mesh_.num_triangles(); ++t) {
        const ElementGeometry& g = geom_[t];
        const auto& tri = mesh_.triangles[t];
        const auto& nodes = space_.element_nodes(t);
        for (std::size_t q = 0; q < rule.bary.size(); ++q) {
            const auto& l = rule.bary[q];
            std::array<double, 6> n;
            std::array<Vec2, 6> dn;
            p2_basis(l, g.grad_lambda, n, dn);
            Vec2 v = Vec2::Zero();
            for (int i = 0; i < 6; ++i) v += n[i] * s.velocity(nodes[i]);
            const Vec2 x = l[0] * mesh_.vertices[tri[0]] + l[1] * mesh_.vertices[tri[1]] + l[2] * mesh_.vertices[tri[2]];
            err += rule.weights[q] * g.area * (v - exact(x)).squaredNorm();
        }
    }
    return std::sqrt(err);
}

double FlowSolver::pressure_l2_error(const FlowState& s, const std::function<double(const Vec2&)>& exact) const {
    const CollapsedRule& rule = collapsed_rule();
    double err = 0.0;
    for (int t = 0; t < mesh_.num_triangles(); ++t) {
        const auto& tri = mesh_.triangles[t];
        for (std::size_t q = 0; q < rule.bary.size(); ++q) {
            const auto& l = rule.bary[q];
            double p = 0.0;
            Vec2 x = Vec2::Zero();
            for (int j = 0; j < 3; ++j) {
                p += l[j] * s.p[tri[j]];
                x += l[j] * mesh_.vertices[tri[j]];
            }
            const double d = p - exact(x);
            err += rule.weights[q] * geom_[t].area * d * d;
        }
    }
    return std::sqrt(err);
}

FlowState solve_state(const TriMesh& mesh, const Sample& xi, double nu, const BodyForce& f,
                      const SolverSettings& settings, const FieldParams& params) {
    return FlowSolver(mesh).solve_state(xi, params, nu, f, settings);
}

AdjointState solve_adjoint(const FlowSolver& solver, const FlowState& state, double nu) {
    return solver.solve_adjoint(state, nu);
}

double objective(const FlowSolver& solver, const FlowState& state, double nu) { return solver.objective(state, nu); }

double augmented_penalty(const Eigen::VectorXd& h, const Eigen::VectorXd& lambda, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("augmented penalty needs mu > 0");
    if (h.size() != lambda.size()) throw std::invalid_argument("augmented penalty: dimension mismatch");
    const Eigen::VectorXd m = (h + lambda / mu).cwiseMax(0.0);
    return 0.5 * mu * m.squaredNorm() - lambda.squaredNorm() / (2.0 * mu);
}

double aug_lagrangian_value(const FlowSolver& solver, const FlowState& state, const AdjointState& adj,
                            const Eigen::VectorXd& h, const Eigen::VectorXd& lambda, double mu, double nu,
                            const BodyForce& f) {
    return solver.objective(state, nu) + solver.weak_residual(state, adj, nu, f) + augmented_penalty(h, lambda, mu);
}

void write_vtk(const FlowSolver& solver, const FlowState& state, const std::filesystem::path& path,
               const std::vector<std::pair<std::string, std::vector<Vec2>>>& extra_vertex_vectors) {
    const P2Space& sp = solver.space();
    const TriMesh& mesh = solver.mesh();
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(12);
    out << "# vtk DataFile Version 3.0\nflow field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << sp.num_nodes() << " double\n";
    for (int n = 0; n < sp.num_nodes(); ++n) out << sp.node(n).x() << ' ' << sp.node(n).y() << " 0\n";
    out << "CELLS " << mesh.num_triangles() << ' ' << 7 * mesh.num_triangles() << "\n";
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        out << 6;
        for (int n : sp.element_nodes(t)) out << ' ' << n;
        out << "\n";
    }
    out << "CELL_TYPES " << mesh.num_triangles() << "\n";
    for (int t = 0; t < mesh.num_triangles(); ++t) out << "22\n";

    auto node_value = [&](int n, const auto& vertex_value) -> std::decay_t<decltype(vertex_value(0))> {
        if (n < sp.num_vertices()) return vertex_value(n);
        const auto& e = sp.edges()[n - sp.num_vertices()];
        return 0.5 * (vertex_value(e[0]) + vertex_value(e[1]));
    };
    out << "POINT_DATA " << sp.num_nodes() << "\n";
    out << "VECTORS v double\n";
    for (int n = 0; n < sp.num_nodes(); ++n) out << state.v[2 * n] << ' ' << state.v[2 * n + 1] << " 0\n";
    out << "SCALARS p double 1\nLOOKUP_TABLE default\n";
    for (int n = 0; n < sp.num_nodes(); ++n) out << node_value(n, [&](int v) { return state.p[v]; }) << "\n";
    out << "SCALARS speed double 1\nLOOKUP_TABLE default\n";
    for (int n = 0; n < sp.num_nodes(); ++n) out << state.velocity(n).norm() << "\n";
    for (const auto& [name, field] : extra_vertex_vectors) {
        if (static_cast<int>(field.size()) != sp.num_vertices()) throw Error("vertex field " + name + " has wrong size");
        out << "VECTORS " << name << " double\n";
        for (int n = 0; n < sp.num_nodes(); ++n) {
            const Vec2 val = node_value(n, [&](int v) { return field[v]; });
            out << val.x() << ' ' << val.y() << " 0\n";
        }
    }
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace msopt
