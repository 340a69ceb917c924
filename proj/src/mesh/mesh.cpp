#include "msopt/mesh.hpp"

#include "cdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace msopt {

namespace {

double shoelace(const Polyline& p) {
    double a = 0.0;
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& u = p[i];
        const Vec2& v = p[(i + 1) % n];
        a += u.x() * v.y() - v.x() * u.y();
    }
    return 0.5 * a;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double l2 = ab.squaredNorm();
    const double s = l2 > 0.0 ? std::clamp((p - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
    return (a + s * ab - p).norm();
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    using detail::orient2d;
    const double o1 = orient2d(a, b, c);
    const double o2 = orient2d(a, b, d);
    const double o3 = orient2d(c, d, a);
    const double o4 = orient2d(c, d, b);
    if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return true;
    auto on_segment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return std::min(p.x(), q.x()) <= r.x() && r.x() <= std::max(p.x(), q.x()) &&
               std::min(p.y(), q.y()) <= r.y() && r.y() <= std::max(p.y(), q.y());
    };
    return (o1 == 0 && on_segment(a, b, c)) || (o2 == 0 && on_segment(a, b, d)) ||
           (o3 == 0 && on_segment(c, d, a)) || (o4 == 0 && on_segment(c, d, b));
}

bool point_in_polygon(const Vec2& p, const Polyline& poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y()) &&
            p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
            inside = !inside;
    }
    return inside;
}

TriMesh build(const Rectangle& domain, std::span<const Polyline> shapes, const MeshSpec& spec,
              bool enforce_quality) {
    if (!(domain.width() > 0.0 && domain.height() > 0.0)) throw MeshError("empty rectangle");
    if (!(spec.target_edge_length > 0.0)) throw MeshError("target edge length must be positive");
    check_shapes(domain, shapes);

    auto sizing = [&](const Vec2& x) {
        if (spec.near_shape_edge_length <= 0.0 || shapes.empty()) return spec.target_edge_length;
        double d = std::numeric_limits<double>::infinity();
        for (const Polyline& p : shapes)
            for (std::size_t a = 0; a < p.size(); ++a)
                d = std::min(d, point_segment_distance(x, p[a], p[(a + 1) % p.size()]));
        return spec.size_at(d);
    };

    detail::Cdt cdt(domain);

    const std::array<Vec2, 4> corners{Vec2{domain.xmin, domain.ymin}, Vec2{domain.xmax, domain.ymin},
                                      Vec2{domain.xmax, domain.ymax}, Vec2{domain.xmin, domain.ymax}};
    const std::array<BoundaryTag, 4> side_tags{BoundaryTag::dirichlet(), BoundaryTag::neumann(),
                                               BoundaryTag::dirichlet(), BoundaryTag::dirichlet()};
    std::vector<int> outer;
    std::vector<BoundaryTag> outer_tags;
    for (int side = 0; side < 4; ++side) {
        const Vec2& a = corners[side];
        const Vec2& b = corners[(side + 1) % 4];
        double h = spec.target_edge_length;
        for (int k = 0; k <= 32; ++k) h = std::min(h, sizing(a + (b - a) * (k / 32.0)));
        const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / h - 1e-9)));
        for (int k = 0; k < n; ++k) {
            outer.push_back(cdt.add_vertex(a + (b - a) * (static_cast<double>(k) / n)));
            outer_tags.push_back(side_tags[side]);
        }
    }
    cdt.add_chain(outer, outer_tags, true);

    std::vector<int> shape_chains;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        std::vector<int> ids;
        for (const Vec2& x : shapes[i]) {
            try {
                ids.push_back(cdt.add_vertex(x));
            } catch (const MeshError& e) {
                throw MeshError(std::string(e.what()) + " (shape " + std::to_string(i + 1) + ")",
                                static_cast<int>(i));
            }
        }
        std::vector<BoundaryTag> tags(ids.size(), BoundaryTag::shape_boundary(static_cast<int>(i)));
        shape_chains.push_back(cdt.add_chain(ids, tags, spec.split_shape_segments));
    }

    std::vector<bool> interior_left{true};
    interior_left.resize(1 + shapes.size(), false);
    cdt.finalize_constraints(interior_left);

    constexpr double kSizeFactor = 0.62;  // circumradius / edge length of a slightly stretched equilateral
    cdt.refine(sizing, 0.55, kSizeFactor, spec.max_refinement_points);
    cdt.smooth(spec.smoothing_sweeps);
    // Smoothing can expose a few bad triangles again.
    cdt.refine(sizing, 0.45, kSizeFactor, spec.max_refinement_points);

    TriMesh mesh = cdt.extract(shape_chains);
    if (enforce_quality) {
        const MeshQuality q = quality(mesh);
        if (q.min_radius_ratio < 0.4)
            throw MeshError("refinement failure: minimum radius ratio " + std::to_string(q.min_radius_ratio));
    }
    return mesh;
}

}  // namespace

void check_shapes(const Rectangle& domain, std::span<const Polyline> shapes) {
    const int s = static_cast<int>(shapes.size());
    for (int i = 0; i < s; ++i) {
        const Polyline& p = shapes[i];
        const int n = static_cast<int>(p.size());
        if (n < 3) throw MeshError("shape " + std::to_string(i + 1) + " has fewer than 3 vertices", i);
        for (const Vec2& x : p)
            if (!(x.x() > domain.xmin && x.x() < domain.xmax && x.y() > domain.ymin && x.y() < domain.ymax))
                throw MeshError("shape " + std::to_string(i + 1) + " touches the outer boundary", i);
        if (!(shoelace(p) > 0.0))
            throw MeshError("shape " + std::to_string(i + 1) + " is not counter-clockwise with positive area", i);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                const bool adjacent = b == a + 1 || (a == 0 && b == n - 1);
                if (adjacent) {
                    if ((p[a] - p[b]).norm() == 0.0)
                        throw MeshError("shape " + std::to_string(i + 1) + " has a repeated vertex", i);
                    continue;
                }
                if (segments_intersect(p[a], p[(a + 1) % n], p[b], p[(b + 1) % n]))
                    throw MeshError("shape " + std::to_string(i + 1) + " is self-intersecting", i);
            }
    }
    for (int i = 0; i < s; ++i)
        for (int j = i + 1; j < s; ++j) {
            const Polyline& p = shapes[i];
            const Polyline& q = shapes[j];
            bool overlap = point_in_polygon(p[0], q) || point_in_polygon(q[0], p);
            for (std::size_t a = 0; a < p.size() && !overlap; ++a)
                for (std::size_t b = 0; b < q.size() && !overlap; ++b)
                    overlap = segments_intersect(p[a], p[(a + 1) % p.size()], q[b], q[(b + 1) % q.size()]);
            if (overlap)
                throw MeshError("shapes " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " overlap", j);
        }
}

double MeshSpec::size_at(double distance_to_shapes) const {
    if (near_shape_edge_length <= 0.0) return target_edge_length;
    return std::min(target_edge_length, near_shape_edge_length + grading * distance_to_shapes);
}

double TriMesh::signed_area(int t) const {
    const auto& tri = triangles[t];
    return 0.5 * detail::orient2d(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

std::vector<bool> TriMesh::outer_boundary_vertices() const {
    std::vector<bool> out(vertices.size(), false);
    for (const BoundaryEdge& e : boundary_edges)
        if (e.tag.is_outer()) out[e.v[0]] = out[e.v[1]] = true;
    return out;
}

Polyline TriMesh::shape_polyline(int i) const {
    Polyline p;
    p.reserve(shape_vertex_map[i].size());
    for (int v : shape_vertex_map[i]) p.push_back(vertices[v]);
    return p;
}

std::vector<Polyline> TriMesh::shape_polylines() const {
    std::vector<Polyline> out;
    for (int i = 0; i < num_shapes(); ++i) out.push_back(shape_polyline(i));
    return out;
}

double radius_ratio(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double la = (b - c).norm();
    const double lb = (c - a).norm();
    const double lc = (a - b).norm();
    const double area = 0.5 * std::abs(detail::orient2d(a, b, c));
    const double s = 0.5 * (la + lb + lc);
    const double denom = s * la * lb * lc;
    if (!(denom > 0.0)) return 0.0;
    return std::clamp(8.0 * area * area / denom, 0.0, 1.0);
}

MeshQuality quality(const TriMesh& mesh) {
    MeshQuality q{1.0, 0.0};
    if (mesh.triangles.empty()) return MeshQuality{0.0, 0.0};
    for (const auto& t : mesh.triangles) {
        const Vec2& a = mesh.vertices[t[0]];
        const Vec2& b = mesh.vertices[t[1]];
        const Vec2& c = mesh.vertices[t[2]];
        const double r = detail::orient2d(a, b, c) > 0.0 ? radius_ratio(a, b, c) : 0.0;
        q.min_radius_ratio = std::min(q.min_radius_ratio, r);
        q.max_radius_ratio = std::max(q.max_radius_ratio, r);
    }
    return q;
}

TriMesh generate_benchmark(const Rectangle& domain, std::span<const Polyline> shapes, const MeshSpec& spec) {
    return build(domain, shapes, spec, true);
}

TriMesh structured_rectangle(const Rectangle& domain, int nx, int ny) {
    if (nx < 1 || ny < 1) throw MeshError("structured mesh needs at least one cell per direction");
    TriMesh mesh;
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            mesh.vertices.emplace_back(domain.xmin + domain.width() * i / nx, domain.ymin + domain.height() * j / ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    for (int i = 0; i < nx; ++i) {
        mesh.boundary_edges.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::dirichlet()});
        mesh.boundary_edges.push_back({{id(i + 1, ny), id(i, ny)}, BoundaryTag::dirichlet()});
    }
    for (int j = 0; j < ny; ++j) {
        mesh.boundary_edges.push_back({{id(nx, j), id(nx, j + 1)}, BoundaryTag::neumann()});
        mesh.boundary_edges.push_back({{id(0, j + 1), id(0, j)}, BoundaryTag::dirichlet()});
    }
    return mesh;
}

TriMesh refine_uniform(const TriMesh& mesh) {
    TriMesh out;
    out.vertices = mesh.vertices;
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
        const auto k = std::minmax(a, b);
        auto it = mid.find(k);
        if (it != mid.end()) return it->second;
        const int id = static_cast<int>(out.vertices.size());
        out.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
        mid.emplace(k, id);
        return id;
    };
    for (const auto& t : mesh.triangles) {
        const int m01 = midpoint(t[0], t[1]);
        const int m12 = midpoint(t[1], t[2]);
        const int m20 = midpoint(t[2], t[0]);
        out.triangles.push_back({t[0], m01, m20});
        out.triangles.push_back({m01, t[1], m12});
        out.triangles.push_back({m20, m12, t[2]});
        out.triangles.push_back({m01, m12, m20});
    }
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        const int m = midpoint(e.v[0], e.v[1]);
        out.boundary_edges.push_back({{e.v[0], m}, e.tag});
        out.boundary_edges.push_back({{m, e.v[1]}, e.tag});
    }
    for (const auto& loop : mesh.shape_vertex_map) {
        std::vector<int> l;
        for (std::size_t k = 0; k < loop.size(); ++k) {
            l.push_back(loop[k]);
            l.push_back(midpoint(loop[k], loop[(k + 1) % loop.size()]));
        }
        out.shape_vertex_map.push_back(std::move(l));
    }
    return out;
}

DeformResult deform(const TriMesh& mesh, std::span<const Vec2> field, double t) {
    if (field.size() != mesh.vertices.size())
        throw MeshError("deformation field has " + std::to_string(field.size()) + " entries, mesh has " +
                        std::to_string(mesh.vertices.size()) + " vertices");
    DeformResult r{mesh, {}};
    for (std::size_t v = 0; v < field.size(); ++v) r.mesh.vertices[v] = mesh.vertices[v] + t * field[v];
    for (int k = 0; k < r.mesh.num_triangles(); ++k)
        if (!(r.mesh.signed_area(k) > 0.0)) r.inverted.push_back(k);
    return r;
}

bool needs_remesh(const TriMesh& mesh, double threshold) { return quality(mesh).min_radius_ratio < threshold; }

TriMesh remesh(const TriMesh& mesh, const MeshSpec& spec) {
    MeshSpec s = spec;
    s.split_shape_segments = true;
    const std::vector<Polyline> shapes = mesh.shape_polylines();
    return build(spec.domain, shapes, s, false);
}

void validate(const TriMesh& mesh) {
    const int nv = mesh.num_vertices();
    std::map<std::pair<int, int>, int> edge_count;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int v : tri)
            if (v < 0 || v >= nv) throw MeshError("triangle " + std::to_string(t) + " references a missing vertex");
        if (!(mesh.signed_area(t) > 0.0))
            throw MeshError("triangle " + std::to_string(t) + " has non-positive signed area");
        for (int i = 0; i < 3; ++i) ++edge_count[std::minmax(tri[i], tri[(i + 1) % 3])];
    }
    std::map<std::pair<int, int>, int> tagged;
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        const auto k = std::minmax(e.v[0], e.v[1]);
        if (++tagged[k] > 1) throw MeshError("boundary edge carries more than one tag");
        auto it = edge_count.find(k);
        if (it == edge_count.end() || it->second != 1) throw MeshError("tagged edge is not on the boundary");
        if (e.tag.kind == BoundaryTag::Kind::Shape && (e.tag.shape < 0 || e.tag.shape >= mesh.num_shapes()))
            throw MeshError("boundary edge tagged with unknown shape");
    }
    for (const auto& [k, n] : edge_count) {
        if (n > 2) throw MeshError("non-manifold edge");
        if (n == 1 && !tagged.count(k)) throw MeshError("untagged boundary edge");
    }
    for (int i = 0; i < mesh.num_shapes(); ++i) {
        const auto& loop = mesh.shape_vertex_map[i];
        if (loop.size() < 3) throw MeshError("shape loop with fewer than 3 vertices", i);
        for (std::size_t k = 0; k < loop.size(); ++k) {
            const auto key = std::minmax(loop[k], loop[(k + 1) % loop.size()]);
            bool ok = false;
            for (const BoundaryEdge& e : mesh.boundary_edges)
                if (std::minmax(e.v[0], e.v[1]) == key) ok = e.tag == BoundaryTag::shape_boundary(i);
            if (!ok) throw MeshError("shape loop does not follow its tagged edges", i);
        }
        if (!(shoelace(mesh.shape_polyline(i)) > 0.0)) throw MeshError("shape loop is not counter-clockwise", i);
    }
    std::size_t shape_edges = 0;
    for (const BoundaryEdge& e : mesh.boundary_edges)
        if (!e.tag.is_outer()) ++shape_edges;
    std::size_t loop_edges = 0;
    for (const auto& loop : mesh.shape_vertex_map) loop_edges += loop.size();
    if (shape_edges != loop_edges) throw MeshError("shape-tagged edges do not match the shape loops");
}

std::vector<std::vector<int>> chain_shape_loops(const TriMesh& mesh) {
    std::map<int, std::vector<std::pair<int, int>>> by_shape;
    for (const BoundaryEdge& e : mesh.boundary_edges)
        if (e.tag.kind == BoundaryTag::Kind::Shape) by_shape[e.tag.shape].emplace_back(e.v[0], e.v[1]);
    std::vector<std::vector<int>> loops;
    int expected = 0;
    for (auto& [shape, edges] : by_shape) {
        if (shape != expected++) throw MeshError("shape indices are not contiguous", shape);
        std::map<int, std::vector<int>> adj;
        for (const auto& [a, b] : edges) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        for (const auto& [v, nb] : adj)
            if (nb.size() != 2) throw MeshError("shape boundary is not a simple closed loop", shape);
        const int start = adj.begin()->first;
        std::vector<int> loop{start};
        int prev = start;
        int cur = adj[start][0];
        while (cur != start) {
            loop.push_back(cur);
            const auto& nb = adj[cur];
            const int next = nb[0] == prev ? nb[1] : nb[0];
            prev = cur;
            cur = next;
            if (loop.size() > edges.size()) throw MeshError("shape boundary is not a simple closed loop", shape);
        }
        if (loop.size() != edges.size()) throw MeshError("shape boundary has several loops", shape);
        Polyline p;
        for (int v : loop) p.push_back(mesh.vertices[v]);
        if (shoelace(p) < 0.0) std::reverse(loop.begin() + 1, loop.end());
        loops.push_back(std::move(loop));
    }
    return loops;
}

}  // namespace msopt
