#pragma once

#include "msopt/common.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace msopt {

using Polyline = std::vector<Vec2>;

struct BoundaryTag {
    enum class Kind : std::uint8_t { OuterDirichlet, OuterNeumann, Shape };

    Kind kind = Kind::OuterDirichlet;
    int shape = -1;  // zero-based shape index when kind == Shape

    static BoundaryTag dirichlet() { return {Kind::OuterDirichlet, -1}; }
    static BoundaryTag neumann() { return {Kind::OuterNeumann, -1}; }
    static BoundaryTag shape_boundary(int i) { return {Kind::Shape, i}; }

    bool is_outer() const { return kind != Kind::Shape; }
    bool is_dirichlet() const { return kind != Kind::OuterNeumann; }
    friend bool operator==(const BoundaryTag&, const BoundaryTag&) = default;
};

struct BoundaryEdge {
    std::array<int, 2> v;
    BoundaryTag tag;
};

struct Rectangle {
    double xmin = -10.0;
    double xmax = 20.0;
    double ymin = -10.0;
    double ymax = 10.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
};

/// Triangulated flow domain: a rectangle minus the obstacle interiors.
///
/// Triangles are counter-clockwise. Each shape loop in `shape_vertex_map` is
/// counter-clockwise when read as the obstacle boundary, so the flow domain
/// lies to its right.
struct TriMesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<std::vector<int>> shape_vertex_map;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_shapes() const { return static_cast<int>(shape_vertex_map.size()); }

    double signed_area(int t) const;

    /// true for vertices on the rectangle (these never move).
    std::vector<bool> outer_boundary_vertices() const;

    Polyline shape_polyline(int i) const;
    std::vector<Polyline> shape_polylines() const;
};

struct MeshQuality {
    double min_radius_ratio = 0.0;
    double max_radius_ratio = 0.0;
};

/// Sizing of the built-in mesher. Away from the shapes the target edge length
/// is `target_edge_length`; near a shape it is `near_shape_edge_length` and
/// grows linearly with distance at rate `grading`. A non-positive near-shape
/// length means a uniform mesh.
struct MeshSpec {
    Rectangle domain;
    double target_edge_length = 1.0;
    double near_shape_edge_length = 0.0;
    double grading = 0.3;
    /// Allow refinement to subdivide shape segments (always collinear).
    bool split_shape_segments = false;
    int max_refinement_points = 200000;
    int smoothing_sweeps = 6;

    double size_at(double distance_to_shapes) const;
};

/// 2*(inradius/circumradius); 1 for equilateral, 0 for degenerate triangles.
double radius_ratio(const Vec2& a, const Vec2& b, const Vec2& c);

MeshQuality quality(const TriMesh& mesh);

/// Throws MeshError (with the shape index) unless every polyline lies strictly
/// inside `domain`, is simple and counter-clockwise, and the polylines are
/// pairwise disjoint.
void check_shapes(const Rectangle& domain, std::span<const Polyline> shapes);

/// Constrained Delaunay triangulation of the rectangle minus the given
/// obstacles, refined to the sizing in `spec`. Left, top and bottom edges are
/// tagged Dirichlet, the right edge Neumann.
TriMesh generate_benchmark(const Rectangle& domain, std::span<const Polyline> shapes,
                           const MeshSpec& spec);

/// Structured triangulation with nx*ny cells split along a diagonal.
TriMesh structured_rectangle(const Rectangle& domain, int nx, int ny);

/// Splits every triangle into four (edge midpoints are added).
TriMesh refine_uniform(const TriMesh& mesh);

struct DeformResult {
    TriMesh mesh;
    std::vector<int> inverted;  // triangles with non-positive area

    bool valid() const { return inverted.empty(); }
};

/// Moves every vertex to x + t * field(x); connectivity is unchanged.
DeformResult deform(const TriMesh& mesh, std::span<const Vec2> field, double t);

bool needs_remesh(const TriMesh& mesh, double threshold = 0.4);

/// Re-triangulates the current polygonal domain at the sizing of `spec`.
TriMesh remesh(const TriMesh& mesh, const MeshSpec& spec);

/// Throws MeshError when a structural invariant is violated.
void validate(const TriMesh& mesh);

// MSH 2.2 ASCII. Physical group 1 = outer Dirichlet, 2 = outer Neumann,
// 10+i = shape i (one-based), 100 = flow domain triangles.
TriMesh load_msh(const std::filesystem::path& path);
void save_msh(const TriMesh& mesh, const std::filesystem::path& path);

// Native plain-text dump, full double precision.
TriMesh load_native(const std::filesystem::path& path);
void save_native(const TriMesh& mesh, const std::filesystem::path& path);
void write_native(const TriMesh& mesh, std::ostream& out);
TriMesh read_native(std::istream& in);

/// Rebuilds shape_vertex_map from Shape-tagged boundary edges, oriented
/// counter-clockwise as obstacle boundaries.
std::vector<std::vector<int>> chain_shape_loops(const TriMesh& mesh);

}  // namespace msopt
