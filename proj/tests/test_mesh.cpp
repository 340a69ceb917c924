#include <doctest.h>

#include "msopt/mesh.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace msopt;

namespace {

Polyline square(Vec2 c, double half) {
    return {c + Vec2{-half, -half}, c + Vec2{half, -half}, c + Vec2{half, half}, c + Vec2{-half, half}};
}

Polyline regular_polygon(Vec2 c, double r, int n, double phase = 0.0) {
    Polyline p;
    for (int k = 0; k < n; ++k) {
        const double th = phase + 2.0 * M_PI * k / n;
        p.push_back(c + r * Vec2{std::cos(th), std::sin(th)});
    }
    return p;
}

double shoelace(const Polyline& p) {
    double a = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2& u = p[i];
        const Vec2& v = p[(i + 1) % p.size()];
        a += u.x() * v.y() - v.x() * u.y();
    }
    return 0.5 * a;
}

double total_area(const TriMesh& m) {
    double a = 0;
    for (int t = 0; t < m.num_triangles(); ++t) a += m.signed_area(t);
    return a;
}

int count_edges(const TriMesh& m) {
    std::set<std::pair<int, int>> e;
    for (const auto& t : m.triangles)
        for (int i = 0; i < 3; ++i) e.insert(std::minmax(t[i], t[(i + 1) % 3]));
    return static_cast<int>(e.size());
}

Polyline subdivide(const Polyline& p, int pieces) {
    Polyline out;
    for (std::size_t k = 0; k < p.size(); ++k)
        for (int j = 0; j < pieces; ++j) out.push_back(p[k] + (p[(k + 1) % p.size()] - p[k]) * (double(j) / pieces));
    return out;
}

std::vector<Polyline> five_triangles(int pieces = 1) {
    const std::vector<Vec2> bary{{-0.5, 5.5}, {4.5, 0.5}, {-5.5, 0.5}, {-4.5, -5}, {2.5, -7}};
    std::vector<Polyline> out;
    for (const Vec2& b : bary) out.push_back(subdivide(regular_polygon(b, 0.8774, 3, M_PI), pieces));
    return out;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("msopt_test_" + name);
}

}  // namespace

TEST_CASE("radius ratio of reference triangles") {
    const double eq = radius_ratio({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2});
    CHECK(eq == doctest::Approx(1.0).epsilon(1e-14));

    // inradius (a+b-c)/2 and circumradius c/2 for the right isosceles triangle
    const double a = 1.0, c = std::sqrt(2.0);
    const double expected = 2.0 * ((a + a - c) / 2.0) / (c / 2.0);
    CHECK(radius_ratio({0, 0}, {1, 0}, {0, 1}) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(0.8284271247).epsilon(1e-9));

    CHECK(radius_ratio({0, 0}, {1, 0}, {2, 1e-15}) < 1e-12);
    CHECK(radius_ratio({0, 0}, {1, 0}, {2, 0}) == 0.0);
}

TEST_CASE("unit square without shapes") {
    MeshSpec spec;
    spec.domain = {0, 1, 0, 1};
    spec.target_edge_length = 1.0;
    const TriMesh m = generate_benchmark(spec.domain, {}, spec);
    CHECK(m.num_triangles() >= 2);
    for (const auto& e : m.boundary_edges) CHECK(e.tag.is_outer());
    CHECK(total_area(m) == doctest::Approx(1.0).epsilon(1e-12));
    validate(m);
}

TEST_CASE("square with a centered square hole") {
    MeshSpec spec;
    spec.domain = {0, 4, 0, 4};
    spec.target_edge_length = 0.5;
    const std::vector<Polyline> shapes{square({2, 2}, 0.5)};
    const TriMesh m = generate_benchmark(spec.domain, shapes, spec);
    validate(m);
    int shape_edges = 0;
    for (const auto& e : m.boundary_edges)
        if (!e.tag.is_outer()) {
            CHECK(e.tag == BoundaryTag::shape_boundary(0));
            ++shape_edges;
        }
    CHECK(shape_edges == 4);
    CHECK(m.num_vertices() - count_edges(m) + m.num_triangles() == 0);
    CHECK(total_area(m) == doctest::Approx(16.0 - 1.0).epsilon(1e-12));
    CHECK(quality(m).min_radius_ratio >= 0.4);
}

TEST_CASE("benchmark mesh with five triangular obstacles") {
    MeshSpec spec;
    spec.target_edge_length = 0.8;
    spec.near_shape_edge_length = 0.15;
    spec.grading = 0.25;
    const auto shapes = five_triangles(10);
    const TriMesh m = generate_benchmark(spec.domain, shapes, spec);
    validate(m);
    CHECK(m.num_triangles() > 1000);
    CHECK(m.num_triangles() < 20000);
    CHECK(m.num_shapes() == 5);
    const MeshQuality q = quality(m);
    CHECK(q.min_radius_ratio >= 0.4);
    CHECK(q.max_radius_ratio <= 1.0);
    CHECK(!needs_remesh(m));

    double holes = 0;
    for (int i = 0; i < 5; ++i) {
        // polylines preserved vertex for vertex
        const Polyline p = m.shape_polyline(i);
        REQUIRE(p.size() == shapes[i].size());
        for (std::size_t k = 0; k < p.size(); ++k) CHECK((p[k] - shapes[i][k]).norm() == 0.0);
        holes += shoelace(shapes[i]);
    }
    CHECK(std::abs(total_area(m) - (600.0 - holes)) <= 1e-10 * 600.0);

    // tags: right edge Neumann, other outer edges Dirichlet
    for (const auto& e : m.boundary_edges) {
        if (!e.tag.is_outer()) continue;
        const Vec2 mid = 0.5 * (m.vertices[e.v[0]] + m.vertices[e.v[1]]);
        if (std::abs(mid.x() - 20.0) < 1e-12)
            CHECK(e.tag == BoundaryTag::neumann());
        else
            CHECK(e.tag == BoundaryTag::dirichlet());
    }
}

TEST_CASE("mesh generation errors") {
    MeshSpec spec;
    const std::vector<Polyline> overlap{square({0, 0}, 1), square({0.5, 0.5}, 1)};
    CHECK_THROWS_AS(generate_benchmark(spec.domain, overlap, spec), MeshError);
    const std::vector<Polyline> touching{square({-9.5, 0}, 0.5)};
    CHECK_THROWS_AS(generate_benchmark(spec.domain, touching, spec), MeshError);
    const std::vector<Polyline> bowtie{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}};
    try {
        generate_benchmark(spec.domain, bowtie, spec);
        FAIL("expected MeshError");
    } catch (const MeshError& e) {
        CHECK(e.shape_index() == 0);
    }
}

TEST_CASE("deform is exactly invertible and flags inversions") {
    MeshSpec spec;
    spec.target_edge_length = 2.0;
    const auto shapes = five_triangles();
    const TriMesh m = generate_benchmark(spec.domain, shapes, spec);
    const auto outer = m.outer_boundary_vertices();
    std::vector<Vec2> field(m.num_vertices(), Vec2::Zero());
    for (int v = 0; v < m.num_vertices(); ++v)
        if (!outer[v]) field[v] = Vec2{std::sin(m.vertices[v].y()), 0.3 * std::cos(m.vertices[v].x())};

    const DeformResult same = deform(m, field, 0.0);
    for (int v = 0; v < m.num_vertices(); ++v) CHECK(same.mesh.vertices[v] == m.vertices[v]);

    const DeformResult fwd = deform(m, field, 1e-3);
    CHECK(fwd.valid());
    std::vector<Vec2> back(field.size());
    for (std::size_t v = 0; v < field.size(); ++v) back[v] = -field[v];
    const DeformResult rev = deform(fwd.mesh, back, 1e-3);
    for (int v = 0; v < m.num_vertices(); ++v) CHECK((rev.mesh.vertices[v] - m.vertices[v]).norm() <= 1e-12);
    for (int v = 0; v < m.num_vertices(); ++v)
        if (outer[v]) CHECK(fwd.mesh.vertices[v] == m.vertices[v]);

    const DeformResult big = deform(m, field, 50.0);
    CHECK(!big.valid());
}

TEST_CASE("remesh preserves shape areas") {
    MeshSpec spec;
    spec.target_edge_length = 1.0;
    const auto shapes = five_triangles();
    TriMesh m = generate_benchmark(spec.domain, shapes, spec);
    // squeeze the interior vertices next to shape 1 to degrade quality
    const auto outer = m.outer_boundary_vertices();
    std::vector<Vec2> field(m.num_vertices(), Vec2::Zero());
    for (int v : m.shape_vertex_map[0]) field[v] = Vec2{0.0, 0.05};
    const TriMesh moved = deform(m, field, 1.0).mesh;
    const TriMesh r = remesh(moved, spec);
    validate(r);
    CHECK(!needs_remesh(r));
    for (int i = 0; i < 5; ++i)
        CHECK(std::abs(shoelace(r.shape_polyline(i)) - shoelace(moved.shape_polyline(i))) <= 1e-12);
}

TEST_CASE("needs_remesh threshold") {
    TriMesh m;
    m.vertices = {{0, 0}, {1, 0}, {0.5, 0.2}};
    m.triangles = {{0, 1, 2}};
    const double q = quality(m).min_radius_ratio;
    CHECK(q < 0.6);
    CHECK(needs_remesh(m, q + 1e-9));
    CHECK(!needs_remesh(m, q - 1e-9));
}

TEST_CASE("MSH round trip and fixtures") {
    MeshSpec spec;
    spec.target_edge_length = 1.5;
    const TriMesh m = generate_benchmark(spec.domain, five_triangles(), spec);
    const auto path = temp_file("roundtrip.msh");
    save_msh(m, path);
    const TriMesh l = load_msh(path);
    REQUIRE(l.num_vertices() == m.num_vertices());
    REQUIRE(l.num_triangles() == m.num_triangles());
    for (int v = 0; v < m.num_vertices(); ++v) CHECK((l.vertices[v] - m.vertices[v]).norm() <= 1e-12);
    CHECK(l.num_shapes() == 5);
    for (int i = 0; i < 5; ++i)
        CHECK(shoelace(l.shape_polyline(i)) == doctest::Approx(shoelace(m.shape_polyline(i))).epsilon(1e-13));
    std::filesystem::remove(path);

    const TriMesh two = load_msh(std::filesystem::path(MSOPT_TEST_DATA) / "two_triangles.msh");
    REQUIRE(two.num_triangles() == 2);
    CHECK(two.triangles[0] == std::array<int, 3>{0, 1, 2});
    CHECK(two.triangles[1] == std::array<int, 3>{0, 2, 3});
    int neumann = 0;
    for (const auto& e : two.boundary_edges) neumann += e.tag == BoundaryTag::neumann();
    CHECK(neumann == 1);

    try {
        load_msh(std::filesystem::path(MSOPT_TEST_DATA) / "untagged.msh");
        FAIL("expected MeshError");
    } catch (const MeshError& e) {
        CHECK(std::string(e.what()).find("untagged boundary") != std::string::npos);
    }
    const auto bad = temp_file("v4.msh");
    std::ofstream(bad) << "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n";
    CHECK_THROWS_AS(load_msh(bad), MeshError);
    std::filesystem::remove(bad);
}

TEST_CASE("native format round trip is exact") {
    MeshSpec spec;
    spec.target_edge_length = 2.0;
    const TriMesh m = generate_benchmark(spec.domain, five_triangles(), spec);
    std::stringstream ss;
    write_native(m, ss);
    const TriMesh l = read_native(ss);
    CHECK(l.vertices == m.vertices);
    CHECK(l.triangles == m.triangles);
    CHECK(l.shape_vertex_map == m.shape_vertex_map);
}

TEST_CASE("uniform refinement keeps area and loops") {
    const TriMesh m = structured_rectangle({0, 1, 0, 1}, 2, 3);
    validate(m);
    const TriMesh r = refine_uniform(m);
    validate(r);
    CHECK(r.num_triangles() == 4 * m.num_triangles());
    CHECK(total_area(r) == doctest::Approx(1.0).epsilon(1e-14));
}
