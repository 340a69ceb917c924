#include <doctest.h>

#include "msopt/geometry.hpp"

#include <cmath>
#include <filesystem>
#include <random>

using namespace msopt;

namespace {

double shoelace(const Polyline& p) {
    double a = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2& u = p[i];
        const Vec2& v = p[(i + 1) % p.size()];
        a += u.x() * v.y() - v.x() * u.y();
    }
    return 0.5 * a;
}

// Fan triangulation centroid; valid for star-shaped polygons about p[0] and,
// with signed areas, for any simple polygon.
Vec2 fan_centroid(const Polyline& p) {
    Vec2 m = Vec2::Zero();
    double area = 0;
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        const double a = 0.5 * ((p[i] - p[0]).x() * (p[i + 1] - p[0]).y() - (p[i] - p[0]).y() * (p[i + 1] - p[0]).x());
        m += a * (p[0] + p[i] + p[i + 1]) / 3.0;
        area += a;
    }
    return m / area;
}

// Star-shaped random polygon around c with n vertices.
Polyline random_polygon(std::mt19937_64& gen, Vec2 c, int n) {
    std::uniform_real_distribution<double> r(0.5, 2.0);
    Polyline p;
    for (int k = 0; k < n; ++k) {
        const double th = 2 * M_PI * k / n;
        p.push_back(c + r(gen) * Vec2{std::cos(th), std::sin(th)});
    }
    return p;
}

}  // namespace

TEST_CASE("volume of simple polygons") {
    CHECK(volume({{0, 0}, {1, 0}, {1, 1}, {0, 1}}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(volume({{0, 0}, {1, 0}, {0, 1}}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(volume({{0, 0}, {1, 0}}), MeshError);

    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Polyline p = random_polygon(gen, {3.0, -2.0}, 20);
        CHECK(std::abs(volume(p) - shoelace(p)) <= 1e-13 * std::abs(shoelace(p)));
    }
}

TEST_CASE("barycenter matches centroid oracle") {
    const Vec2 b = barycenter({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}});
    CHECK(std::abs(b.x()) < 1e-15);
    CHECK(std::abs(b.y()) < 1e-15);
    const Vec2 t = barycenter({{0, 0}, {1, 0}, {0, 1}});
    CHECK(t.x() == doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(t.y() == doctest::Approx(1.0 / 3).epsilon(1e-14));

    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Polyline p = random_polygon(gen, {-4.0, 6.0}, 3 + trial % 30);
        const Vec2 b = barycenter(p);
        CHECK((b - fan_centroid(p)).norm() <= 1e-12);
        // translation property
        const Vec2 d{0.37, -1.25};
        Polyline q = p;
        for (Vec2& x : q) x += d;
        CHECK((barycenter(q) - (b + d)).norm() <= 1e-12);
        CHECK(std::abs(volume(q) - volume(p)) <= 1e-12);
    }
    CHECK_THROWS_AS(barycenter({{0, 0}, {0, 1}, {1, 0}}), MeshError);
}

TEST_CASE("constraint vector layout") {
    const std::vector<Vec2> centers{{-0.5, 5.5}, {4.5, 0.5}};
    ShapeSet shapes = initial_triangles(centers, 1.0, 0.3);
    CHECK(volume(shapes[0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((barycenter(shapes[1]) - centers[1]).norm() < 1e-12);

    const ConstraintSpec spec = constraints_around(shapes, {-0.2, -0.3}, {0.5, 0.4});
    ConstraintVector h = constraint_vector(shapes, spec);
    REQUIRE(h.size() == 10);
    CHECK(std::abs(h[0]) < 1e-15);
    CHECK(std::abs(h[1]) < 1e-15);
    CHECK(h.segment(2, 8).maxCoeff() < 0.0);
    CHECK(h[2] == doctest::Approx(-0.2));
    CHECK(h[3] == doctest::Approx(-0.3));
    CHECK(h[6] == doctest::Approx(-0.5));
    CHECK(h[7] == doctest::Approx(-0.4));
    CHECK(feasibility_H(h, Eigen::VectorXd::Zero(10), 1.0, Variant::KktStandard) <= 1e-15);

    // shrink shape 2 by 10 % in area about its barycenter
    const Vec2 c = barycenter(shapes[1]);
    for (Vec2& x : shapes[1]) x = c + std::sqrt(0.9) * (x - c);
    h = constraint_vector(shapes, spec);
    CHECK(h[1] == doctest::Approx(0.1 * spec.volume_lower[1]).epsilon(1e-12));

    const ShapeSet one = initial_triangles(std::vector<Vec2>{{0, 0}}, 2.0, 1.0);
    CHECK(constraint_vector(one, constraints_around(one, {-1, -1}, {1, 1})).size() == 5);
}

TEST_CASE("feasibility measure variants") {
    using V = Eigen::VectorXd;
    CHECK(feasibility_H(V::Zero(3), V::Zero(3), 1.0, Variant::KktStandard) == 0.0);
    CHECK(feasibility_H(V::Zero(3), V::Zero(3), 1.0, Variant::PaperVerbatim) == 0.0);
    CHECK(feasibility_H(V::Constant(1, -1.0), V::Zero(1), 1.0, Variant::PaperVerbatim) == 1.0);
    CHECK(feasibility_H(V::Constant(1, -1.0), V::Zero(1), 1.0, Variant::KktStandard) == 0.0);
    CHECK(feasibility_H(V::Constant(1, 2.0), V::Constant(1, 1.0), 1.0, Variant::PaperVerbatim) == 1.0);
    CHECK(feasibility_H(V::Constant(1, 2.0), V::Constant(1, 1.0), 1.0, Variant::KktStandard) == 2.0);
    CHECK_THROWS(feasibility_H(V::Zero(2), V::Zero(3), 1.0, Variant::KktStandard));
}

TEST_CASE("shape CSV and manifest round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "msopt_geom_test";
    std::filesystem::create_directories(dir);
    ShapeManifest m;
    m.shapes = initial_triangles(std::vector<Vec2>{{0, 0}, {5, 1}}, 1.0, 0.4);
    m.constraints = constraints_around(m.shapes, {-0.2, -0.3}, {0.5, 0.4});
    save_shape_manifest(m, dir / "shapes.json");
    const ShapeManifest l = load_shape_manifest(dir / "shapes.json");
    REQUIRE(l.shapes.size() == 2);
    CHECK(l.shapes[1] == m.shapes[1]);
    CHECK(l.constraints.volume_lower == m.constraints.volume_lower);
    CHECK(l.constraints.bary_upper == m.constraints.bary_upper);
    std::filesystem::remove_all(dir);
}
