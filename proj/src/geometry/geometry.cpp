#include "msopt/geometry.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace msopt {

void ConstraintSpec::check() const {
    const std::size_t s = volume_lower.size();
    if (bary_lower.size() != s || bary_upper.size() != s)
        throw ConfigError("constraints", "volume and barycenter bounds have different lengths");
    for (std::size_t i = 0; i < s; ++i) {
        if (!(volume_lower[i] > 0.0))
            throw ConfigError("constraints.volume_lower", "bound for shape " + std::to_string(i + 1) + " must be positive");
        if (!(bary_lower[i].x() < bary_upper[i].x() && bary_lower[i].y() < bary_upper[i].y()))
            throw ConfigError("constraints.bary", "empty barycenter box for shape " + std::to_string(i + 1));
    }
}

double volume(const Polyline& p) {
    if (p.size() < 3) throw MeshError("polyline needs at least 3 points");
    double v = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2& a = p[i];
        const Vec2& b = p[(i + 1) % p.size()];
        v += (0.5 * (a + b)).dot(scaled_normal(a, b));
    }
    return 0.5 * v;
}

Vec2 barycenter(const Polyline& p) {
    const double vol = volume(p);
    if (!(vol > 0.0)) throw MeshError("barycenter of a polyline with non-positive area");
    const double g = 0.5 / std::sqrt(3.0);
    Vec2 m = Vec2::Zero();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2& a = p[i];
        const Vec2& b = p[(i + 1) % p.size()];
        const Vec2 n = scaled_normal(a, b);
        for (double s : {0.5 - g, 0.5 + g}) {
            const Vec2 x = a + s * (b - a);
            m += 0.5 * x.cwiseProduct(x).cwiseProduct(n);
        }
    }
    return m / (2.0 * vol);
}

ConstraintVector constraint_vector(std::span<const Polyline> shapes, const ConstraintSpec& spec) {
    const int s = spec.size();
    if (static_cast<int>(shapes.size()) != s)
        throw ConfigError("constraints", "constraint spec has " + std::to_string(s) + " entries for " +
                                             std::to_string(shapes.size()) + " shapes");
    ConstraintVector h(5 * s);
    for (int i = 0; i < s; ++i) {
        const Vec2 b = barycenter(shapes[i]);
        h[i] = spec.volume_lower[i] - volume(shapes[i]);
        h[s + 2 * i] = spec.bary_lower[i].x() - b.x();
        h[s + 2 * i + 1] = spec.bary_lower[i].y() - b.y();
        h[3 * s + 2 * i] = b.x() - spec.bary_upper[i].x();
        h[3 * s + 2 * i + 1] = b.y() - spec.bary_upper[i].y();
    }
    return h;
}

double feasibility_H(const Eigen::VectorXd& h, const Eigen::VectorXd& w, double mu, Variant variant) {
    if (h.size() != w.size()) throw std::invalid_argument("feasibility_H: dimension mismatch");
    if (!(mu > 0.0)) throw std::invalid_argument("feasibility_H: penalty must be positive");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        const double r = variant == Variant::KktStandard ? std::max(h[i], -w[i] / mu)
                                                         : h[i] - std::max(0.0, h[i] + w[i] / mu);
        sum += r * r;
    }
    return std::sqrt(sum);
}

ConstraintSpec constraints_around(std::span<const Polyline> shapes, const Vec2& lower_offset,
                                  const Vec2& upper_offset) {
    ConstraintSpec c;
    for (const Polyline& p : shapes) {
        const Vec2 b = barycenter(p);
        c.volume_lower.push_back(volume(p));
        c.bary_lower.push_back(b + lower_offset);
        c.bary_upper.push_back(b + upper_offset);
    }
    return c;
}

ShapeSet initial_triangles(std::span<const Vec2> barycenters, double area, double segment_length) {
    if (!(area > 0.0) || !(segment_length > 0.0))
        throw ConfigError("shapes", "triangle area and segment length must be positive");
    const double side = std::sqrt(4.0 * area / std::sqrt(3.0));
    const double r = side / std::sqrt(3.0);
    const int pieces = std::max(1, static_cast<int>(std::ceil(side / segment_length - 1e-9)));
    const double pi = std::acos(-1.0);
    ShapeSet out;
    for (const Vec2& b : barycenters) {
        std::array<Vec2, 3> corner;
        for (int k = 0; k < 3; ++k) {
            const double th = pi + 2.0 * pi * k / 3.0;
            corner[k] = b + r * Vec2{std::cos(th), std::sin(th)};
        }
        Polyline p;
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < pieces; ++j)
                p.push_back(corner[k] + (corner[(k + 1) % 3] - corner[k]) * (static_cast<double>(j) / pieces));
        out.push_back(std::move(p));
    }
    return out;
}

Polyline load_shape_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("shapes", "cannot open " + path.string());
    Polyline p;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        std::istringstream ls(line);
        double x = 0, y = 0;
        if (!(ls >> x >> y)) {
            if (p.empty() && lineno == 1) continue;  // header
            throw ConfigError("shapes", path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
        }
        p.emplace_back(x, y);
    }
    if (p.size() >= 2 && p.front() == p.back()) p.pop_back();
    if (p.size() < 3) throw ConfigError("shapes", path.string() + ": fewer than 3 points");
    return p;
}

void save_shape_csv(const Polyline& p, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("shapes", "cannot write " + path.string());
    out << std::setprecision(17) << "x,y\n";
    for (const Vec2& x : p) out << x.x() << ',' << x.y() << '\n';
}

namespace {

Vec2 read_point(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(field, "expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

ShapeManifest load_shape_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("shapes", "cannot open " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("shapes", path.string() + ": " + e.what());
    }
    ShapeManifest m;
    const auto dir = path.parent_path();
    for (const auto& f : j.at("shapes")) m.shapes.push_back(load_shape_csv(dir / f.get<std::string>()));
    if (j.contains("constraints")) {
        const auto& c = j["constraints"];
        m.constraints.volume_lower = c.at("volume_lower").get<std::vector<double>>();
        for (const auto& b : c.at("bary_lower")) m.constraints.bary_lower.push_back(read_point(b, "constraints.bary_lower"));
        for (const auto& b : c.at("bary_upper")) m.constraints.bary_upper.push_back(read_point(b, "constraints.bary_upper"));
        m.constraints.check();
        if (m.constraints.size() != static_cast<int>(m.shapes.size()))
            throw ConfigError("constraints", "one entry per shape expected");
    }
    return m;
}

void save_shape_manifest(const ShapeManifest& m, const std::filesystem::path& path) {
    nlohmann::json j;
    const auto dir = path.parent_path();
    const std::string stem = path.stem().string();
    for (std::size_t i = 0; i < m.shapes.size(); ++i) {
        const std::string name = stem + "_shape" + std::to_string(i + 1) + ".csv";
        save_shape_csv(m.shapes[i], dir / name);
        j["shapes"].push_back(name);
    }
    if (m.constraints.size() > 0) {
        auto& c = j["constraints"];
        c["volume_lower"] = m.constraints.volume_lower;
        for (const Vec2& b : m.constraints.bary_lower) c["bary_lower"].push_back({b.x(), b.y()});
        for (const Vec2& b : m.constraints.bary_upper) c["bary_upper"].push_back({b.x(), b.y()});
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("shapes", "cannot write " + path.string());
    out << std::setprecision(17) << j.dump(2) << '\n';
}

}  // namespace msopt
