#pragma once

#include "msopt/common.hpp"
#include "msopt/mesh.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <vector>

namespace msopt {

/// Obstacle boundaries: closed polylines, counter-clockwise, implicitly closed
/// (the last point connects back to the first).
using ShapeSet = std::vector<Polyline>;

/// Volume lower bounds and barycenter boxes, one entry per shape.
struct ConstraintSpec {
    std::vector<double> volume_lower;
    std::vector<Vec2> bary_lower;
    std::vector<Vec2> bary_upper;

    int size() const { return static_cast<int>(volume_lower.size()); }
    /// Throws ConfigError on inconsistent sizes or empty boxes.
    void check() const;
};

/// Length 5s: [0,s) volume, [s,3s) lower barycenter, [3s,5s) upper barycenter.
using ConstraintVector = Eigen::VectorXd;

/// Outward obstacle normal of the edge a->b scaled by its length.
inline Vec2 scaled_normal(const Vec2& a, const Vec2& b) { return {b.y() - a.y(), a.x() - b.x()}; }

/// Enclosed area via the boundary integral 1/2 * closed_integral(x . n).
double volume(const Polyline& p);

/// Centroid via 1/(2 vol) * closed_integral(x_k^2 n_k) with two-point Gauss per edge.
Vec2 barycenter(const Polyline& p);

ConstraintVector constraint_vector(std::span<const Polyline> shapes, const ConstraintSpec& spec);

/// Norm of the complementarity residual of h against safeguarded multipliers w.
///   kkt-standard:   max(h_i, -w_i/mu)
///   paper-verbatim: h_i - max(0, h_i + w_i/mu)
double feasibility_H(const Eigen::VectorXd& h, const Eigen::VectorXd& w, double mu, Variant variant);

/// Volume bounds at the current areas and barycenter boxes [b + lower_offset, b + upper_offset].
ConstraintSpec constraints_around(std::span<const Polyline> shapes, const Vec2& lower_offset,
                                  const Vec2& upper_offset);

/// Equilateral triangles of the given area with one vertex pointing in -x
/// direction, each edge split into pieces no longer than `segment_length`.
ShapeSet initial_triangles(std::span<const Vec2> barycenters, double area, double segment_length);

// CSV: one "x,y" row per point; an optional "x,y" header line is skipped.
Polyline load_shape_csv(const std::filesystem::path& path);
void save_shape_csv(const Polyline& p, const std::filesystem::path& path);

/// JSON manifest: {"shapes": ["s1.csv", ...], "constraints": {...}}; paths
/// are relative to the manifest.
struct ShapeManifest {
    ShapeSet shapes;
    ConstraintSpec constraints;
};
ShapeManifest load_shape_manifest(const std::filesystem::path& path);
void save_shape_manifest(const ShapeManifest& m, const std::filesystem::path& path);

}  // namespace msopt
