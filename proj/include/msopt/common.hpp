#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>

namespace msopt {

using Vec2 = Eigen::Vector2d;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid run configuration; carries the dotted path of the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// PDE or linear solver failure (Newton divergence, singular factorization).
class SolverError : public Error {
public:
    explicit SolverError(const std::string& message, double last_residual = 0.0)
        : Error(message), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// Mesh generation, import or validity failure.
class MeshError : public Error {
public:
    explicit MeshError(const std::string& message, int shape_index = -1)
        : Error(message), shape_index_(shape_index) {}
    int shape_index() const noexcept { return shape_index_; }

private:
    int shape_index_;
};

/// Selects between the consistent augmented-Lagrangian formulas and the
/// literal min-form formulas (kept for reproducing reference runs).
enum class Variant { KktStandard, PaperVerbatim };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

}  // namespace msopt
