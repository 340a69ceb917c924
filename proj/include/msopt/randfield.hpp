#pragma once

#include "msopt/common.hpp"
#include "msopt/mesh.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace msopt {

inline constexpr int kNumModes = 20;

/// One realization of the truncated expansion; every entry lies in [-1, 1].
using Sample = std::array<double, kNumModes>;

/// Inflow profile parameters. The inflow segment is {inflow_x} x (ymin, ymax).
struct FieldParams {
    double eta = 2.5;
    double inflow_x = -10.0;
    double ymin = -10.0;
    double ymax = 10.0;

    static FieldParams for_domain(const Rectangle& r, double eta = 2.5) { return {eta, r.xmin, r.ymin, r.ymax}; }
};

/// Parabolic mean profile plus sum_l l^(-eta-1/2) sin(pi l y') xi_l, where y'
/// is x2 rescaled so the inflow segment maps onto (-1, 1).
double kappa(double x2, const Sample& xi, const FieldParams& params);

/// Exact variance of kappa(x2, .) for independent U[-1,1] coefficients.
double kappa_variance(double x2, const FieldParams& params);

/// Dirichlet datum at a point on a Dirichlet-tagged boundary: (kappa, 0) on
/// the inflow segment, zero on the other outer walls and on shapes.
Vec2 g_eval(const Vec2& x, const BoundaryTag& tag, const Sample& xi, const FieldParams& params);

/// Sample l of batch (k, j) for a given seed. A pure function of its
/// arguments: each (seed, k, j, l) seeds its own std::mt19937_64 through a
/// std::seed_seq, and a 64-bit draw u maps to 2 * (u >> 11) * 2^-53 - 1.
Sample draw_sample(std::uint64_t seed, std::uint64_t k, std::uint64_t j, std::uint64_t l);
std::vector<Sample> draw_batch(std::uint64_t seed, std::uint64_t k, std::uint64_t j, int m);

inline Sample zero_sample() { return Sample{}; }

void save_batch_csv(const std::vector<Sample>& batch, const std::filesystem::path& path);

}  // namespace msopt
