#include "msopt/randfield.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

namespace msopt {

namespace {

const double kPi = std::acos(-1.0);

double local_coordinate(double x2, const FieldParams& p) {
    const double c = 0.5 * (p.ymin + p.ymax);
    const double hw = 0.5 * (p.ymax - p.ymin);
    return (x2 - c) / hw;
}

}  // namespace

double kappa(double x2, const Sample& xi, const FieldParams& params) {
    const double y = local_coordinate(x2, params);
    double value = (1.0 + y) * (1.0 - y);
    for (int l = 1; l <= kNumModes; ++l)
        value += std::pow(static_cast<double>(l), -params.eta - 0.5) * std::sin(kPi * l * y) * xi[l - 1];
    return value;
}

double kappa_variance(double x2, const FieldParams& params) {
    const double y = local_coordinate(x2, params);
    double var = 0.0;
    for (int l = 1; l <= kNumModes; ++l) {
        const double s = std::sin(kPi * l * y);
        var += std::pow(static_cast<double>(l), -2.0 * params.eta - 1.0) * s * s;
    }
    return var / 3.0;
}

Vec2 g_eval(const Vec2& x, const BoundaryTag& tag, const Sample& xi, const FieldParams& params) {
    switch (tag.kind) {
        case BoundaryTag::Kind::OuterNeumann:
            throw std::invalid_argument("g_eval: point is on the outflow boundary, not a Dirichlet boundary");
        case BoundaryTag::Kind::Shape: return Vec2::Zero();
        case BoundaryTag::Kind::OuterDirichlet: break;
    }
    const double tol = 1e-12 * (params.ymax - params.ymin);
    if (std::abs(x.x() - params.inflow_x) <= tol) return {kappa(x.y(), xi, params), 0.0};
    return Vec2::Zero();
}

Sample draw_sample(std::uint64_t seed, std::uint64_t k, std::uint64_t j, std::uint64_t l) {
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(k), hi(k), lo(j), hi(j), lo(l), hi(l)};
    std::mt19937_64 gen(seq);
    Sample xi;
    for (double& x : xi) x = 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
    return xi;
}

std::vector<Sample> draw_batch(std::uint64_t seed, std::uint64_t k, std::uint64_t j, int m) {
    if (m < 1) throw std::invalid_argument("draw_batch: batch size must be at least 1");
    std::vector<Sample> out;
    out.reserve(m);
    for (int l = 0; l < m; ++l) out.push_back(draw_sample(seed, k, j, static_cast<std::uint64_t>(l)));
    return out;
}

void save_batch_csv(const std::vector<Sample>& batch, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "l";
    for (int i = 1; i <= kNumModes; ++i) out << ",xi" << i;
    out << '\n' << std::setprecision(17);
    for (std::size_t l = 0; l < batch.size(); ++l) {
        out << l;
        for (double x : batch[l]) out << ',' << x;
        out << '\n';
    }
}

}  // namespace msopt
