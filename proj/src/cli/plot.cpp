#include "msopt/cli.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace msopt {

namespace fs = std::filesystem;

namespace {

using Color = std::array<std::uint8_t, 3>;

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kMargin = 40;
constexpr Color kWhite{255, 255, 255};
constexpr Color kBlack{0, 0, 0};
constexpr Color kGrid{215, 215, 215};
constexpr Color kBox{150, 150, 150};
constexpr std::array<Color, 6> kPalette{
    {{31, 119, 180}, {214, 39, 40}, {44, 160, 44}, {148, 103, 189}, {255, 127, 14}, {23, 190, 207}}};

/// Maps a data rectangle onto the plot area inside the margins.
struct Frame {
    double x0, x1, y0, y1;
    int px0 = kMargin, px1 = kWidth - kMargin, py0 = kHeight - kMargin, py1 = kMargin;

    int px(double x) const { return static_cast<int>(std::lround(px0 + (x - x0) / (x1 - x0) * (px1 - px0))); }
    int py(double y) const { return static_cast<int>(std::lround(py0 + (y - y0) / (y1 - y0) * (py1 - py0))); }
};

void line(Image& img, int xa, int ya, int xb, int yb, Color c, int thickness = 1) {
    const int dx = std::abs(xb - xa), dy = -std::abs(yb - ya);
    const int sx = xa < xb ? 1 : -1, sy = ya < yb ? 1 : -1;
    int err = dx + dy;
    const int r = thickness / 2;
    while (true) {
        for (int oy = -r; oy <= r; ++oy)
            for (int ox = -r; ox <= r; ++ox) img.set(xa + ox, ya + oy, c);
        if (xa == xb && ya == yb) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            xa += sx;
        }
        if (e2 <= dx) {
            err += dx;
            ya += sy;
        }
    }
}

void marker(Image& img, int x, int y, Color c, int r = 3) {
    for (int oy = -r; oy <= r; ++oy)
        for (int ox = -r; ox <= r; ++ox) img.set(x + ox, y + oy, c);
}

void rect(Image& img, int xa, int ya, int xb, int yb, Color c) {
    line(img, xa, ya, xb, ya, c);
    line(img, xb, ya, xb, yb, c);
    line(img, xb, yb, xa, yb, c);
    line(img, xa, yb, xa, ya, c);
}

void axes(Image& img, const Frame& f) { rect(img, f.px0, f.py0, f.px1, f.py1, kBlack); }

/// Vertical grid lines at integer x, tick marks below the frame.
void integer_ticks(Image& img, const Frame& f) {
    for (int k = static_cast<int>(std::ceil(f.x0)); k <= static_cast<int>(std::floor(f.x1)); ++k) {
        line(img, f.px(k), f.py0, f.px(k), f.py1, kGrid);
        line(img, f.px(k), f.py0, f.px(k), f.py0 + 5, kBlack);
    }
}

double nice_step(double span) {
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) return m * mag;
    return 10.0 * mag;
}

void polyline_plot(Image& img, const Frame& f, const std::vector<std::pair<double, double>>& pts, Color c) {
    for (std::size_t i = 1; i < pts.size(); ++i)
        line(img, f.px(pts[i - 1].first), f.py(pts[i - 1].second), f.px(pts[i].first), f.py(pts[i].second), c, 2);
    for (const auto& [x, y] : pts) marker(img, f.px(x), f.py(y), c);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

double to_number(const std::string& s, const fs::path& path) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error("corrupt artifact " + path.string() + ": not a number '" + s + "'");
    }
}

/// Header-indexed numeric CSV reader.
std::vector<std::map<std::string, double>> read_table(const fs::path& path, const std::vector<std::string>& needed) {
    std::ifstream in(path);
    if (!in) throw Error("missing artifact " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error("no rows");
    const std::vector<std::string> header = split_csv(line);
    for (const std::string& n : needed)
        if (std::find(header.begin(), header.end(), n) == header.end())
            throw Error("corrupt artifact " + path.string() + ": missing column " + n);
    std::vector<std::map<std::string, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) throw Error("corrupt artifact " + path.string() + ": ragged row");
        std::map<std::string, double> row;
        for (std::size_t i = 0; i < cells.size(); ++i) row[header[i]] = to_number(cells[i], path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error("no rows");
    return rows;
}

Image trace_plot(const std::vector<std::pair<double, double>>& pts, bool log_y) {
    if (pts.empty()) throw Error("no rows");
    std::vector<std::pair<double, double>> data;
    for (const auto& [x, y] : pts) {
        if (log_y && !(y > 0.0)) continue;
        data.emplace_back(x, log_y ? std::log10(y) : y);
    }
    if (data.empty()) throw Error("no positive values to plot on a log axis");
    double xmin = data.front().first, xmax = xmin, ymin = data.front().second, ymax = ymin;
    for (const auto& [x, y] : data) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    if (log_y) {
        ymin = std::floor(ymin);
        ymax = std::ceil(ymax);
        if (ymax == ymin) ymax += 1.0;
    } else {
        const double pad = ymax > ymin ? 0.05 * (ymax - ymin) : std::max(1e-3, 0.05 * std::abs(ymax));
        ymin -= pad;
        ymax += pad;
    }
    Frame f{xmin - 0.5, xmax + 0.5, ymin, ymax};
    Image img(kWidth, kHeight);
    integer_ticks(img, f);
    if (log_y) {
        for (double d = ymin; d <= ymax + 1e-9; d += 1.0) {
            line(img, f.px0, f.py(d), f.px1, f.py(d), kGrid);
            line(img, f.px0 - 5, f.py(d), f.px0, f.py(d), kBlack);
            for (int m = 2; m < 10 && d + std::log10(m) < ymax; ++m)
                line(img, f.px0 - 2, f.py(d + std::log10(m)), f.px0, f.py(d + std::log10(m)), kBlack);
        }
    } else {
        const double step = nice_step(ymax - ymin);
        for (double y = std::ceil(ymin / step) * step; y <= ymax; y += step) {
            line(img, f.px0, f.py(y), f.px1, f.py(y), kGrid);
            line(img, f.px0 - 5, f.py(y), f.px0, f.py(y), kBlack);
        }
    }
    axes(img, f);
    polyline_plot(img, f, data, kPalette[0]);
    return img;
}

}  // namespace

Image::Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 255) {}

void Image::set(int x, int y, std::array<std::uint8_t, 3> c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    std::copy(c.begin(), c.end(), rgb.begin() + (static_cast<std::size_t>(y) * width + x) * 3);
}

std::array<std::uint8_t, 3> Image::get(int x, int y) const {
    const auto* p = rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    return {p[0], p[1], p[2]};
}

void save_png(const Image& img, const fs::path& path) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw Error("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw Error("PNG encoding failed for " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

std::uint64_t pixel_hash(const Image& img) {
    std::uint64_t h = 14695981039346656037ull;
    for (std::uint8_t b : img.rgb) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<RunLogRow> read_run_log(const fs::path& path) {
    std::vector<RunLogRow> out;
    for (const auto& r : read_table(path, {"k", "objective_estimate", "S_k"}))
        out.push_back({static_cast<int>(r.at("k")), r.at("objective_estimate"), r.at("S_k")});
    return out;
}

std::vector<TrajectoryPoint> read_trajectory(const fs::path& path) {
    std::vector<TrajectoryPoint> out;
    for (const auto& r : read_table(path, {"k", "j", "shape", "x", "y"}))
        out.push_back({static_cast<int>(r.at("k")), static_cast<int>(r.at("j")), static_cast<int>(r.at("shape")) - 1,
                       Vec2{r.at("x"), r.at("y")}});
    return out;
}

Image plot_stationarity(const std::vector<RunLogRow>& rows) {
    std::vector<std::pair<double, double>> pts;
    for (const RunLogRow& r : rows) pts.emplace_back(r.k, r.S);
    return trace_plot(pts, true);
}

Image plot_objective(const std::vector<RunLogRow>& rows) {
    std::vector<std::pair<double, double>> pts;
    for (const RunLogRow& r : rows) pts.emplace_back(r.k, r.objective);
    return trace_plot(pts, false);
}

Image plot_barycenters(const std::vector<TrajectoryPoint>& traj, const ConstraintSpec& boxes) {
    if (traj.empty()) throw Error("no rows");
    Vec2 lo = traj.front().barycenter, hi = lo;
    auto grow = [&](const Vec2& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    };
    for (const TrajectoryPoint& p : traj) grow(p.barycenter);
    for (int i = 0; i < boxes.size(); ++i) {
        grow(boxes.bary_lower[i]);
        grow(boxes.bary_upper[i]);
    }
    // Equal aspect ratio around the data with a small border.
    const Vec2 mid = 0.5 * (lo + hi);
    const double aspect = double(kWidth - 2 * kMargin) / (kHeight - 2 * kMargin);
    double half_w = 0.55 * std::max((hi - lo).x(), 1e-6), half_h = 0.55 * std::max((hi - lo).y(), 1e-6);
    if (half_w / half_h < aspect)
        half_w = half_h * aspect;
    else
        half_h = half_w / aspect;
    Frame f{mid.x() - half_w, mid.x() + half_w, mid.y() - half_h, mid.y() + half_h};

    Image img(kWidth, kHeight);
    const double step = nice_step(2.0 * half_w);
    for (double x = std::ceil(f.x0 / step) * step; x <= f.x1; x += step) line(img, f.px(x), f.py0, f.px(x), f.py1, kGrid);
    for (double y = std::ceil(f.y0 / step) * step; y <= f.y1; y += step) line(img, f.px0, f.py(y), f.px1, f.py(y), kGrid);
    axes(img, f);
    for (int i = 0; i < boxes.size(); ++i)
        rect(img, f.px(boxes.bary_lower[i].x()), f.py(boxes.bary_lower[i].y()), f.px(boxes.bary_upper[i].x()),
             f.py(boxes.bary_upper[i].y()), kBox);

    std::map<int, std::vector<Vec2>> paths;
    for (const TrajectoryPoint& p : traj) paths[p.shape].push_back(p.barycenter);
    for (const auto& [shape, path] : paths) {
        const Color c = kPalette[static_cast<std::size_t>(shape) % kPalette.size()];
        for (std::size_t i = 1; i < path.size(); ++i)
            line(img, f.px(path[i - 1].x()), f.py(path[i - 1].y()), f.px(path[i].x()), f.py(path[i].y()), c, 2);
        marker(img, f.px(path.front().x()), f.py(path.front().y()), kBlack, 2);
        marker(img, f.px(path.back().x()), f.py(path.back().y()), c, 4);
    }
    return img;
}

std::vector<fs::path> cmd_plot(const fs::path& run_dir, const fs::path& out) {
    fs::create_directories(out);
    std::vector<fs::path> written;
    auto emit = [&](const Image& img, const std::string& name) {
        save_png(img, out / name);
        written.push_back(out / name);
    };
    if (fs::exists(run_dir / "run_log.csv")) {
        const auto rows = read_run_log(run_dir / "run_log.csv");
        emit(plot_stationarity(rows), "stationarity.png");
        emit(plot_objective(rows), "objective.png");
    }
    if (fs::exists(run_dir / "deterministic_log.csv")) {
        std::vector<std::pair<double, double>> r, j;
        for (const auto& row : read_table(run_dir / "deterministic_log.csv", {"k", "objective", "r_hat"})) {
            r.emplace_back(row.at("k"), row.at("r_hat"));
            j.emplace_back(row.at("k"), row.at("objective"));
        }
        emit(trace_plot(r, true), "optimality.png");
        emit(trace_plot(j, false), "deterministic_objective.png");
    }
    if (fs::exists(run_dir / "trajectory.csv")) {
        const fs::path shapes = run_dir / "shapes" / "k0.json";
        if (!fs::exists(shapes)) throw Error("missing artifact " + shapes.string());
        emit(plot_barycenters(read_trajectory(run_dir / "trajectory.csv"), load_shape_manifest(shapes).constraints),
             "barycenters.png");
    }
    if (written.empty()) throw Error("missing artifact: no run log or trajectory in " + run_dir.string());
    return written;
}

}  // namespace msopt
