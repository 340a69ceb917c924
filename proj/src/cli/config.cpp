#include "msopt/cli.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <cctype>

namespace msopt {

namespace {

using nlohmann::json;

json point(const Vec2& p) { return json::array({p.x(), p.y()}); }

json points(const std::vector<Vec2>& ps) {
    json a = json::array();
    for (const Vec2& p : ps) a.push_back(point(p));
    return a;
}

/// Reads one JSON object, remembering which keys were consumed so that
/// misspelled keys are reported instead of silently ignored.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "expected an object");
    }

    template <class T>
    void read(const std::string& key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = convert<T>(j_.at(key), name(key));
        } catch (const json::exception& e) {
            throw ConfigError(name(key), std::string("wrong type (") + e.what() + ")");
        }
    }

    std::optional<Section> sub(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) return std::nullopt;
        return Section(j_.at(key), name(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(name(it.key()), "unknown key");
    }

private:
    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <class T>
    static T convert(const json& v, const std::string& field) {
        if constexpr (std::is_same_v<T, Vec2>) {
            if (!v.is_array() || v.size() != 2) throw ConfigError(field, "expected [x, y]");
            return {v[0].get<double>(), v[1].get<double>()};
        } else if constexpr (std::is_same_v<T, std::vector<Vec2>>) {
            if (!v.is_array()) throw ConfigError(field, "expected a list of [x, y]");
            std::vector<Vec2> out;
            for (const json& p : v) out.push_back(convert<Vec2>(p, field));
            return out;
        } else if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ConfigError(field, "expected a number");
            return v.get<double>();
        } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
            if constexpr (std::is_unsigned_v<T>)
                if (v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(field, "must be non-negative");
            return v.get<T>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(field, "expected a string");
            return v.get<std::string>();
        } else {
            return v.get<T>();
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok) throw ConfigError(field, message);
}

}  // namespace

RunConfig::RunConfig() {
    mesh.domain = domain;
    mesh.target_edge_length = 2.0;
    mesh.near_shape_edge_length = 0.4;
}

void RunConfig::validate() const {
    require(domain.xmin < domain.xmax && domain.ymin < domain.ymax, "domain", "needs xmin < xmax and ymin < ymax");
    require(shape_area > 0.0, "shapes.area", "must be positive");
    if (shape_manifest.empty() && mesh_file.empty() && !volume_lower.empty())
        require(volume_lower.size() == barycenters.size(), "constraints.volume_lower",
                "needs one entry per shape or none");
    require(box_lower_offset.x() <= box_upper_offset.x() && box_lower_offset.y() <= box_upper_offset.y(),
            "constraints.box_lower_offset", "must not exceed box_upper_offset");
    require(mesh.target_edge_length > 0.0, "mesh.target_edge_length", "must be positive");
    require(mesh.near_shape_edge_length >= 0.0, "mesh.near_shape_edge_length", "must be non-negative");
    require(mesh.grading >= 0.0, "mesh.grading", "must be non-negative");
    require(remesh_threshold >= 0.0 && remesh_threshold < 1.0, "mesh.remesh_threshold", "must lie in [0, 1)");
    require(nu > 0.0, "flow.nu", "must be positive");
    require(solver.newton_tol > 0.0, "flow.newton_tol", "must be positive");
    require(solver.newton_max_iter >= 1, "flow.newton_max_iter", "must be at least 1");
    require(eta > 0.0, "field.eta", "must be positive");
    require(stiffness_min > 0.0 && stiffness_min <= stiffness_max, "algorithm.stiffness_min",
            "needs 0 < stiffness_min <= stiffness_max");
    require(algorithm.max_step_halvings >= 0, "algorithm.max_step_halvings", "must be non-negative");
    algorithm.check();
    require(lipschitz.mu.size() >= 2, "lipschitz.mu", "needs at least two penalty factors");
    for (double m : lipschitz.mu) require(m > 0.0, "lipschitz.mu", "penalty factors must be positive");
    require(lipschitz.samples >= 1, "lipschitz.samples", "must be at least 1");
    require(lipschitz.iterations >= 1, "lipschitz.iterations", "must be at least 1");
    require(lipschitz.sigma > 0.0 && lipschitz.sigma < 1.0, "lipschitz.sigma", "must lie in (0, 1)");
    require(lipschitz.beta > 0.0 && lipschitz.beta < 1.0, "lipschitz.beta", "must lie in (0, 1)");
    require(lipschitz.t0 > 0.0, "lipschitz.t0", "must be positive");
    require(deterministic.sigma > 0.0 && deterministic.sigma < 1.0, "deterministic.sigma", "must lie in (0, 1)");
    require(deterministic.beta > 0.0 && deterministic.beta < 1.0, "deterministic.beta", "must lie in (0, 1)");
    require(deterministic.t0 > 0.0, "deterministic.t0", "must be positive");
    require(deterministic.max_inner >= 1, "deterministic.max_inner", "must be at least 1");
    require(!output_dir.empty(), "output_dir", "must not be empty");
}

json to_json(const RunConfig& c) {
    const AlgorithmParams& a = c.algorithm;
    json j;
    j["domain"] = {{"xmin", c.domain.xmin}, {"xmax", c.domain.xmax}, {"ymin", c.domain.ymin}, {"ymax", c.domain.ymax}};
    j["shapes"] = {{"manifest", c.shape_manifest}, {"barycenters", points(c.barycenters)}, {"area", c.shape_area}};
    j["constraints"] = {{"volume_lower", c.volume_lower},
                        {"box_lower_offset", point(c.box_lower_offset)},
                        {"box_upper_offset", point(c.box_upper_offset)}};
    j["mesh"] = {{"file", c.mesh_file},
                 {"target_edge_length", c.mesh.target_edge_length},
                 {"near_shape_edge_length", c.mesh.near_shape_edge_length},
                 {"grading", c.mesh.grading},
                 {"smoothing_sweeps", c.mesh.smoothing_sweeps},
                 {"max_refinement_points", c.mesh.max_refinement_points},
                 {"remesh_threshold", c.remesh_threshold}};
    j["flow"] = {{"nu", c.nu},
                 {"force", point(c.force)},
                 {"newton_tol", c.solver.newton_tol},
                 {"newton_max_iter", c.solver.newton_max_iter}};
    j["field"] = {{"eta", c.eta}};
    j["seed"] = c.seed;
    j["schedules"] = {{"m_first", a.schedules.m_first},
                      {"m_growth", a.schedules.m_growth},
                      {"n_first", a.schedules.n_first},
                      {"n_growth", a.schedules.n_growth},
                      {"alpha", a.schedules.alpha}};
    j["algorithm"] = {{"outer_iterations", a.max_outer},
                      {"tau", a.tau},
                      {"gamma", a.gamma},
                      {"mu1", a.mu1},
                      {"lambda1", a.lambda1},
                      {"safeguard", {a.box.lower, a.box.upper}},
                      {"variant", std::string(to_string(a.variant))},
                      {"stationarity_tol", a.stationarity_tol},
                      {"feasibility_tol", a.feasibility_tol},
                      {"threads", a.threads},
                      {"max_step_halvings", a.max_step_halvings},
                      {"fixed_step", a.fixed_step},
                      {"L_jtilde", a.lipschitz.L_jtilde},
                      {"L_h", a.lipschitz.L_h},
                      {"stiffness_max", c.stiffness_max},
                      {"stiffness_min", c.stiffness_min}};
    const LipschitzEstimationParams& l = c.lipschitz;
    j["lipschitz"] = {{"mu", l.mu},       {"samples", l.samples}, {"iterations", l.iterations},
                      {"sigma", l.sigma}, {"beta", l.beta},       {"t0", l.t0},
                      {"max_backtracks", l.max_backtracks}};
    const DeterministicParams& d = c.deterministic;
    j["deterministic"] = {{"sigma", d.sigma},
                          {"beta", d.beta},
                          {"t0", d.t0},
                          {"warmup_steps", d.warmup_steps},
                          {"max_inner", d.max_inner},
                          {"max_backtracks", d.max_backtracks},
                          {"tol", d.tol}};
    j["output_dir"] = c.output_dir;
    return j;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    AlgorithmParams& a = c.algorithm;
    Section root(j, "");
    if (auto s = root.sub("domain")) {
        s->read("xmin", c.domain.xmin);
        s->read("xmax", c.domain.xmax);
        s->read("ymin", c.domain.ymin);
        s->read("ymax", c.domain.ymax);
        s->finish();
    }
    c.mesh.domain = c.domain;
    if (auto s = root.sub("shapes")) {
        s->read("manifest", c.shape_manifest);
        s->read("barycenters", c.barycenters);
        s->read("area", c.shape_area);
        s->finish();
    }
    if (auto s = root.sub("constraints")) {
        s->read("volume_lower", c.volume_lower);
        s->read("box_lower_offset", c.box_lower_offset);
        s->read("box_upper_offset", c.box_upper_offset);
        s->finish();
    }
    if (auto s = root.sub("mesh")) {
        s->read("file", c.mesh_file);
        s->read("target_edge_length", c.mesh.target_edge_length);
        s->read("near_shape_edge_length", c.mesh.near_shape_edge_length);
        s->read("grading", c.mesh.grading);
        s->read("smoothing_sweeps", c.mesh.smoothing_sweeps);
        s->read("max_refinement_points", c.mesh.max_refinement_points);
        s->read("remesh_threshold", c.remesh_threshold);
        s->finish();
    }
    if (auto s = root.sub("flow")) {
        s->read("nu", c.nu);
        s->read("force", c.force);
        s->read("newton_tol", c.solver.newton_tol);
        s->read("newton_max_iter", c.solver.newton_max_iter);
        s->finish();
    }
    if (auto s = root.sub("field")) {
        s->read("eta", c.eta);
        s->finish();
    }
    root.read("seed", c.seed);
    if (auto s = root.sub("schedules")) {
        s->read("m_first", a.schedules.m_first);
        s->read("m_growth", a.schedules.m_growth);
        s->read("n_first", a.schedules.n_first);
        s->read("n_growth", a.schedules.n_growth);
        s->read("alpha", a.schedules.alpha);
        s->finish();
    }
    if (auto s = root.sub("algorithm")) {
        s->read("outer_iterations", a.max_outer);
        s->read("tau", a.tau);
        s->read("gamma", a.gamma);
        s->read("mu1", a.mu1);
        s->read("lambda1", a.lambda1);
        Vec2 box{a.box.lower, a.box.upper};
        s->read("safeguard", box);
        a.box = {box.x(), box.y()};
        std::string variant(to_string(a.variant));
        s->read("variant", variant);
        try {
            a.variant = parse_variant(variant);
        } catch (const ConfigError& e) {
            throw ConfigError("algorithm.variant", e.what());
        }
        s->read("stationarity_tol", a.stationarity_tol);
        s->read("feasibility_tol", a.feasibility_tol);
        s->read("threads", a.threads);
        s->read("max_step_halvings", a.max_step_halvings);
        s->read("fixed_step", a.fixed_step);
        s->read("L_jtilde", a.lipschitz.L_jtilde);
        s->read("L_h", a.lipschitz.L_h);
        s->read("stiffness_max", c.stiffness_max);
        s->read("stiffness_min", c.stiffness_min);
        s->finish();
    }
    if (auto s = root.sub("lipschitz")) {
        s->read("mu", c.lipschitz.mu);
        s->read("samples", c.lipschitz.samples);
        s->read("iterations", c.lipschitz.iterations);
        s->read("sigma", c.lipschitz.sigma);
        s->read("beta", c.lipschitz.beta);
        s->read("t0", c.lipschitz.t0);
        s->read("max_backtracks", c.lipschitz.max_backtracks);
        s->finish();
    }
    if (auto s = root.sub("deterministic")) {
        s->read("sigma", c.deterministic.sigma);
        s->read("beta", c.deterministic.beta);
        s->read("t0", c.deterministic.t0);
        s->read("warmup_steps", c.deterministic.warmup_steps);
        s->read("max_inner", c.deterministic.max_inner);
        s->read("max_backtracks", c.deterministic.max_backtracks);
        s->read("tol", c.deterministic.tol);
        s->finish();
    }
    root.read("output_dir", c.output_dir);
    root.finish();
    a.seed = c.seed;
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("config", path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json(config).dump(2) << '\n';
}

void apply_override(json& tree, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key.path=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        value = text;
    }
    json* node = &tree;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError(key, "empty path component");
        if (!node->is_object()) throw ConfigError(key, "not an object at '" + part + "'");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

std::string config_hash(const RunConfig& config) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : to_json(config).dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ShapeManifest build_shapes(const RunConfig& c) {
    ShapeManifest m;
    if (!c.shape_manifest.empty()) {
        m = load_shape_manifest(c.shape_manifest);
    } else {
        const double seg = c.mesh.near_shape_edge_length > 0.0 ? c.mesh.near_shape_edge_length : c.mesh.target_edge_length;
        m.shapes = initial_triangles(c.barycenters, c.shape_area, seg);
    }
    if (m.constraints.size() == 0) {
        m.constraints = constraints_around(m.shapes, c.box_lower_offset, c.box_upper_offset);
        if (!c.volume_lower.empty()) {
            if (c.volume_lower.size() != m.shapes.size())
                throw ConfigError("constraints.volume_lower", "needs one entry per shape or none");
            m.constraints.volume_lower = c.volume_lower;
        }
    }
    return m;
}

AlgorithmParams algorithm_params(const RunConfig& c) {
    AlgorithmParams a = c.algorithm;
    a.seed = c.seed;
    return a;
}

Problem build_problem(const RunConfig& c) {
    Problem pb;
    pb.mesh_spec = c.mesh;
    pb.mesh_spec.domain = c.domain;
    pb.nu = c.nu;
    if (c.force != Vec2::Zero()) {
        const Vec2 f = c.force;
        pb.force.value = [f](const Vec2&) { return f; };
        pb.force.jacobian = [](const Vec2&) { return Eigen::Matrix2d::Zero().eval(); };
    }
    pb.field = FieldParams::for_domain(c.domain, c.eta);
    pb.solver = c.solver;
    pb.remesh_threshold = c.remesh_threshold;
    pb.stiffness_max = c.stiffness_max;
    pb.stiffness_min = c.stiffness_min;
    if (!c.mesh_file.empty()) {
        const std::filesystem::path p(c.mesh_file);
        pb.mesh = p.extension() == ".msh" ? load_msh(p) : load_native(p);
        validate(pb.mesh);
        if (!c.shape_manifest.empty()) {
            pb.constraints = build_shapes(c).constraints;
        } else {
            const auto shapes = pb.mesh.shape_polylines();
            pb.constraints = constraints_around(shapes, c.box_lower_offset, c.box_upper_offset);
            if (!c.volume_lower.empty()) pb.constraints.volume_lower = c.volume_lower;
        }
        if (pb.constraints.size() != pb.mesh.num_shapes())
            throw ConfigError("constraints", "one entry per mesh shape expected");
    } else {
        const ShapeManifest m = build_shapes(c);
        check_shapes(c.domain, m.shapes);
        pb.mesh = generate_benchmark(c.domain, m.shapes, pb.mesh_spec);
        pb.constraints = m.constraints;
    }
    pb.constraints.check();
    return pb;
}

Sample parse_xi(const std::string& text) {
    Sample xi{};
    if (text == "-1" || text == "0" || text == "1") {
        xi.fill(std::stod(text));
        return xi;
    }
    std::ifstream in(text);
    if (!in) throw ConfigError("xi", "expected -1, 0, 1 or a CSV file, got '" + text + "'");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        std::stringstream ss(line);
        std::string cell;
        int i = 0;
        while (std::getline(ss, cell, ',')) {
            if (i >= kNumModes) throw ConfigError("xi", "more than " + std::to_string(kNumModes) + " coefficients");
            try {
                xi[i++] = std::stod(cell);
            } catch (const std::exception&) {
                throw ConfigError("xi", "not a number: '" + cell + "'");
            }
        }
        if (i != kNumModes) throw ConfigError("xi", "expected " + std::to_string(kNumModes) + " coefficients");
        for (double v : xi)
            if (!(v >= -1.0 && v <= 1.0)) throw ConfigError("xi", "coefficients must lie in [-1, 1]");
        return xi;
    }
    throw ConfigError("xi", "no coefficients in " + text);
}

}  // namespace msopt
