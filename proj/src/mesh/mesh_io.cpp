#include "msopt/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace msopt {

namespace {

int group_of(const BoundaryTag& tag) {
    switch (tag.kind) {
        case BoundaryTag::Kind::OuterDirichlet: return 1;
        case BoundaryTag::Kind::OuterNeumann: return 2;
        case BoundaryTag::Kind::Shape: return 10 + tag.shape + 1;
    }
    return 0;
}

BoundaryTag tag_of_group(int g) {
    if (g == 1) return BoundaryTag::dirichlet();
    if (g == 2) return BoundaryTag::neumann();
    if (g >= 11 && g < 100) return BoundaryTag::shape_boundary(g - 11);
    throw MeshError("unknown physical group " + std::to_string(g) + " on a boundary line");
}

void expect(std::istream& in, const std::string& token) {
    std::string got;
    if (!(in >> got) || got != token) throw MeshError("malformed mesh file: expected " + token + ", got '" + got + "'");
}

// Fills boundary tags and shape loops after the raw arrays are read.
void finish_import(TriMesh& mesh) {
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : mesh.triangles)
        for (int i = 0; i < 3; ++i) ++count[std::minmax(t[i], t[(i + 1) % 3])];
    std::map<std::pair<int, int>, BoundaryTag> tags;
    for (const BoundaryEdge& e : mesh.boundary_edges) tags[std::minmax(e.v[0], e.v[1])] = e.tag;
    for (const auto& [k, n] : count) {
        if (n > 2) throw MeshError("non-manifold edge");
        if (n == 1 && !tags.count(k)) throw MeshError("untagged boundary edge");
    }
    // Keep the boundary edges oriented with the domain on their left.
    mesh.boundary_edges.clear();
    for (const auto& t : mesh.triangles)
        for (int i = 0; i < 3; ++i) {
            const int a = t[i];
            const int b = t[(i + 1) % 3];
            const auto k = std::minmax(a, b);
            if (count[k] == 1) mesh.boundary_edges.push_back({{a, b}, tags.at(k)});
        }
    mesh.shape_vertex_map = chain_shape_loops(mesh);
    validate(mesh);
}

}  // namespace

TriMesh load_msh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open " + path.string());

    std::string section;
    std::map<long, int> node_index;
    std::vector<Vec2> nodes;
    std::vector<std::array<long, 3>> tris;
    std::vector<std::pair<std::array<long, 2>, int>> lines;
    bool have_format = false;

    while (in >> section) {
        if (section == "$MeshFormat") {
            std::string version;
            int file_type = 0, data_size = 0;
            in >> version >> file_type >> data_size;
            if (version.rfind("2.2", 0) != 0) throw MeshError("unsupported MSH version " + version);
            if (file_type != 0) throw MeshError("binary MSH files are not supported");
            expect(in, "$EndMeshFormat");
            have_format = true;
        } else if (section == "$Nodes") {
            long n = 0;
            in >> n;
            for (long k = 0; k < n; ++k) {
                long id = 0;
                double x = 0, y = 0, z = 0;
                if (!(in >> id >> x >> y >> z)) throw MeshError("malformed $Nodes section");
                node_index[id] = static_cast<int>(nodes.size());
                nodes.emplace_back(x, y);
            }
            expect(in, "$EndNodes");
        } else if (section == "$Elements") {
            long n = 0;
            in >> n;
            std::string line;
            std::getline(in, line);
            for (long k = 0; k < n; ++k) {
                if (!std::getline(in, line)) throw MeshError("malformed $Elements section");
                std::istringstream ls(line);
                long id = 0;
                int type = 0, ntags = 0;
                ls >> id >> type >> ntags;
                std::vector<long> tags(ntags);
                for (auto& t : tags) ls >> t;
                const int physical = ntags > 0 ? static_cast<int>(tags[0]) : 0;
                if (type == 1) {
                    std::array<long, 2> v{};
                    ls >> v[0] >> v[1];
                    if (physical == 0) throw MeshError("untagged boundary line element");
                    lines.emplace_back(v, physical);
                } else if (type == 2) {
                    std::array<long, 3> v{};
                    ls >> v[0] >> v[1] >> v[2];
                    tris.push_back(v);
                } else if (type != 15) {
                    throw MeshError("unsupported element type " + std::to_string(type));
                }
                if (!ls) throw MeshError("malformed element line: " + line);
            }
            expect(in, "$EndElements");
        } else if (!section.empty() && section[0] == '$' && section.rfind("$End", 0) != 0) {
            // Skip unknown sections such as $PhysicalNames.
            const std::string end = "$End" + section.substr(1);
            std::string tok;
            while (in >> tok && tok != end) {
            }
        }
    }
    if (!have_format) throw MeshError("missing $MeshFormat section");
    if (tris.empty()) throw MeshError("mesh file contains no triangles");

    auto node = [&](long id) {
        auto it = node_index.find(id);
        if (it == node_index.end()) throw MeshError("element references unknown node " + std::to_string(id));
        return it->second;
    };
    // Drop nodes that no triangle uses (geometry points, for instance).
    std::vector<int> remap(nodes.size(), -1);
    TriMesh mesh;
    for (const auto& t : tris)
        for (long id : t) remap[node(id)] = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k)
        if (remap[k] == 0) {
            remap[k] = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back(nodes[k]);
        }
    for (const auto& t : tris) {
        std::array<int, 3> v{remap[node(t[0])], remap[node(t[1])], remap[node(t[2])]};
        mesh.triangles.push_back(v);
        if (mesh.signed_area(mesh.num_triangles() - 1) < 0.0) std::swap(mesh.triangles.back()[1], mesh.triangles.back()[2]);
    }
    for (const auto& [v, g] : lines) {
        const int a = remap[node(v[0])];
        const int b = remap[node(v[1])];
        if (a < 0 || b < 0) throw MeshError("boundary line element off the triangulation");
        mesh.boundary_edges.push_back({{a, b}, tag_of_group(g)});
    }
    finish_import(mesh);
    return mesh;
}

void save_msh(const TriMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write " + path.string());
    out << std::setprecision(17);
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    out << "$Nodes\n" << mesh.num_vertices() << "\n";
    for (int v = 0; v < mesh.num_vertices(); ++v)
        out << v + 1 << ' ' << mesh.vertices[v].x() << ' ' << mesh.vertices[v].y() << " 0\n";
    out << "$EndNodes\n";
    out << "$Elements\n" << mesh.boundary_edges.size() + mesh.triangles.size() << "\n";
    long id = 1;
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        const int g = group_of(e.tag);
        out << id++ << " 1 2 " << g << ' ' << g << ' ' << e.v[0] + 1 << ' ' << e.v[1] + 1 << "\n";
    }
    for (const auto& t : mesh.triangles)
        out << id++ << " 2 2 100 100 " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << "\n";
    out << "$EndElements\n";
    if (!out) throw MeshError("failed writing " + path.string());
}

void write_native(const TriMesh& mesh, std::ostream& out) {
    out << std::setprecision(17);
    out << "msopt-mesh 1\n";
    out << "vertices " << mesh.num_vertices() << "\n";
    for (const Vec2& x : mesh.vertices) out << x.x() << ' ' << x.y() << "\n";
    out << "triangles " << mesh.num_triangles() << "\n";
    for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
    out << "boundary_edges " << mesh.boundary_edges.size() << "\n";
    for (const BoundaryEdge& e : mesh.boundary_edges)
        out << e.v[0] << ' ' << e.v[1] << ' ' << group_of(e.tag) << "\n";
    out << "shapes " << mesh.num_shapes() << "\n";
    for (const auto& loop : mesh.shape_vertex_map) {
        out << loop.size();
        for (int v : loop) out << ' ' << v;
        out << "\n";
    }
}

TriMesh read_native(std::istream& in) {
    TriMesh mesh;
    int version = 0;
    expect(in, "msopt-mesh");
    in >> version;
    if (version != 1) throw MeshError("unsupported native mesh version " + std::to_string(version));
    std::size_t n = 0;
    expect(in, "vertices");
    in >> n;
    mesh.vertices.resize(n);
    for (auto& x : mesh.vertices) in >> x.x() >> x.y();
    expect(in, "triangles");
    in >> n;
    mesh.triangles.resize(n);
    for (auto& t : mesh.triangles) in >> t[0] >> t[1] >> t[2];
    expect(in, "boundary_edges");
    in >> n;
    mesh.boundary_edges.resize(n);
    for (auto& e : mesh.boundary_edges) {
        int g = 0;
        in >> e.v[0] >> e.v[1] >> g;
        e.tag = tag_of_group(g);
    }
    expect(in, "shapes");
    in >> n;
    mesh.shape_vertex_map.resize(n);
    for (auto& loop : mesh.shape_vertex_map) {
        std::size_t m = 0;
        in >> m;
        loop.resize(m);
        for (int& v : loop) in >> v;
    }
    if (!in) throw MeshError("truncated native mesh");
    validate(mesh);
    return mesh;
}

TriMesh load_native(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open " + path.string());
    return read_native(in);
}

void save_native(const TriMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write " + path.string());
    write_native(mesh, out);
    if (!out) throw MeshError("failed writing " + path.string());
}

}  // namespace msopt
