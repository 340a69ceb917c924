#pragma once

// Incremental constrained Delaunay triangulation with Ruppert-style
// refinement. Internal to the mesh module.

#include "msopt/mesh.hpp"

#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace msopt::detail {

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c);
/// Positive when d lies strictly inside the circumcircle of CCW (a, b, c).
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);
Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c);

class Cdt {
public:
    struct Tri {
        std::array<int, 3> v{};
        std::array<int, 3> n{-1, -1, -1};  // neighbour across the edge opposite v[i]
        std::array<bool, 3> c{};           // edge opposite v[i] is constrained
        int region = -1;                   // -1 unknown, 0 outside, 1 domain
    };

    /// A closed boundary loop. Segments are (verts[i], verts[i+1 mod n]).
    struct Chain {
        std::vector<int> verts;
        bool splittable = true;
    };

    explicit Cdt(const Rectangle& bbox);

    int add_vertex(const Vec2& p);
    /// Adds a closed loop of existing vertices as constrained segments.
    int add_chain(std::vector<int> verts, std::vector<BoundaryTag> segment_tags, bool splittable);

    /// Recovers all chain segments, classifies regions. `interior_left[c]` says
    /// whether the domain lies to the left of chain c.
    void finalize_constraints(const std::vector<bool>& interior_left);

    /// Inserts Steiner points until no domain triangle is bad under `sizing`.
    void refine(const std::function<double(const Vec2&)>& sizing, double min_quality,
                double size_factor, int max_points);

    void smooth(int sweeps);

    TriMesh extract(const std::vector<int>& shape_chain_ids) const;

    const std::vector<Vec2>& points() const { return pts_; }
    const std::vector<Tri>& tris() const { return tris_; }

private:
    struct Location {
        enum Kind { Inside, OnEdge, OnVertex, Blocked, Failed } kind = Failed;
        int tri = -1;
        int index = -1;  // edge (opposite vertex index) or vertex index
    };

    struct SegmentInfo {
        BoundaryTag tag;
        int chain = -1;
    };

    static std::pair<int, int> key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

    Location locate(const Vec2& p, int start, bool stop_at_constraints) const;
    int insert_in_triangle(int t, const Vec2& p);
    int insert_on_edge(int t, int i, const Vec2& p);
    void legalize(int t, int i);
    void flip(int t, int i);
    void set_neighbor(int t, int old_nb, int new_nb);
    void touch(int t);
    std::vector<int> incident_triangles(int v) const;
    bool find_edge(int a, int b, int& t, int& i) const;
    void recover_segment(int a, int b);
    void mark_constrained(int a, int b);
    void flood(int start, int region);
    void make_delaunay();
    int split_segment(int a, int b);
    bool is_bad(int t, const std::function<double(const Vec2&)>& sizing, double min_quality,
                double size_factor) const;

    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    std::vector<int> vtri_;  // one incident triangle per vertex
    std::vector<Chain> chains_;
    std::map<std::pair<int, int>, SegmentInfo> segments_;
    std::vector<bool> on_segment_;  // vertex lies on a constrained segment
    double scale_ = 1.0;
};

}  // namespace msopt::detail
