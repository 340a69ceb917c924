#include "cdt.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace msopt::detail {

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return ad * (bdx * cdy - cdx * bdy) + bd * (cdx * ady - adx * cdy) + cd * (adx * bdy - bdx * ady);
}

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
    const Vec2 ba = b - a;
    const Vec2 ca = c - a;
    const double d = 2.0 * (ba.x() * ca.y() - ba.y() * ca.x());
    const double b2 = ba.squaredNorm();
    const double c2 = ca.squaredNorm();
    return a + Vec2{(ca.y() * b2 - ba.y() * c2) / d, (ba.x() * c2 - ca.x() * b2) / d};
}

namespace {

int index_of(const Cdt::Tri& t, int v) {
    for (int k = 0; k < 3; ++k)
        if (t.v[k] == v) return k;
    return -1;
}

bool incircle_violated(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double l = std::max({(a - d).squaredNorm(), (b - d).squaredNorm(), (c - d).squaredNorm()});
    return incircle(a, b, c, d) > 1e-12 * l * l;
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& p, const Vec2& q) {
    const double o1 = orient2d(a, b, p);
    const double o2 = orient2d(a, b, q);
    const double o3 = orient2d(p, q, a);
    const double o4 = orient2d(p, q, b);
    return o1 * o2 < 0.0 && o3 * o4 < 0.0;
}

}  // namespace

Cdt::Cdt(const Rectangle& bbox) {
    scale_ = std::max(bbox.width(), bbox.height());
    const Vec2 center{0.5 * (bbox.xmin + bbox.xmax), 0.5 * (bbox.ymin + bbox.ymax)};
    const double r = 20.0 * scale_;
    const double pi = std::acos(-1.0);
    for (double deg : {90.0, 210.0, 330.0}) {
        const double th = deg * pi / 180.0;
        pts_.push_back(center + r * Vec2{std::cos(th), std::sin(th)});
    }
    Tri t;
    t.v = {0, 1, 2};
    tris_.push_back(t);
    vtri_ = {0, 0, 0};
    on_segment_ = {false, false, false};
}

int Cdt::add_vertex(const Vec2& p) {
    const Location loc = locate(p, vtri_.back(), false);
    switch (loc.kind) {
        case Location::Inside: return insert_in_triangle(loc.tri, p);
        case Location::OnEdge: return insert_on_edge(loc.tri, loc.index, p);
        case Location::OnVertex: throw MeshError("duplicate boundary vertex");
        default: throw MeshError("point location failed");
    }
}

int Cdt::add_chain(std::vector<int> verts, std::vector<BoundaryTag> segment_tags, bool splittable) {
    const int id = static_cast<int>(chains_.size());
    const int n = static_cast<int>(verts.size());
    for (int k = 0; k < n; ++k) {
        const int a = verts[k];
        const int b = verts[(k + 1) % n];
        segments_[key(a, b)] = SegmentInfo{segment_tags[k], id};
        on_segment_[a] = true;
    }
    chains_.push_back(Chain{std::move(verts), splittable});
    return id;
}

Cdt::Location Cdt::locate(const Vec2& p, int start, bool stop_at_constraints) const {
    auto classify = [&](int t) -> Location {
        const Tri& T = tris_[t];
        const double eps = 1e-11 * scale_;
        for (int k = 0; k < 3; ++k)
            if ((pts_[T.v[k]] - p).norm() < eps) return {Location::OnVertex, t, k};
        for (int i = 0; i < 3; ++i) {
            const Vec2& a = pts_[T.v[(i + 1) % 3]];
            const Vec2& b = pts_[T.v[(i + 2) % 3]];
            if (std::abs(orient2d(a, b, p)) / (b - a).norm() < eps) return {Location::OnEdge, t, i};
        }
        return {Location::Inside, t, -1};
    };

    int t = start;
    int prev = -1;
    const std::size_t max_steps = 4 * tris_.size() + 64;
    for (std::size_t step = 0; step < max_steps; ++step) {
        const Tri& T = tris_[t];
        int via = -1;
        for (int k = 0; k < 3; ++k) {
            const int i = static_cast<int>((k + step) % 3);
            if (prev >= 0 && T.n[i] == prev) continue;
            if (orient2d(pts_[T.v[(i + 1) % 3]], pts_[T.v[(i + 2) % 3]], p) < 0.0) {
                via = i;
                break;
            }
        }
        if (via < 0) return classify(t);
        if (stop_at_constraints && T.c[via]) return {Location::Blocked, t, via};
        if (T.n[via] < 0) return {Location::Failed, t, via};
        prev = t;
        t = T.n[via];
    }
    // The walk cycled; fall back to a scan.
    for (int s = 0; s < static_cast<int>(tris_.size()); ++s) {
        const Tri& T = tris_[s];
        bool inside = true;
        for (int i = 0; i < 3 && inside; ++i)
            inside = orient2d(pts_[T.v[(i + 1) % 3]], pts_[T.v[(i + 2) % 3]], p) >= 0.0;
        if (inside) return classify(s);
    }
    return {};
}

void Cdt::set_neighbor(int t, int old_nb, int new_nb) {
    if (t < 0) return;
    for (int& nb : tris_[t].n)
        if (nb == old_nb) {
            nb = new_nb;
            return;
        }
}

void Cdt::touch(int t) {
    for (int v : tris_[t].v) vtri_[v] = t;
}

int Cdt::insert_in_triangle(int t, const Vec2& p) {
    const int pv = static_cast<int>(pts_.size());
    pts_.push_back(p);
    vtri_.push_back(t);
    on_segment_.push_back(false);

    const Tri old = tris_[t];
    const int t0 = t;
    const int t1 = static_cast<int>(tris_.size());
    const int t2 = t1 + 1;
    tris_.resize(tris_.size() + 2);
    const auto [v0, v1, v2] = old.v;
    tris_[t0] = Tri{{pv, v1, v2}, {old.n[0], t1, t2}, {old.c[0], false, false}, old.region};
    tris_[t1] = Tri{{pv, v2, v0}, {old.n[1], t2, t0}, {old.c[1], false, false}, old.region};
    tris_[t2] = Tri{{pv, v0, v1}, {old.n[2], t0, t1}, {old.c[2], false, false}, old.region};
    set_neighbor(old.n[1], t, t1);
    set_neighbor(old.n[2], t, t2);
    touch(t0);
    touch(t1);
    touch(t2);
    legalize(t0, 0);
    legalize(t1, 0);
    legalize(t2, 0);
    return pv;
}

int Cdt::insert_on_edge(int t, int i, const Vec2& p) {
    // p is kept verbatim: input vertices must survive bit for bit. Being within
    // rounding of the edge, it lies inside the union of the two triangles.
    const Tri T = tris_[t];
    const int x = T.v[i];
    const int a = T.v[(i + 1) % 3];
    const int b = T.v[(i + 2) % 3];

    const int pv = static_cast<int>(pts_.size());
    pts_.push_back(p);
    vtri_.push_back(t);
    on_segment_.push_back(false);

    const bool cab = T.c[i];
    const int tn_a = T.n[(i + 1) % 3];  // edge (b, x)
    const bool tc_a = T.c[(i + 1) % 3];
    const int tn_b = T.n[(i + 2) % 3];  // edge (x, a)
    const bool tc_b = T.c[(i + 2) % 3];
    const int u = T.n[i];

    const int t1 = t;
    const int t2 = static_cast<int>(tris_.size());
    tris_.emplace_back();
    if (u < 0) {
        tris_[t1] = Tri{{x, a, pv}, {-1, t2, tn_b}, {cab, false, tc_b}, T.region};
        tris_[t2] = Tri{{x, pv, b}, {-1, tn_a, t1}, {cab, tc_a, false}, T.region};
        set_neighbor(tn_a, t, t2);
        touch(t1);
        touch(t2);
        legalize(t1, 2);
        legalize(t2, 1);
        return pv;
    }

    const Tri U = tris_[u];
    int j = 0;
    while (U.n[j] != t) ++j;
    const int y = U.v[j];
    const int un_b = U.n[(j + 1) % 3];  // edge (a, y)
    const bool uc_b = U.c[(j + 1) % 3];
    const int un_a = U.n[(j + 2) % 3];  // edge (y, b)
    const bool uc_a = U.c[(j + 2) % 3];

    const int u1 = u;
    const int u2 = static_cast<int>(tris_.size());
    tris_.emplace_back();
    tris_[t1] = Tri{{x, a, pv}, {u2, t2, tn_b}, {cab, false, tc_b}, T.region};
    tris_[t2] = Tri{{x, pv, b}, {u1, tn_a, t1}, {cab, tc_a, false}, T.region};
    tris_[u1] = Tri{{y, b, pv}, {t2, u2, un_a}, {cab, false, uc_a}, U.region};
    tris_[u2] = Tri{{y, pv, a}, {t1, un_b, u1}, {cab, uc_b, false}, U.region};
    set_neighbor(tn_a, t, t2);
    set_neighbor(un_b, u, u2);
    touch(t1);
    touch(t2);
    touch(u1);
    touch(u2);
    legalize(t1, 2);
    legalize(t2, 1);
    legalize(u1, 2);
    legalize(u2, 1);
    return pv;
}

void Cdt::flip(int t, int i) {
    const Tri T = tris_[t];
    const int u = T.n[i];
    const Tri U = tris_[u];
    int j = 0;
    while (U.n[j] != t) ++j;
    const int p = T.v[i];
    const int a = T.v[(i + 1) % 3];
    const int b = T.v[(i + 2) % 3];
    const int q = U.v[j];

    const int tn_a = T.n[(i + 1) % 3];  // edge (b, p)
    const bool tc_a = T.c[(i + 1) % 3];
    const int tn_b = T.n[(i + 2) % 3];  // edge (p, a)
    const bool tc_b = T.c[(i + 2) % 3];
    const int un_b = U.n[(j + 1) % 3];  // edge (a, q)
    const bool uc_b = U.c[(j + 1) % 3];
    const int un_a = U.n[(j + 2) % 3];  // edge (q, b)
    const bool uc_a = U.c[(j + 2) % 3];

    tris_[t] = Tri{{p, a, q}, {un_b, u, tn_b}, {uc_b, false, tc_b}, T.region};
    tris_[u] = Tri{{q, b, p}, {tn_a, t, un_a}, {tc_a, false, uc_a}, U.region};
    set_neighbor(un_b, u, t);
    set_neighbor(tn_a, t, u);
    touch(t);
    touch(u);
}

void Cdt::legalize(int t0, int i0) {
    const int p = tris_[t0].v[i0];
    std::vector<int> stack{t0};
    while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        const Tri& T = tris_[t];
        const int i = index_of(T, p);
        if (i < 0) continue;
        const int u = T.n[i];
        if (u < 0 || T.c[i]) continue;
        const Tri& U = tris_[u];
        int j = 0;
        while (U.n[j] != t) ++j;
        if (incircle_violated(pts_[T.v[0]], pts_[T.v[1]], pts_[T.v[2]], pts_[U.v[j]])) {
            flip(t, i);
            stack.push_back(t);
            stack.push_back(u);
        }
    }
}

std::vector<int> Cdt::incident_triangles(int v) const {
    std::vector<int> out;
    const int t0 = vtri_[v];
    int t = t0;
    bool closed = false;
    for (std::size_t guard = 0; guard < tris_.size(); ++guard) {
        out.push_back(t);
        const Tri& T = tris_[t];
        const int nx = T.n[(index_of(T, v) + 1) % 3];
        if (nx < 0) break;
        if (nx == t0) {
            closed = true;
            break;
        }
        t = nx;
    }
    if (!closed) {
        t = t0;
        for (std::size_t guard = 0; guard < tris_.size(); ++guard) {
            const Tri& T = tris_[t];
            const int nx = T.n[(index_of(T, v) + 2) % 3];
            if (nx < 0 || nx == t0) break;
            out.push_back(nx);
            t = nx;
        }
    }
    return out;
}

bool Cdt::find_edge(int a, int b, int& t, int& i) const {
    for (int s : incident_triangles(a)) {
        const Tri& T = tris_[s];
        const int k = index_of(T, a);
        if (T.v[(k + 1) % 3] == b) {
            t = s;
            i = (k + 2) % 3;
            return true;
        }
        if (T.v[(k + 2) % 3] == b) {
            t = s;
            i = (k + 1) % 3;
            return true;
        }
    }
    return false;
}

void Cdt::mark_constrained(int a, int b) {
    int t = -1, i = -1;
    if (!find_edge(a, b, t, i)) throw MeshError("segment recovery failed");
    tris_[t].c[i] = true;
    const int u = tris_[t].n[i];
    if (u >= 0) {
        for (int j = 0; j < 3; ++j)
            if (tris_[u].n[j] == t) tris_[u].c[j] = true;
    }
}

void Cdt::recover_segment(int a, int b) {
    int t = -1, i = -1;
    if (find_edge(a, b, t, i)) {
        mark_constrained(a, b);
        return;
    }
    const Vec2& A = pts_[a];
    const Vec2& B = pts_[b];

    // Walk from a towards b, collecting the crossed edges.
    std::deque<std::pair<int, int>> crossing;
    int cur = -1, c = -1, d = -1;
    for (int s : incident_triangles(a)) {
        const Tri& T = tris_[s];
        const int k = index_of(T, a);
        const int vc = T.v[(k + 1) % 3];
        const int vd = T.v[(k + 2) % 3];
        const double o1 = orient2d(A, pts_[vc], B);
        const double o2 = orient2d(A, B, pts_[vd]);
        if ((o1 == 0.0 && (pts_[vc] - A).dot(B - A) > 0.0) || (o2 == 0.0 && (pts_[vd] - A).dot(B - A) > 0.0))
            throw MeshError("vertex lies on a boundary segment");
        if (o1 > 0.0 && o2 > 0.0) {
            cur = s;
            c = vc;
            d = vd;
            break;
        }
    }
    if (cur < 0) throw MeshError("segment recovery failed: no starting triangle");

    for (std::size_t guard = 0; guard < tris_.size(); ++guard) {
        crossing.emplace_back(c, d);
        const Tri& T = tris_[cur];
        const int opp = 3 - index_of(T, c) - index_of(T, d);
        const int u = T.n[opp];
        if (u < 0) throw MeshError("segment recovery left the triangulation");
        const Tri& U = tris_[u];
        const int e = U.v[3 - index_of(U, c) - index_of(U, d)];
        cur = u;
        if (e == b) break;
        const double o = orient2d(A, B, pts_[e]);
        if (o == 0.0) throw MeshError("vertex lies on a boundary segment");
        if (o > 0.0)
            d = e;
        else
            c = e;
    }

    const std::size_t max_iter = 50 * crossing.size() * crossing.size() + 1000;
    for (std::size_t iter = 0; !crossing.empty(); ++iter) {
        if (iter > max_iter) throw MeshError("segment recovery did not terminate");
        const auto [ec, ed] = crossing.front();
        crossing.pop_front();
        if (!find_edge(ec, ed, t, i)) continue;
        const Tri& T = tris_[t];
        const int u = T.n[i];
        const Tri& U = tris_[u];
        int j = 0;
        while (U.n[j] != t) ++j;
        const int p = T.v[i];
        const int q = U.v[j];
        const Vec2& pa = pts_[T.v[(i + 1) % 3]];
        const Vec2& pb = pts_[T.v[(i + 2) % 3]];
        const bool convex = orient2d(pts_[p], pa, pts_[q]) > 0.0 && orient2d(pts_[q], pb, pts_[p]) > 0.0;
        if (!convex) {
            crossing.emplace_back(ec, ed);
            continue;
        }
        flip(t, i);
        const bool is_target = (p == a && q == b) || (p == b && q == a);
        if (!is_target && p != a && p != b && q != a && q != b && segments_cross(A, B, pts_[p], pts_[q]))
            crossing.emplace_back(p, q);
    }
    mark_constrained(a, b);
}

void Cdt::make_delaunay() {
    for (int pass = 0; pass < 1000; ++pass) {
        bool flipped = false;
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            for (int i = 0; i < 3; ++i) {
                const Tri& T = tris_[t];
                const int u = T.n[i];
                if (u < 0 || T.c[i]) continue;
                const Tri& U = tris_[u];
                int j = 0;
                while (U.n[j] != t) ++j;
                if (incircle_violated(pts_[T.v[0]], pts_[T.v[1]], pts_[T.v[2]], pts_[U.v[j]])) {
                    flip(t, i);
                    flipped = true;
                }
            }
        }
        if (!flipped) return;
    }
}

void Cdt::flood(int start, int region) {
    if (tris_[start].region != -1) return;
    std::vector<int> stack{start};
    tris_[start].region = region;
    while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        for (int i = 0; i < 3; ++i) {
            const int u = tris_[t].n[i];
            if (u < 0 || tris_[t].c[i] || tris_[u].region != -1) continue;
            tris_[u].region = region;
            stack.push_back(u);
        }
    }
}

void Cdt::finalize_constraints(const std::vector<bool>& interior_left) {
    for (const Chain& ch : chains_) {
        const int n = static_cast<int>(ch.verts.size());
        for (int k = 0; k < n; ++k) recover_segment(ch.verts[k], ch.verts[(k + 1) % n]);
    }
    make_delaunay();

    for (Tri& t : tris_) t.region = -1;
    flood(vtri_[0], 0);
    for (std::size_t c = 0; c < chains_.size(); ++c) {
        const int a = chains_[c].verts[0];
        const int b = chains_[c].verts[1];
        int t = -1, i = -1;
        if (!find_edge(a, b, t, i)) throw MeshError("segment missing after recovery");
        const bool left_of_ab = tris_[t].v[(i + 1) % 3] == a;
        const int side = left_of_ab ? t : tris_[t].n[i];
        if (side < 0) throw MeshError("boundary loop touches the bounding triangle");
        if (interior_left[c]) {
            if (tris_[side].region == 0) throw MeshError("overlapping boundary loops");
            flood(side, 1);
        } else {
            flood(side, 0);
        }
    }
    for (const Tri& t : tris_)
        if (t.region == -1) throw MeshError("unclassified region; boundary loops overlap");
}

bool Cdt::is_bad(int t, const std::function<double(const Vec2&)>& sizing, double min_quality,
                 double size_factor) const {
    const Tri& T = tris_[t];
    const Vec2& a = pts_[T.v[0]];
    const Vec2& b = pts_[T.v[1]];
    const Vec2& c = pts_[T.v[2]];
    if (radius_ratio(a, b, c) < min_quality) return true;
    const double r = (circumcenter(a, b, c) - a).norm();
    return r > size_factor * sizing((a + b + c) / 3.0);
}

int Cdt::split_segment(int a, int b) {
    int t = -1, i = -1;
    if (!find_edge(a, b, t, i)) throw MeshError("segment to split not found");
    const SegmentInfo info = segments_.at(key(a, b));
    const int m = insert_on_edge(t, i, 0.5 * (pts_[a] + pts_[b]));
    on_segment_[m] = true;
    segments_.erase(key(a, b));
    segments_[key(a, m)] = info;
    segments_[key(m, b)] = info;
    auto& verts = chains_[info.chain].verts;
    const int n = static_cast<int>(verts.size());
    for (int k = 0; k < n; ++k) {
        const int va = verts[k];
        const int vb = verts[(k + 1) % n];
        if ((va == a && vb == b) || (va == b && vb == a)) {
            verts.insert(verts.begin() + k + 1, m);
            break;
        }
    }
    return m;
}

void Cdt::refine(const std::function<double(const Vec2&)>& sizing, double min_quality, double size_factor,
                 int max_points) {
    std::deque<int> queue;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
        if (tris_[t].region == 1 && is_bad(t, sizing, min_quality, size_factor)) queue.push_back(t);

    std::set<std::array<int, 3>> given_up;
    int inserted = 0;
    auto enqueue_around = [&](int v) {
        for (int s : incident_triangles(v))
            if (tris_[s].region == 1 && is_bad(s, sizing, min_quality, size_factor)) queue.push_back(s);
    };
    auto try_split = [&](int a, int b) -> bool {
        const SegmentInfo& info = segments_.at(key(a, b));
        if (!chains_[info.chain].splittable) return false;
        const int m = split_segment(a, b);
        ++inserted;
        enqueue_around(m);
        return true;
    };

    while (!queue.empty()) {
        const int t = queue.front();
        queue.pop_front();
        if (tris_[t].region != 1 || !is_bad(t, sizing, min_quality, size_factor)) continue;
        if (given_up.count(tris_[t].v)) continue;
        if (inserted > max_points) throw MeshError("refinement failure: point budget exhausted");

        const Tri& T = tris_[t];
        const Vec2 cc = circumcenter(pts_[T.v[0]], pts_[T.v[1]], pts_[T.v[2]]);
        const Location loc = locate(cc, t, true);
        if (loc.kind == Location::Blocked) {
            const Tri& B = tris_[loc.tri];
            if (try_split(B.v[(loc.index + 1) % 3], B.v[(loc.index + 2) % 3]))
                queue.push_back(t);
            else
                given_up.insert(tris_[t].v);
            continue;
        }
        if (loc.kind == Location::Failed || loc.kind == Location::OnVertex || tris_[loc.tri].region != 1) {
            given_up.insert(tris_[t].v);
            continue;
        }

        // Segments whose diametral circle contains the new point are split instead.
        std::vector<std::pair<int, int>> encroached;
        {
            std::vector<int> cavity{loc.tri};
            std::set<int> seen{loc.tri};
            for (std::size_t k = 0; k < cavity.size(); ++k) {
                const Tri& C = tris_[cavity[k]];
                for (int i = 0; i < 3; ++i) {
                    const int a = C.v[(i + 1) % 3];
                    const int b = C.v[(i + 2) % 3];
                    if (C.c[i]) {
                        if ((pts_[a] - cc).dot(pts_[b] - cc) < 0.0) encroached.emplace_back(a, b);
                        continue;
                    }
                    const int u = C.n[i];
                    if (u < 0 || seen.count(u)) continue;
                    const Tri& U = tris_[u];
                    if (incircle(pts_[U.v[0]], pts_[U.v[1]], pts_[U.v[2]], cc) > 0.0) {
                        seen.insert(u);
                        cavity.push_back(u);
                    }
                }
            }
        }
        bool split_any = false;
        bool blocked = false;
        for (const auto& [a, b] : encroached) {
            if (!segments_.count(key(a, b))) continue;
            if (try_split(a, b))
                split_any = true;
            else
                blocked = true;
        }
        if (split_any) {
            queue.push_back(t);
            continue;
        }
        // Never put a point inside the diametral circle of a fixed segment.
        if (blocked) {
            given_up.insert(tris_[t].v);
            continue;
        }
        if (loc.kind == Location::OnEdge && tris_[loc.tri].c[loc.index]) {
            given_up.insert(tris_[t].v);
            continue;
        }

        const int v = loc.kind == Location::OnEdge ? insert_on_edge(loc.tri, loc.index, cc)
                                                   : insert_in_triangle(loc.tri, cc);
        ++inserted;
        enqueue_around(v);
    }
}

void Cdt::smooth(int sweeps) {
    for (int s = 0; s < sweeps; ++s) {
        for (int v = 3; v < static_cast<int>(pts_.size()); ++v) {
            if (on_segment_[v]) continue;
            const std::vector<int> star = incident_triangles(v);
            bool interior = true;
            for (int t : star) interior = interior && tris_[t].region == 1;
            if (!interior) continue;

            auto star_quality = [&]() {
                double q = 1.0;
                for (int t : star) {
                    const Tri& T = tris_[t];
                    if (orient2d(pts_[T.v[0]], pts_[T.v[1]], pts_[T.v[2]]) <= 0.0) return -1.0;
                    q = std::min(q, radius_ratio(pts_[T.v[0]], pts_[T.v[1]], pts_[T.v[2]]));
                }
                return q;
            };
            Vec2 target = Vec2::Zero();
            int count = 0;
            for (int t : star) {
                const Tri& T = tris_[t];
                for (int w : T.v)
                    if (w != v) {
                        target += pts_[w];
                        ++count;
                    }
            }
            target /= count;  // each neighbour counted twice; the mean is unaffected
            const Vec2 old = pts_[v];
            const double q_old = star_quality();
            pts_[v] = target;
            if (star_quality() < q_old) pts_[v] = old;
        }
        make_delaunay();
    }
}

TriMesh Cdt::extract(const std::vector<int>& shape_chain_ids) const {
    TriMesh mesh;
    std::vector<int> remap(pts_.size(), -1);
    for (const Tri& t : tris_)
        if (t.region == 1)
            for (int v : t.v) remap[v] = 0;
    for (std::size_t v = 0; v < pts_.size(); ++v)
        if (remap[v] == 0) {
            remap[v] = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back(pts_[v]);
        }
    for (const Tri& t : tris_) {
        if (t.region != 1) continue;
        mesh.triangles.push_back({remap[t.v[0]], remap[t.v[1]], remap[t.v[2]]});
        for (int i = 0; i < 3; ++i) {
            if (!t.c[i]) continue;
            const int a = t.v[(i + 1) % 3];
            const int b = t.v[(i + 2) % 3];
            mesh.boundary_edges.push_back(BoundaryEdge{{remap[a], remap[b]}, segments_.at(key(a, b)).tag});
        }
    }
    for (int c : shape_chain_ids) {
        std::vector<int> loop;
        for (int v : chains_[c].verts) loop.push_back(remap[v]);
        mesh.shape_vertex_map.push_back(std::move(loop));
    }
    return mesh;
}

}  // namespace msopt::detail
