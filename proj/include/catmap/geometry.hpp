#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "catmap/error.hpp"
#include "catmap/point.hpp"
#include "catmap/predicates.hpp"

namespace catmap {

/// Undirected edge with first < second.
using Edge = std::pair<std::size_t, std::size_t>;

struct Graph {
    std::size_t vertices = 0;
    std::vector<Edge> edges;

    std::vector<std::vector<std::size_t>> adjacency() const {
        std::vector<std::vector<std::size_t>> adj(vertices);
        for (auto [a, b] : edges) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        return adj;
    }
};

struct DelaunayGraph {
    std::vector<Point2> points;  // sites actually triangulated (duplicates nudged)
    Graph graph;
    std::vector<std::size_t> hull;  // counter-clockwise
    bool collinear = false;         // degenerate input: `graph` is a path along the line
    std::vector<std::pair<std::size_t, std::size_t>> duplicates;  // (kept id, nudged id)

    std::size_t size() const noexcept { return points.size(); }
    const std::vector<Edge>& edges() const noexcept { return graph.edges; }
};

namespace detail {

inline constexpr int kInfinite = -1;

class Triangulator {
public:
    explicit Triangulator(const std::vector<Point2>& pts) : pts_(pts) {}

    /// `order` lists all point ids; its first three must be non-collinear.
    void run(const std::vector<std::size_t>& order) {
        int a = static_cast<int>(order[0]), b = static_cast<int>(order[1]),
            c = static_cast<int>(order[2]);
        if (predicates::orient(pts_[a], pts_[b], pts_[c]) < 0) std::swap(b, c);
        // real triangle 0 and ghosts across each of its edges
        tris_.push_back({{a, b, c}, {1, 2, 3}, true});
        tris_.push_back({{c, b, kInfinite}, {-1, -1, 0}, true});  // across b->c
        tris_.push_back({{a, c, kInfinite}, {-1, -1, 0}, true});  // across c->a
        tris_.push_back({{b, a, kInfinite}, {-1, -1, 0}, true});  // across a->b
        link_ghost_ring();
        last_ = 0;
        for (std::size_t k = 3; k < order.size(); ++k) insert(static_cast<int>(order[k]));
    }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (const auto& t : tris_) {
            if (!t.alive || is_ghost(t)) continue;
            for (int i = 0; i < 3; ++i) {
                auto u = static_cast<std::size_t>(t.v[i]);
                auto w = static_cast<std::size_t>(t.v[(i + 1) % 3]);
                if (u < w) out.emplace_back(u, w);
            }
        }
        // every interior edge is seen once per orientation; hull edges once
        for (const auto& t : tris_) {
            if (!t.alive || !is_ghost(t)) continue;
            int k = infinite_index(t);
            auto u = static_cast<std::size_t>(t.v[(k + 1) % 3]);
            auto w = static_cast<std::size_t>(t.v[(k + 2) % 3]);
            if (u < w) out.emplace_back(u, w);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    std::vector<std::size_t> hull() const {
        std::unordered_map<int, int> next;
        int start = std::numeric_limits<int>::max();
        for (const auto& t : tris_) {
            if (!t.alive || !is_ghost(t)) continue;
            int k = infinite_index(t);
            int u = t.v[(k + 1) % 3], w = t.v[(k + 2) % 3];
            next[w] = u;  // interior on the left of w -> u
            start = std::min(start, w);
        }
        std::vector<std::size_t> out;
        int cur = start;
        do {
            out.push_back(static_cast<std::size_t>(cur));
            cur = next.at(cur);
        } while (cur != start && out.size() <= next.size());
        return out;
    }

private:
    struct Tri {
        std::array<int, 3> v;
        std::array<int, 3> n;  // n[i] is across the edge opposite v[i]
        bool alive;
    };

    static bool is_ghost(const Tri& t) {
        return t.v[0] == kInfinite || t.v[1] == kInfinite || t.v[2] == kInfinite;
    }
    static int infinite_index(const Tri& t) {
        for (int i = 0; i < 3; ++i)
            if (t.v[i] == kInfinite) return i;
        return -1;
    }

    void link_ghost_ring() {
        // ghosts 1..3 share their infinite edges with each other
        for (int g = 1; g <= 3; ++g) {
            auto& t = tris_[g];
            for (int h = 1; h <= 3; ++h) {
                if (h == g) continue;
                const auto& o = tris_[h];
                // t's edge (v1 -> inf) is opposite v0; it borders the ghost whose edge is (inf -> v1)
                if (o.v[1] == t.v[0]) t.n[1] = h;  // edge (t.v2=inf, t.v0) vs o's (o.v1, inf)
                if (o.v[0] == t.v[1]) t.n[0] = h;
            }
        }
    }

    bool in_conflict(const Tri& t, Point2 p) const {
        int k = infinite_index(t);
        if (k < 0) return predicates::incircle(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]], p) > 0;
        const Point2 a = pts_[t.v[(k + 1) % 3]];
        const Point2 b = pts_[t.v[(k + 2) % 3]];
        const int o = predicates::orient(a, b, p);
        if (o > 0) return true;
        if (o < 0) return false;
        return dot(p - a, b - a) > 0.0 && dot(p - b, a - b) > 0.0;
    }

    int locate(Point2 p) {
        int t = last_;
        if (t < 0 || !tris_[t].alive) t = any_alive();
        if (is_ghost(tris_[t])) {
            if (in_conflict(tris_[t], p)) return t;
            t = tris_[t].n[infinite_index(tris_[t])];
        }
        const std::size_t cap = 4 * tris_.size() + 16;
        for (std::size_t step = 0; step < cap; ++step) {
            const Tri& tri = tris_[t];
            bool moved = false;
            rotation_ = (rotation_ + 1) % 3;
            for (int e = 0; e < 3; ++e) {
                const int i = (e + rotation_) % 3;
                const Point2 a = pts_[tri.v[(i + 1) % 3]];
                const Point2 b = pts_[tri.v[(i + 2) % 3]];
                if (predicates::orient(a, b, p) < 0) {
                    t = tri.n[i];
                    if (is_ghost(tris_[t])) return t;
                    moved = true;
                    break;
                }
            }
            if (!moved) return t;
        }
        for (std::size_t i = 0; i < tris_.size(); ++i)
            if (tris_[i].alive && in_conflict(tris_[i], p)) return static_cast<int>(i);
        throw Error("geometry_failure", "point location failed");
    }

    int any_alive() const {
        for (std::size_t i = 0; i < tris_.size(); ++i)
            if (tris_[i].alive && !is_ghost(tris_[i])) return static_cast<int>(i);
        return 0;
    }

    void insert(int pid) {
        const Point2 p = pts_[pid];
        const int start = locate(p);

        std::vector<int> cavity{start};
        std::vector<char>& mark = mark_;
        mark.resize(tris_.size(), 0);
        mark[start] = 1;
        for (std::size_t k = 0; k < cavity.size(); ++k) {
            const Tri& t = tris_[cavity[k]];
            for (int i = 0; i < 3; ++i) {
                const int nb = t.n[i];
                if (nb < 0 || mark[nb]) continue;
                if (in_conflict(tris_[nb], p)) {
                    mark[nb] = 1;
                    cavity.push_back(nb);
                }
            }
        }

        struct Boundary {
            int a, b, outside;
        };
        std::vector<Boundary> boundary;
        for (int id : cavity) {
            const Tri& t = tris_[id];
            for (int i = 0; i < 3; ++i)
                if (!mark[t.n[i]]) boundary.push_back({t.v[(i + 1) % 3], t.v[(i + 2) % 3], t.n[i]});
        }
        for (int id : cavity) {
            tris_[id].alive = false;
            mark[id] = 0;
        }

        std::unordered_map<int, int> by_start, by_end;
        std::vector<int> created;
        created.reserve(boundary.size());
        for (const auto& e : boundary) {
            const int id = static_cast<int>(tris_.size());
            // vertex order (a, b, p): n[2] is across a->b
            tris_.push_back({{e.a, e.b, pid}, {-1, -1, e.outside}, true});
            Tri& out = tris_[e.outside];
            for (int i = 0; i < 3; ++i)
                if (out.v[(i + 1) % 3] == e.b && out.v[(i + 2) % 3] == e.a) out.n[i] = id;
            by_start[e.a] = id;
            by_end[e.b] = id;
            created.push_back(id);
        }
        for (int id : created) {
            Tri& t = tris_[id];
            t.n[0] = by_start.at(t.v[1]);  // across b->p, shared with the triangle starting at b
            t.n[1] = by_end.at(t.v[0]);    // across p->a, shared with the triangle ending at a
        }
        mark.resize(tris_.size(), 0);
        last_ = created.front();
        for (int id : created)
            if (!is_ghost(tris_[id])) {
                last_ = id;
                break;
            }
    }

    const std::vector<Point2>& pts_;
    std::vector<Tri> tris_;
    std::vector<char> mark_;
    int last_ = -1;
    int rotation_ = 0;
};

}  // namespace detail

/// Delaunay triangulation by incremental Bowyer-Watson insertion with exact
/// predicates. Exactly cocircular configurations resolve to whichever diagonal
/// insertion order (sorted by x, then y, then id) produces. Coincident sites
/// are nudged apart (the later id moves by 1e-9 relative) and reported in
/// `duplicates`; all-collinear input yields the path along the line.
inline DelaunayGraph delaunay(std::span<const Point2> sites) {
    const std::size_t n = sites.size();
    if (n < 2) throw Error("too_few_points", "triangulation needs at least 2 points");
    for (auto p : sites)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw Error("non_finite", "layout contains non-finite coordinates");

    DelaunayGraph out;
    out.points.assign(sites.begin(), sites.end());
    out.graph.vertices = n;

    double scale = 1.0;
    for (auto p : sites) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
    std::vector<std::size_t> order(n);
    auto sort_order = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto& pa = out.points[a];
            const auto& pb = out.points[b];
            if (pa.x != pb.x) return pa.x < pb.x;
            if (pa.y != pb.y) return pa.y < pb.y;
            return a < b;
        });
    };
    for (int pass = 0; pass < 8; ++pass) {
        sort_order();
        bool nudged = false;
        for (std::size_t k = 1; k < n; ++k) {
            const auto prev = order[k - 1], cur = order[k];
            if (out.points[prev] == out.points[cur]) {
                const auto keep = std::min(prev, cur), move = std::max(prev, cur);
                out.points[move].x += 1e-9 * scale;
                out.points[move].y += 0.5e-9 * scale;
                out.duplicates.emplace_back(keep, move);
                nudged = true;
            }
        }
        if (!nudged) break;
    }

    std::size_t third = n;
    for (std::size_t k = 2; k < n; ++k)
        if (predicates::orient(out.points[order[0]], out.points[order[1]], out.points[order[k]]) != 0) {
            third = k;
            break;
        }

    if (third == n) {
        out.collinear = true;
        // order is lexicographic, which is monotone along any line
        for (std::size_t k = 1; k < n; ++k)
            out.graph.edges.emplace_back(std::min(order[k - 1], order[k]),
                                         std::max(order[k - 1], order[k]));
        std::sort(out.graph.edges.begin(), out.graph.edges.end());
        out.hull = {order.front(), order.back()};
        return out;
    }

    std::vector<std::size_t> insertion{order[0], order[1], order[third]};
    for (std::size_t k = 2; k < n; ++k)
        if (k != third) insertion.push_back(order[k]);
    detail::Triangulator tri(out.points);
    tri.run(insertion);
    out.graph.edges = tri.edges();
    out.hull = tri.hull();
    return out;
}

struct Rect {
    double x = 0.0, y = 0.0, w = 0.0, h = 0.0;

    bool contains(Point2 p) const { return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h; }
    double area() const { return w * h; }
};

/// One clipped Voronoi cell. `neighbors[k]` names the site across the edge
/// from polygon[k] to polygon[k+1], or -1 for the bounding rectangle.
struct VoronoiCell {
    std::size_t id = 0;
    std::vector<Point2> polygon;  // counter-clockwise
    std::vector<long> neighbors;
};

struct VoronoiPartition {
    Rect bounds;
    std::vector<VoronoiCell> cells;
};

inline double polygon_area(const std::vector<Point2>& poly) {
    double a = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const auto& p = poly[k];
        const auto& q = poly[(k + 1) % poly.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

namespace detail {

/// Keeps the part of the polygon closer to `site` than to `other`; the new
/// edge along the bisector is tagged with `other_id`.
inline void clip_to_bisector(VoronoiCell& cell, Point2 site, Point2 other, long other_id) {
    const Point2 normal = other - site;
    const Point2 mid = 0.5 * (site + other);
    auto side = [&](Point2 q) { return dot(q - mid, normal); };

    std::vector<Point2> poly;
    std::vector<long> tags;
    const auto& in = cell.polygon;
    const std::size_t m = in.size();
    for (std::size_t k = 0; k < m; ++k) {
        const Point2 a = in[k];
        const Point2 b = in[(k + 1) % m];
        const double sa = side(a), sb = side(b);
        const long tag = cell.neighbors[k];
        if (sa <= 0.0) {
            poly.push_back(a);
            tags.push_back(tag);
            if (sb > 0.0) {
                const double t = sa / (sa - sb);
                poly.push_back(a + t * (b - a));
                tags.push_back(other_id);
            }
        } else if (sb <= 0.0) {
            const double t = sa / (sa - sb);
            poly.push_back(a + t * (b - a));
            tags.push_back(tag);
        }
    }
    // drop zero-length edges
    std::vector<Point2> clean;
    std::vector<long> clean_tags;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const Point2 next = poly[(k + 1) % poly.size()];
        if (poly.size() > 1 && dist(poly[k], next) <= 1e-12 * (1.0 + norm(poly[k]))) continue;
        clean.push_back(poly[k]);
        clean_tags.push_back(tags[k]);
    }
    cell.polygon = std::move(clean);
    cell.neighbors = std::move(clean_tags);
}

}  // namespace detail

/// Voronoi cells of the triangulated sites clipped to `bounds`. Each cell is
/// the rectangle cut by the bisectors to the site's Delaunay neighbours.
inline VoronoiPartition voronoi(const DelaunayGraph& g, const Rect& bounds) {
    for (auto p : g.points)
        if (!bounds.contains(p))
            throw Error("bounds", "clipping rectangle does not contain every site");
    VoronoiPartition out;
    out.bounds = bounds;
    const auto adj = g.graph.adjacency();
    out.cells.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto& cell = out.cells[i];
        cell.id = i;
        cell.polygon = {{bounds.x, bounds.y},
                        {bounds.x + bounds.w, bounds.y},
                        {bounds.x + bounds.w, bounds.y + bounds.h},
                        {bounds.x, bounds.y + bounds.h}};
        cell.neighbors = {-1, -1, -1, -1};
        for (auto j : adj[i])
            detail::clip_to_bisector(cell, g.points[i], g.points[j], static_cast<long>(j));
    }
    return out;
}

/// Voronoi for a single site: the full rectangle.
inline VoronoiPartition voronoi_single(Point2 site, const Rect& bounds) {
    if (!bounds.contains(site)) throw Error("bounds", "clipping rectangle does not contain the site");
    VoronoiPartition out;
    out.bounds = bounds;
    out.cells.push_back({0,
                         {{bounds.x, bounds.y},
                          {bounds.x + bounds.w, bounds.y},
                          {bounds.x + bounds.w, bounds.y + bounds.h},
                          {bounds.x, bounds.y + bounds.h}},
                         {-1, -1, -1, -1}});
    return out;
}

struct SharedBoundary {
    std::size_t a = 0, b = 0;  // a < b
    Point2 from, to;
};

/// Positive-length boundary segments between adjacent cells, one per pair.
inline std::vector<SharedBoundary> shared_boundaries(const VoronoiPartition& part) {
    std::vector<SharedBoundary> out;
    for (const auto& cell : part.cells) {
        const auto m = cell.polygon.size();
        for (std::size_t k = 0; k < m; ++k) {
            const long nb = cell.neighbors[k];
            if (nb < 0 || static_cast<std::size_t>(nb) <= cell.id) continue;
            const Point2 a = cell.polygon[k], b = cell.polygon[(k + 1) % m];
            if (dist(a, b) <= 0.0) continue;
            out.push_back({cell.id, static_cast<std::size_t>(nb), a, b});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const auto& l, const auto& r) { return std::tie(l.a, l.b) < std::tie(r.a, r.b); });
    return out;
}

/// Clipping rectangle for a normalized layout: the viewport grown by 5% on
/// each side, enlarged further if any site falls outside it.
inline Rect default_bounds(std::span<const Point2> sites, double width, double height) {
    double minx = 0.0, miny = 0.0, maxx = width, maxy = height;
    for (auto p : sites) {
        minx = std::min(minx, p.x);
        miny = std::min(miny, p.y);
        maxx = std::max(maxx, p.x);
        maxy = std::max(maxy, p.y);
    }
    const double px = 0.05 * (maxx - minx), py = 0.05 * (maxy - miny);
    return {minx - px, miny - py, (maxx - minx) + 2 * px, (maxy - miny) + 2 * py};
}

}  // namespace catmap
