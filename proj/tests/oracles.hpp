#pragma once

// Brute-force reference implementations. They share no code with the
// library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "catmap/dataset.hpp"
#include "catmap/point.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;
using Pt = catmap::Point2;

inline Matrix euclidean(const std::vector<Pt>& p) {
    Matrix d(p.size(), std::vector<double>(p.size(), 0.0));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j) d[i][j] = std::hypot(p[i].x - p[j].x, p[i].y - p[j].y);
    return d;
}

/// Rank r(i, j) of j among the other points by distance from i, 1-based,
/// ties by smaller id; counted pair by pair.
inline std::size_t rank(const Matrix& d, std::size_t i, std::size_t j) {
    std::size_t r = 1;
    for (std::size_t l = 0; l < d.size(); ++l) {
        if (l == i || l == j) continue;
        if (d[i][l] < d[i][j] || (d[i][l] == d[i][j] && l < j)) ++r;
    }
    return r;
}

inline std::set<std::size_t> knn(const Matrix& d, std::size_t i, std::size_t k) {
    std::set<std::size_t> out;
    for (std::size_t j = 0; j < d.size(); ++j)
        if (j != i && rank(d, i, j) <= k) out.insert(j);
    return out;
}

/// Largest possible penalty sum: each point's k false neighbours take the k
/// largest admissible ranks (all of which exceed k).
inline double worst_penalty(std::size_t n, std::size_t k) {
    double per_point = 0.0;
    std::size_t taken = 0;
    for (std::size_t r = n - 1; r > k && taken < k; --r, ++taken) per_point += static_cast<double>(r - k);
    return static_cast<double>(n) * per_point;
}

/// Trustworthiness with `low` the projected space.
inline double trust(const Matrix& high, const Matrix& low, std::size_t k) {
    const std::size_t n = high.size();
    double penalty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto in_low = knn(low, i, k);
        const auto in_high = knn(high, i, k);
        for (auto j : in_low)
            if (!in_high.count(j)) penalty += static_cast<double>(rank(high, i, j)) - static_cast<double>(k);
    }
    const double w = worst_penalty(n, k);
    return w > 0.0 ? 1.0 - penalty / w : 1.0;
}

inline double continuity(const Matrix& high, const Matrix& low, std::size_t k) { return trust(low, high, k); }

/// Stress after scaling the low distances by `alpha` (1 for raw).
inline double stress(const Matrix& high, const Matrix& low, bool optimal) {
    double num_a = 0.0, den_a = 0.0;
    for (std::size_t i = 0; i < high.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) {
            num_a += high[i][j] * low[i][j];
            den_a += low[i][j] * low[i][j];
        }
    const double alpha = optimal ? (den_a > 0 ? num_a / den_a : 0.0) : 1.0;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < high.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) {
            num += (high[i][j] - alpha * low[i][j]) * (high[i][j] - alpha * low[i][j]);
            den += high[i][j] * high[i][j];
        }
    return num / den;
}

/// Average ranks by counting smaller and equal values.
inline std::vector<double> midranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0, equal = 0;
        for (double w : v) {
            if (w < v[i]) ++less;
            if (w == v[i]) ++equal;
        }
        r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0, mb = 0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        ma += a[t];
        mb += b[t];
    }
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(b.size());
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        sab += (a[t] - ma) * (b[t] - mb);
        saa += (a[t] - ma) * (a[t] - ma);
        sbb += (b[t] - mb) * (b[t] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

inline double spearman(const Matrix& high, const Matrix& low) {
    std::vector<double> a, b;
    for (std::size_t i = 0; i < high.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) {
            a.push_back(high[i][j]);
            b.push_back(low[i][j]);
        }
    return pearson(midranks(a), midranks(b));
}

inline double neighborhood_hit(const Matrix& low, const std::vector<std::uint32_t>& label, std::size_t k) {
    double total = 0.0;
    for (std::size_t i = 0; i < low.size(); ++i) {
        double hits = 0;
        for (auto j : knn(low, i, k))
            if (label[j] == label[i]) ++hits;
        total += hits / static_cast<double>(k);
    }
    return total / static_cast<double>(low.size());
}

/// Delaunay edges by the empty-circle criterion: {i, j} is an edge iff some
/// triangle i, j, l has no other point strictly inside its circumcircle.
/// Exact for points in general position.
inline bool in_circle(Pt a, Pt b, Pt c, Pt d) {
    long double adx = a.x - d.x, ady = a.y - d.y, bdx = b.x - d.x, bdy = b.y - d.y, cdx = c.x - d.x,
                cdy = c.y - d.y;
    long double det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) -
                      (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                      (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
    long double o = (a.x - c.x) * (long double)(b.y - c.y) - (a.y - c.y) * (long double)(b.x - c.x);
    return o > 0 ? det > 0 : det < 0;
}

inline long double orient(Pt a, Pt b, Pt c) {
    return (a.x - c.x) * (long double)(b.y - c.y) - (a.y - c.y) * (long double)(b.x - c.x);
}

inline std::set<std::pair<std::size_t, std::size_t>> delaunay_edges(const std::vector<Pt>& p) {
    std::set<std::pair<std::size_t, std::size_t>> edges;
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t l = j + 1; l < n; ++l) {
                if (orient(p[i], p[j], p[l]) == 0) continue;
                bool empty = true;
                for (std::size_t m = 0; m < n && empty; ++m)
                    if (m != i && m != j && m != l && in_circle(p[i], p[j], p[l], p[m])) empty = false;
                if (empty) {
                    edges.insert({i, j});
                    edges.insert({i, l});
                    edges.insert({j, l});
                }
            }
    return edges;
}

/// Convex hull size by checking every pair as a supporting line.
inline std::size_t hull_size(const std::vector<Pt>& p) {
    std::set<std::size_t> on_hull;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (i == j) continue;
            bool all_left = true;
            for (std::size_t l = 0; l < p.size() && all_left; ++l)
                if (l != i && l != j && orient(p[i], p[j], p[l]) <= 0) all_left = false;
            if (all_left) {
                on_hull.insert(i);
                on_hull.insert(j);
            }
        }
    return on_hull.size();
}

/// Nearest site, ties to the smaller id.
inline std::size_t nearest_site(const std::vector<Pt>& sites, Pt q) {
    std::size_t best = 0;
    double bd = INFINITY;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const double d = std::hypot(sites[i].x - q.x, sites[i].y - q.y);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

/// Even-odd point in polygon.
inline bool inside(const std::vector<Pt>& poly, Pt q) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if ((poly[i].y > q.y) != (poly[j].y > q.y) &&
            q.x < (poly[j].x - poly[i].x) * (q.y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x)
            in = !in;
    }
    return in;
}

/// Components of the subgraph induced by `label == c`, via reachability
/// closure from each vertex.
inline std::size_t components(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                              const std::vector<std::uint32_t>& label, std::uint32_t c) {
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t v = 0; v < n; ++v) reach[v][v] = label[v] == c;
    for (auto [a, b] : edges)
        if (label[a] == c && label[b] == c) reach[a][b] = reach[b][a] = true;
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (reach[i][m] && reach[m][j]) reach[i][j] = true;
    std::set<std::vector<bool>> classes;
    for (std::size_t v = 0; v < n; ++v)
        if (label[v] == c) classes.insert(reach[v]);
    return classes.size();
}

/// Shared categories between two assignments by explicit set intersection of
/// "attr=cat" strings.
inline std::size_t shared(const catmap::AttributeSchema& s, const catmap::Assignment& x,
                          const catmap::Assignment& y) {
    std::set<std::string> a, b;
    for (std::size_t i = 0; i < x.size(); ++i) {
        a.insert(s.attribute(i).name + "=" + s.attribute(i).categories[x[i]]);
        b.insert(s.attribute(i).name + "=" + s.attribute(i).categories[y[i]]);
    }
    std::vector<std::string> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out.size();
}

/// Random schema with `attrs` attributes of 2..max_cats categories.
inline catmap::AttributeSchema random_schema(std::mt19937_64& rng, std::size_t attrs, std::size_t max_cats = 5) {
    std::vector<catmap::Attribute> a;
    for (std::size_t i = 0; i < attrs; ++i) {
        catmap::Attribute at;
        at.name = "a" + std::to_string(i);
        const auto cats = 2 + rng() % (max_cats - 1);
        for (std::size_t c = 0; c < cats; ++c) at.categories.push_back("c" + std::to_string(c));
        a.push_back(std::move(at));
    }
    return catmap::AttributeSchema(std::move(a));
}

inline catmap::Assignment random_assignment(std::mt19937_64& rng, const catmap::AttributeSchema& s) {
    catmap::Assignment v;
    for (std::size_t i = 0; i < s.attribute_count(); ++i)
        v.push_back(static_cast<std::uint32_t>(rng() % s.attribute(i).categories.size()));
    return v;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace oracle

namespace oracle {

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Eigenvalues are
/// returned in descending order, eigenvectors as columns of `vectors`.
struct Eigen2 {
    std::vector<double> values;
    Matrix vectors;
};

inline Eigen2 jacobi(Matrix a) {
    const std::size_t n = a.size();
    Matrix v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
    }
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return a[x][x] > a[y][y]; });
    Eigen2 out;
    out.vectors.assign(n, std::vector<double>(n));
    for (std::size_t c = 0; c < n; ++c) {
        out.values.push_back(a[idx[c]][idx[c]]);
        for (std::size_t r = 0; r < n; ++r) out.vectors[r][c] = v[r][idx[c]];
    }
    return out;
}

/// MCA row coordinates of unique rows with equal masses, obtained as
/// classical scaling of the chi-square distances between indicator-row
/// profiles (independent of the SVD route). Columns are the first two axes.
inline std::vector<Pt> mca_by_chi_square(const catmap::SubsetTable& t, std::vector<double>* spectrum = nullptr) {
    const std::size_t n = t.size(), q = t.schema.attribute_count();
    std::vector<double> colmass(t.schema.dimensionality(), 0.0);
    for (const auto& s : t.subsets)
        for (std::size_t a = 0; a < q; ++a) colmass[t.schema.descriptor_id(a, s.values[a])] += 1.0 / (n * q);
    Matrix d2(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t a = 0; a < q; ++a) {
                const auto ci = t.schema.descriptor_id(a, t.subsets[i].values[a]);
                const auto cj = t.schema.descriptor_id(a, t.subsets[j].values[a]);
                if (ci != cj) acc += (1.0 / (q * q)) * (1.0 / colmass[ci] + 1.0 / colmass[cj]);
            }
            d2[i][j] = acc;
        }
    // B = -1/2 J D2 J
    Matrix b(n, std::vector<double>(n));
    std::vector<double> rm(n, 0.0);
    double all = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) rm[i] += d2[i][j] / n;
        all += rm[i] / n;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b[i][j] = -0.5 * (d2[i][j] - rm[i] - rm[j] + all);
    auto e = jacobi(b);
    if (spectrum) *spectrum = e.values;
    std::vector<Pt> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].x = std::sqrt(std::max(0.0, e.values[0])) * e.vectors[i][0];
        out[i].y = std::sqrt(std::max(0.0, e.values[1])) * e.vectors[i][1];
    }
    return out;
}

}  // namespace oracle
