#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "catmap/dataset.hpp"
#include "catmap/distance.hpp"
#include "catmap/error.hpp"
#include "catmap/point.hpp"

namespace catmap {

enum class Method { mds, mca };

inline std::string_view to_string(Method m) { return m == Method::mds ? "mds" : "mca"; }

inline std::optional<Method> parse_method(std::string_view name) {
    if (name == "mds") return Method::mds;
    if (name == "mca") return Method::mca;
    return std::nullopt;
}

/// 2-D positions of the projected subsets plus how they were produced.
struct Layout {
    std::vector<Point2> positions;
    Method method = Method::mds;
    std::optional<Measure> measure;  // empty for MCA
    double stress = 0.0;             // normalized raw stress, MDS only
    std::vector<double> stress_history;
    int iterations_run = 0;
    bool degenerate = false;  // MCA residual had rank < 2; y is constant
    bool overlap_reduced = false;
    std::vector<Point2> pre_overlap_positions;
    std::vector<double> radii;  // collision radii in layout units, if assigned

    std::size_t size() const noexcept { return positions.size(); }
};

enum class MdsInit { classical, random };

struct MdsConfig {
    int max_iterations = 300;
    double epsilon = 1e-6;  // stop when the relative stress decrease falls below this
    std::uint64_t seed = 0;
    MdsInit init = MdsInit::classical;
    /// Above this size the classical initialization switches from a dense
    /// eigensolver to Lanczos iteration on the implicit Gram matrix.
    std::size_t dense_limit = 2000;
};

namespace detail {

/// Uniform double in [-1, 1) from the raw generator, independent of the
/// standard library's distribution implementations.
inline double symmetric_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    if (v.size() && v[best] < 0) v = -v;
}

inline void center(std::vector<Point2>& pts) {
    if (pts.empty()) return;
    Point2 mean{};
    for (auto p : pts) mean = mean + p;
    mean = (1.0 / static_cast<double>(pts.size())) * mean;
    for (auto& p : pts) p = p - mean;
}

/// Top two eigenpairs of the double-centred Gram matrix B = -1/2 J D^2 J.
struct GramEigen {
    Eigen::Vector2d values;
    Eigen::MatrixXd vectors;  // n x 2
};

inline GramEigen gram_eigen_dense(const DissimilarityMatrix& d) {
    const auto n = static_cast<Eigen::Index>(d.size());
    Eigen::MatrixXd sq(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) sq(i, j) = d(i, j) * d(i, j);
    Eigen::VectorXd row_mean = sq.rowwise().mean();
    const double grand = row_mean.mean();
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            b(i, j) = -0.5 * (sq(i, j) - row_mean[i] - row_mean[j] + grand);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
    GramEigen out;
    out.vectors.resize(n, 2);
    for (int k = 0; k < 2; ++k) {
        const Eigen::Index idx = n - 1 - k;
        out.values[k] = idx >= 0 ? solver.eigenvalues()[idx] : 0.0;
        if (idx >= 0)
            out.vectors.col(k) = solver.eigenvectors().col(idx);
        else
            out.vectors.col(k).setZero();
    }
    return out;
}

/// Lanczos with full reorthogonalization; B is applied implicitly so no second
/// n x n matrix is allocated.
inline GramEigen gram_eigen_lanczos(const DissimilarityMatrix& d, std::uint64_t seed,
                                    int max_steps = 80) {
    const auto n = static_cast<Eigen::Index>(d.size());
    auto apply = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd u = x.array() - x.mean();
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double acc = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double v = d(i, j);
                acc += v * v * u[j];
            }
            w[i] = acc;
        }
        return Eigen::VectorXd(-0.5 * (w.array() - w.mean()));
    };

    const Eigen::Index steps = std::min<Eigen::Index>(n, max_steps);
    Eigen::MatrixXd q(n, steps);
    std::vector<double> alpha, beta;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = symmetric_unit(rng);
    v.array() -= v.mean();
    v.normalize();

    Eigen::Index m = 0;
    for (; m < steps; ++m) {
        q.col(m) = v;
        Eigen::VectorXd w = apply(v);
        const double a = v.dot(w);
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index k = 0; k <= m; ++k) w -= q.col(k).dot(w) * q.col(k);
        const double b = w.norm();
        if (m + 1 == steps || b <= 1e-12 * std::max(1.0, std::abs(a))) {
            ++m;
            break;
        }
        beta.push_back(b);
        v = w / b;
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
    GramEigen out;
    out.vectors.resize(n, 2);
    for (int k = 0; k < 2; ++k) {
        const Eigen::Index idx = m - 1 - k;
        if (idx < 0) {
            out.values[k] = 0.0;
            out.vectors.col(k).setZero();
            continue;
        }
        out.values[k] = solver.eigenvalues()[idx];
        out.vectors.col(k) = q.leftCols(m) * solver.eigenvectors().col(idx);
        out.vectors.col(k).normalize();
    }
    return out;
}

struct GuttmanStep {
    double stress = 0.0;  // raw stress of the input configuration
    std::vector<Point2> next;
};

/// One pass over all pairs: raw stress of `x` and its Guttman transform
/// (1/n) B(x) x for unit weights.
inline GuttmanStep guttman_step(const DissimilarityMatrix& d, const std::vector<Point2>& x) {
    const std::size_t n = x.size();
    GuttmanStep out;
    out.next.assign(n, Point2{});
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Point2 diff = x[i] - x[j];
            const double delta = norm(diff);
            const double r = d(i, j) - delta;
            out.stress += r * r;
            if (delta > 0.0) {
                const double ratio = d(i, j) / delta;
                out.next[i] = out.next[i] + ratio * diff;
                out.next[j] = out.next[j] - ratio * diff;
            }
        }
    }
    for (auto& p : out.next) p = inv_n * p;
    return out;
}

inline double sum_squares_upper(const DissimilarityMatrix& d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j) s += d(i, j) * d(i, j);
    return s;
}

}  // namespace detail

/// Classical (Torgerson) scaling into the plane. Rank-deficient Gram matrices
/// get a seeded jitter of 1e-9 times the largest distance so SMACOF has a
/// non-degenerate start.
inline std::vector<Point2> classical_mds(const DissimilarityMatrix& d, std::uint64_t seed = 0,
                                         std::size_t dense_limit = 2000) {
    const std::size_t n = d.size();
    auto eig = n <= dense_limit ? detail::gram_eigen_dense(d) : detail::gram_eigen_lanczos(d, seed);
    std::vector<Point2> pts(n);
    for (int k = 0; k < 2; ++k) {
        Eigen::VectorXd v = eig.vectors.col(k);
        detail::fix_sign(v);
        const double scale = std::sqrt(std::max(eig.values[k], 0.0));
        for (std::size_t i = 0; i < n; ++i)
            (k == 0 ? pts[i].x : pts[i].y) = v[static_cast<Eigen::Index>(i)] * scale;
    }
    const double top = std::max(eig.values[0], 0.0);
    if (eig.values[1] <= 1e-10 * std::max(top, 1e-300)) {
        std::mt19937_64 rng(seed);
        const double amp = 1e-9 * d.max_value();
        for (auto& p : pts) {
            p.x += amp * detail::symmetric_unit(rng);
            p.y += amp * detail::symmetric_unit(rng);
        }
    }
    return pts;
}

/// Metric MDS by SMACOF majorization of the raw stress
/// sum_{i<j} (d_ij - |p_i - p_j|)^2. The stress is non-increasing from one
/// iterate to the next; `stress_history` holds the normalized stress of the
/// start configuration and of every iterate.
inline Layout mds_project(const DissimilarityMatrix& d, const MdsConfig& cfg = {}) {
    if (cfg.max_iterations < 1) throw Error("bad_config", "max_iterations must be >= 1");
    if (!(cfg.epsilon > 0.0)) throw Error("bad_config", "epsilon must be > 0");
    const std::size_t n = d.size();
    if (n < 2) throw Error("too_few_subsets", "MDS needs at least 2 points");
    if (d.max_value() == 0.0)
        throw Error("degenerate_input", "all pairwise distances are zero");

    std::vector<Point2> x;
    if (cfg.init == MdsInit::classical) {
        x = classical_mds(d, cfg.seed, cfg.dense_limit);
    } else {
        std::mt19937_64 rng(cfg.seed);
        const double span = d.max_value();
        x.resize(n);
        for (auto& p : x) p = {span * detail::symmetric_unit(rng), span * detail::symmetric_unit(rng)};
    }

    const double denom = detail::sum_squares_upper(d);
    Layout out;
    out.method = Method::mds;
    out.measure = d.measure();

    auto step = detail::guttman_step(d, x);
    out.stress_history.push_back(step.stress / denom);
    int it = 0;
    while (it < cfg.max_iterations && step.stress > 0.0) {
        x = std::move(step.next);
        ++it;
        const double prev = step.stress;
        step = detail::guttman_step(d, x);
        out.stress_history.push_back(step.stress / denom);
        if (prev - step.stress <= cfg.epsilon * prev) break;
    }
    detail::center(x);
    out.positions = std::move(x);
    out.iterations_run = it;
    out.stress = step.stress / denom;
    return out;
}

/// Multiple correspondence analysis of the complete disjunctive table of the
/// unique subsets (each subset has mass 1/n). Returns row principal
/// coordinates on the first two axes; each axis is signed so that its
/// largest-magnitude coordinate is positive.
inline Layout mca_project(const SubsetTable& subsets) {
    const auto n = static_cast<Eigen::Index>(subsets.size());
    if (n < 2) throw Error("too_few_subsets", "MCA needs at least 2 subsets");
    const auto& schema = subsets.schema;
    const auto cols = static_cast<Eigen::Index>(schema.dimensionality());
    const double q = static_cast<double>(schema.attribute_count());
    const double total = static_cast<double>(n) * q;

    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, cols);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& values = subsets.subsets[static_cast<std::size_t>(i)].values;
        for (std::size_t a = 0; a < values.size(); ++a)
            z(i, static_cast<Eigen::Index>(schema.descriptor_id(a, values[a]))) = 1.0;
    }
    const double row_mass = 1.0 / static_cast<double>(n);
    Eigen::VectorXd col_mass = z.colwise().sum().transpose() / total;

    // Standardized residuals (p_ij - r_i c_j) / sqrt(r_i c_j); columns of
    // categories never observed have zero mass and are left out.
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        if (col_mass[j] <= 0.0) continue;
        const double scale = 1.0 / std::sqrt(row_mass * col_mass[j]);
        for (Eigen::Index i = 0; i < n; ++i)
            s(i, j) = (z(i, j) / total - row_mass * col_mass[j]) * scale;
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double tol = 1e-12 * std::max(1.0, sv.size() ? sv[0] : 0.0);

    Layout out;
    out.method = Method::mca;
    out.positions.assign(static_cast<std::size_t>(n), Point2{});
    const double inv_sqrt_mass = 1.0 / std::sqrt(row_mass);
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv[k] > tol) ++rank;
    for (int k = 0; k < std::min(rank, 2); ++k) {
        Eigen::VectorXd u = svd.matrixU().col(k);
        detail::fix_sign(u);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double coord = u[i] * sv[k] * inv_sqrt_mass;
            auto& p = out.positions[static_cast<std::size_t>(i)];
            (k == 0 ? p.x : p.y) = coord;
        }
    }
    out.degenerate = rank < 2;
    return out;
}

struct OverlapConfig {
    int iterations = 300;
    double alpha_start = 1.0;
    double alpha_end = 0.001;
    double anchor_strength = 0.1;  // spring pulling each point back to its original position
    double tolerance = 0.01;       // final separation must be >= (r_i + r_j)(1 - tolerance)
    int max_resolve_sweeps = 20000;
};

namespace detail {

/// Uniform grid over points for collision queries; cells are `cell` wide.
class CollisionGrid {
public:
    CollisionGrid(const std::vector<Point2>& pts, double cell) : cell_(cell) {
        for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(i);
    }

    template <typename F>
    void for_each_near(Point2 p, F&& f) const {
        const auto cx = coord(p.x);
        const auto cy = coord(p.y);
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = cells_.find(pack(cx + dx, cy + dy));
                if (it == cells_.end()) continue;
                for (auto j : it->second) f(j);
            }
    }

private:
    std::int64_t coord(double v) const { return static_cast<std::int64_t>(std::floor(v / cell_)); }
    static std::int64_t pack(std::int64_t x, std::int64_t y) { return (x << 32) ^ (y & 0xffffffff); }
    std::int64_t key(Point2 p) const { return pack(coord(p.x), coord(p.y)); }

    double cell_;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> cells_;
};

/// Direction used to separate coincident points; depends only on the ids.
inline Point2 tie_direction(std::size_t i, std::size_t j) {
    const double angle = 2.399963229728653 * static_cast<double>(i * 31 + j);
    return {std::cos(angle), std::sin(angle)};
}

/// Share of a pair's separation moved by point i; the larger glyph moves less.
inline double push_share(double ri, double rj) {
    const double wi = ri * ri, wj = rj * rj;
    return wi + wj > 0.0 ? wj / (wi + wj) : 0.5;
}

}  // namespace detail

/// Force-directed overlap removal. Every pair repels with collision radius
/// r_i + r_j while a weak spring anchors each point to where it started; after
/// the decaying-step simulation any remaining overlaps are projected apart
/// pairwise until the separation holds. Non-overlapping layouts and zero radii
/// leave positions unchanged.
inline Layout reduce_overlap(Layout layout, std::span<const double> radii,
                             const OverlapConfig& cfg = {}) {
    const std::size_t n = layout.size();
    if (radii.size() != n) throw Error("bad_radii", "need one radius per point");
    double max_r = 0.0;
    for (double r : radii) {
        if (!std::isfinite(r) || r < 0.0) throw Error("bad_radii", "radii must be finite and >= 0");
        max_r = std::max(max_r, r);
    }
    layout.pre_overlap_positions = layout.positions;
    layout.radii.assign(radii.begin(), radii.end());
    layout.overlap_reduced = true;
    if (max_r == 0.0 || n < 2) return layout;

    auto& pos = layout.positions;
    const auto& anchor = layout.pre_overlap_positions;
    const double cell = 2.0 * max_r;

    auto visit_overlaps = [&](auto&& on_pair) {
        detail::CollisionGrid grid(pos, cell);
        for (std::size_t i = 0; i < n; ++i) {
            grid.for_each_near(pos[i], [&](std::size_t j) {
                if (j <= i) return;
                const double target = radii[i] + radii[j];
                if (target <= 0.0) return;
                if (dist(pos[i], pos[j]) < target) on_pair(i, j, target);
            });
        }
    };

    std::vector<Point2> shift(n);
    for (int t = 0; t < cfg.iterations; ++t) {
        const double frac = cfg.iterations > 1 ? static_cast<double>(t) / (cfg.iterations - 1) : 0.0;
        const double alpha = cfg.alpha_start * std::pow(cfg.alpha_end / cfg.alpha_start, frac);
        std::fill(shift.begin(), shift.end(), Point2{});
        bool any = false;
        visit_overlaps([&](std::size_t i, std::size_t j, double target) {
            any = true;
            Point2 delta = pos[j] - pos[i];
            double len = norm(delta);
            Point2 dir = len > 0.0 ? (1.0 / len) * delta : detail::tie_direction(i, j);
            const double gap = (target - len) * alpha;
            const double si = detail::push_share(radii[i], radii[j]);
            shift[i] = shift[i] - (gap * si) * dir;
            shift[j] = shift[j] + (gap * (1.0 - si)) * dir;
        });
        if (!any) break;
        for (std::size_t i = 0; i < n; ++i)
            pos[i] = pos[i] + shift[i] + (alpha * cfg.anchor_strength) * (anchor[i] - pos[i]);
    }

    // Hard constraint pass; stops once every pair is within 0.1% of contact.
    const double stop = 1.0 - 0.1 * cfg.tolerance;
    for (int sweep = 0; sweep < cfg.max_resolve_sweeps; ++sweep) {
        bool violated = false;
        detail::CollisionGrid grid(pos, cell);
        for (std::size_t i = 0; i < n; ++i) {
            grid.for_each_near(pos[i], [&](std::size_t j) {
                if (j == i) return;
                const double target = radii[i] + radii[j];
                Point2 delta = pos[j] - pos[i];
                double len = norm(delta);
                if (target <= 0.0 || len >= target * stop) return;
                violated = true;
                std::size_t lo = std::min(i, j), hi = std::max(i, j);
                Point2 dir = len > 0.0 ? (1.0 / len) * delta
                                       : (i == lo ? 1.0 : -1.0) * detail::tie_direction(lo, hi);
                const double gap = target - len;
                const double si = detail::push_share(radii[i], radii[j]);
                pos[i] = pos[i] - (gap * si) * dir;
                pos[j] = pos[j] + (gap * (1.0 - si)) * dir;
            });
        }
        if (!violated) break;
    }
    return layout;
}

struct Viewport {
    double width = 800.0;
    double height = 800.0;
};

/// Uniform scale and translation into the viewport minus `padding` on every
/// side, centred, aspect ratio preserved. Also maps `pre_overlap_positions`
/// and scales the radii.
inline Layout normalize_layout(Layout layout, Viewport viewport, double padding) {
    if (layout.positions.empty()) throw Error("empty_layout", "cannot normalize an empty layout");
    double minx = std::numeric_limits<double>::infinity(), miny = minx;
    double maxx = -minx, maxy = -minx;
    for (auto p : layout.positions) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const double avail_w = viewport.width - 2.0 * padding;
    const double avail_h = viewport.height - 2.0 * padding;
    const double bw = maxx - minx, bh = maxy - miny;
    double scale = 1.0;
    if (bw > 0.0 && bh > 0.0)
        scale = std::min(avail_w / bw, avail_h / bh);
    else if (bw > 0.0)
        scale = avail_w / bw;
    else if (bh > 0.0)
        scale = avail_h / bh;
    const Point2 box_center{(minx + maxx) / 2.0, (miny + maxy) / 2.0};
    const Point2 view_center{viewport.width / 2.0, viewport.height / 2.0};
    auto map = [&](Point2 p) { return view_center + scale * (p - box_center); };
    for (auto& p : layout.positions) p = map(p);
    for (auto& p : layout.pre_overlap_positions) p = map(p);
    for (auto& r : layout.radii) r *= scale;
    return layout;
}

}  // namespace catmap
