#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "catmap/dataset.hpp"
#include "catmap/distance.hpp"
#include "catmap/error.hpp"
#include "catmap/fracturedness.hpp"
#include "catmap/projection.hpp"

namespace catmap {

/// Euclidean distances between layout positions.
inline DissimilarityMatrix layout_distances(const Layout& layout) {
    const std::size_t n = layout.size();
    DissimilarityMatrix d(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, dist(layout.positions[i], layout.positions[j]));
    return d;
}

namespace detail {

struct LayoutDistance {
    const Layout& layout;
    double operator()(std::size_t i, std::size_t j) const {
        return dist(layout.positions[i], layout.positions[j]);
    }
};

struct MatrixDistance {
    const DissimilarityMatrix& d;
    double operator()(std::size_t i, std::size_t j) const { return d(i, j); }
};

/// The k nearest other points of i, closest first, ties by ascending id.
template <typename Dist>
std::vector<std::size_t> nearest(std::size_t n, std::size_t i, const Dist& dist_fn, std::size_t k,
                                 std::vector<double>& scratch) {
    std::vector<std::size_t> ids;
    ids.reserve(n - 1);
    scratch.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        ids.push_back(j);
        scratch[j] = dist_fn(i, j);
    }
    auto mid = ids.begin() + static_cast<std::ptrdiff_t>(std::min(k, ids.size()));
    std::partial_sort(ids.begin(), mid, ids.end(), [&](std::size_t a, std::size_t b) {
        if (scratch[a] != scratch[b]) return scratch[a] < scratch[b];
        return a < b;
    });
    ids.erase(mid, ids.end());
    return ids;
}

/// 1-based rank of j among the other points of i, ties by ascending id.
template <typename Dist>
std::size_t rank_of(std::size_t n, std::size_t i, std::size_t j, const Dist& dist_fn) {
    const double dj = dist_fn(i, j);
    std::size_t rank = 1;
    for (std::size_t l = 0; l < n; ++l) {
        if (l == i || l == j) continue;
        const double dl = dist_fn(i, l);
        if (dl < dj || (dl == dj && l < j)) ++rank;
    }
    return rank;
}

/// Largest possible rank penalty: every point's k projected neighbours are
/// the farthest possible in the reference space.
inline double max_rank_penalty(std::size_t n, std::size_t k) {
    const std::size_t m = std::min(k, n - 1 - k);
    double per_point = 0.0;
    for (std::size_t r = 1; r <= m; ++r) per_point += static_cast<double>(n - k - r);
    return static_cast<double>(n) * per_point;
}

/// Trustworthiness of `low` with respect to `reference`: penalizes points in
/// the k-neighbourhood in `low` that are outside it in `reference`, by their
/// excess rank in `reference`.
template <typename Ref, typename Low>
double rank_preservation(std::size_t n, const Ref& reference, const Low& low, std::size_t k) {
    if (k == 0) throw Error("bad_k", "k must be at least 1");
    if (k >= n) throw Error("bad_k", "k must be smaller than the number of points");
    std::vector<double> scratch;
    double penalty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (auto j : nearest(n, i, low, k, scratch)) {
            const auto r = rank_of(n, i, j, reference);
            if (r > k) penalty += static_cast<double>(r - k);
        }
    }
    const double norm_factor = max_rank_penalty(n, k);
    return norm_factor > 0.0 ? 1.0 - penalty / norm_factor : 1.0;
}

inline void check_sizes(const DissimilarityMatrix& d, const Layout& layout) {
    if (d.size() != layout.size())
        throw Error("size_mismatch", "matrix has " + std::to_string(d.size()) + " points, layout " +
                                         std::to_string(layout.size()));
}

/// Ranks starting at 1, tied values share the mean of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
    std::vector<std::uint32_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t start = 0;
    while (start < idx.size()) {
        std::size_t end = start + 1;
        while (end < idx.size() && values[idx[end]] == values[idx[start]]) ++end;
        const double r = 0.5 * static_cast<double>(start + 1 + end);
        for (std::size_t t = start; t < end; ++t) ranks[idx[t]] = r;
        start = end;
    }
    return ranks;
}

}  // namespace detail

inline double trustworthiness(const DissimilarityMatrix& high, const Layout& layout, std::size_t k) {
    detail::check_sizes(high, layout);
    return detail::rank_preservation(high.size(), detail::MatrixDistance{high},
                                     detail::LayoutDistance{layout}, k);
}

/// Trustworthiness between two arbitrary distance matrices (`low` is the projection).
inline double trustworthiness(const DissimilarityMatrix& high, const DissimilarityMatrix& low,
                              std::size_t k) {
    if (high.size() != low.size()) throw Error("size_mismatch", "matrices differ in size");
    return detail::rank_preservation(high.size(), detail::MatrixDistance{high},
                                     detail::MatrixDistance{low}, k);
}

/// Continuity: trustworthiness with the two spaces swapped, penalizing
/// original neighbours missing from the projected neighbourhood.
inline double continuity(const DissimilarityMatrix& high, const Layout& layout, std::size_t k) {
    detail::check_sizes(high, layout);
    return detail::rank_preservation(high.size(), detail::LayoutDistance{layout},
                                     detail::MatrixDistance{high}, k);
}

enum class StressScaling {
    optimal,  // layout distances scaled by alpha* = sum(d dhat) / sum(dhat^2) first
    none,     // raw sum (d - dhat)^2 / sum d^2
};

inline double normalized_stress(const DissimilarityMatrix& high, const Layout& layout,
                                StressScaling scaling = StressScaling::optimal) {
    detail::check_sizes(high, layout);
    const std::size_t n = high.size();
    if (n < 2) throw Error("too_few_points", "normalized stress needs at least 2 points");
    double dd = 0.0, dl = 0.0, ll = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = high(i, j);
            const double l = dist(layout.positions[i], layout.positions[j]);
            dd += d * d;
            dl += d * l;
            ll += l * l;
        }
    if (dd == 0.0) throw Error("degenerate_input", "all original distances are zero");
    double alpha = 1.0;
    if (scaling == StressScaling::optimal) alpha = ll > 0.0 ? dl / ll : 0.0;
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = high(i, j) - alpha * dist(layout.positions[i], layout.positions[j]);
            residual += r * r;
        }
    return residual / dd;
}

/// Spearman correlation between original and projected pairwise distances.
inline double shepard_correlation(const DissimilarityMatrix& high, const Layout& layout) {
    detail::check_sizes(high, layout);
    const std::size_t n = high.size();
    if (n < 3) throw Error("too_few_points", "Shepard correlation needs at least 3 points");
    std::vector<double> a, b;
    a.reserve(n * (n - 1) / 2);
    b.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            a.push_back(high(i, j));
            b.push_back(dist(layout.positions[i], layout.positions[j]));
        }
    a = detail::average_ranks(a);
    b = detail::average_ranks(b);
    const double mean = 0.5 * static_cast<double>(a.size() + 1);  // same for both rank vectors
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double x = a[t] - mean, y = b[t] - mean;
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw Error("undefined", "Shepard correlation is undefined for constant distances");
    return sab / std::sqrt(saa * sbb);
}

namespace detail {

inline std::vector<std::vector<std::size_t>> layout_knn(const Layout& layout, std::size_t k) {
    const std::size_t n = layout.size();
    if (k == 0 || k >= n) throw Error("bad_k", "k must be in [1, n)");
    std::vector<std::vector<std::size_t>> out(n);
    std::vector<double> scratch;
    for (std::size_t i = 0; i < n; ++i) out[i] = nearest(n, i, LayoutDistance{layout}, k, scratch);
    return out;
}

inline double hit_rate(const std::vector<std::vector<std::size_t>>& knn, const Labeling& labeling) {
    if (labeling.label.size() != knn.size())
        throw Error("bad_labeling", "labeling does not cover the layout");
    double total = 0.0;
    for (std::size_t i = 0; i < knn.size(); ++i) {
        std::size_t hits = 0;
        for (auto j : knn[i])
            if (labeling.label[j] == labeling.label[i]) ++hits;
        total += static_cast<double>(hits) / static_cast<double>(knn[i].size());
    }
    return total / static_cast<double>(knn.size());
}

}  // namespace detail

/// Mean share of each point's k nearest layout neighbours (itself excluded,
/// ties by id) that carry the same label.
inline double neighborhood_hit(const Layout& layout, const Labeling& labeling, std::size_t k) {
    if (labeling.label.size() != layout.size())
        throw Error("bad_labeling", "labeling does not cover the layout");
    return detail::hit_rate(detail::layout_knn(layout, k), labeling);
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct QualityReport {
    std::string label;  // e.g. "mds:overlap"
    double tw = 0.0, ct = 0.0, ns = 0.0, sc = 0.0;
    std::vector<double> nh_per_attribute;
    double nh_mean = 0.0, nh_median = 0.0;
    std::size_t k = 7;
    Method method = Method::mds;
    std::optional<Measure> measure;  // high-dimensional distance the metrics are grounded on
};

inline QualityReport evaluate_quality(const DissimilarityMatrix& high, const Layout& layout,
                                      const SubsetTable& subsets, std::size_t k,
                                      StressScaling scaling = StressScaling::none) {
    QualityReport r;
    r.k = k;
    r.method = layout.method;
    r.measure = high.measure();
    r.tw = trustworthiness(high, layout, k);
    r.ct = continuity(high, layout, k);
    r.ns = normalized_stress(high, layout, scaling);
    r.sc = shepard_correlation(high, layout);
    const auto knn = detail::layout_knn(layout, k);
    for (std::size_t a = 0; a < subsets.schema.attribute_count(); ++a)
        r.nh_per_attribute.push_back(detail::hit_rate(knn, labeling_for(subsets, a)));
    r.nh_mean = std::accumulate(r.nh_per_attribute.begin(), r.nh_per_attribute.end(), 0.0) /
                static_cast<double>(r.nh_per_attribute.size());
    r.nh_median = median(r.nh_per_attribute);
    return r;
}

/// One row of the comparison: a projection method and the measure it uses.
/// MDS projects with `measure`; for MCA, `measure` only grounds the metrics
/// and defaults to the Euclidean distance of the one-hot coding MCA consumes.
struct PipelineSpec {
    Method method = Method::mds;
    std::optional<Measure> measure;

    Measure grounding() const {
        if (measure) return *measure;
        return method == Method::mca ? Measure::euclidean_onehot : Measure::overlap;
    }

    std::string label() const {
        std::string out(to_string(method));
        if (method == Method::mds || measure) {
            out += ':';
            out += to_string(grounding());
        }
        return out;
    }
};

/// Parses "mds:overlap,mds:jaccard,mca" style lists.
inline std::vector<PipelineSpec> parse_pipeline_specs(std::string_view text) {
    std::vector<PipelineSpec> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        auto item = text.substr(pos, comma - pos);
        pos = comma + 1;
        if (item.empty()) continue;
        auto colon = item.find(':');
        auto method = parse_method(item.substr(0, colon));
        if (!method) throw Error("bad_config", "unknown method in '" + std::string(item) + "'");
        PipelineSpec spec{*method, std::nullopt};
        if (colon != std::string_view::npos) {
            auto m = parse_measure(item.substr(colon + 1));
            if (!m) throw Error("bad_config", "unknown measure in '" + std::string(item) + "'");
            spec.measure = m;
        }
        out.push_back(spec);
    }
    return out;
}

struct CompareOptions {
    std::size_t k = 7;
    MdsConfig mds;
    StressScaling scaling = StressScaling::none;
};

/// Projects the table once per spec and evaluates every metric.
inline std::vector<QualityReport> compare_pipelines(const CategoricalTable& table,
                                                    const std::vector<PipelineSpec>& specs,
                                                    const CompareOptions& options = {}) {
    if (specs.empty()) throw Error("bad_config", "no pipeline configurations given");
    const auto subsets = deduplicate(table);
    std::vector<QualityReport> rows;
    for (const auto& spec : specs) {
        const auto high = build_matrix(subsets, spec.grounding());
        const Layout layout = spec.method == Method::mds ? mds_project(high, options.mds)
                                                         : mca_project(subsets);
        auto report = evaluate_quality(high, layout, subsets, options.k, options.scaling);
        report.label = spec.label();
        rows.push_back(std::move(report));
    }
    return rows;
}

inline void write_quality_csv(std::ostream& out, const std::vector<QualityReport>& rows) {
    out << "config,TW,CT,SC,NS,AvgNH,MedNH\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.label.c_str(), r.tw,
                      r.ct, r.sc, r.ns, r.nh_mean, r.nh_median);
        out << buf;
    }
}

/// Aligned Markdown table with two decimals, the precision of the published table.
inline void write_quality_markdown(std::ostream& out, const std::vector<QualityReport>& rows) {
    std::size_t width = 6;
    for (const auto& r : rows) width = std::max(width, r.label.size());
    auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
    out << "| " << pad("config") << " |   TW |   CT |   SC |   NS | AvgNH | MedNH |\n";
    out << "|-" << std::string(width, '-') << "-|-----:|-----:|-----:|-----:|------:|------:|\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, " | %4.2f | %4.2f | %4.2f | %4.2f |  %4.2f |  %4.2f |\n", r.tw,
                      r.ct, r.sc, r.ns, r.nh_mean, r.nh_median);
        out << "| " << pad(r.label) << buf;
    }
}

}  // namespace catmap
