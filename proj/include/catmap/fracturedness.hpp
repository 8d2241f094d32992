#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "catmap/dataset.hpp"
#include "catmap/error.hpp"
#include "catmap/geometry.hpp"

namespace catmap {

/// Non-negative fraction kept unreduced so sums over a common denominator stay exact.
struct Ratio {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Ratio& a, const Ratio& b) {
        return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<(const Ratio& a, const Ratio& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
};

/// Category of every vertex for one attribute.
struct Labeling {
    std::size_t attribute = 0;
    std::vector<std::uint32_t> label;
};

inline Labeling labeling_for(const SubsetTable& subsets, std::size_t attribute) {
    return {attribute, subsets.labels(attribute)};
}

/// Share of edges whose endpoints carry different categories.
inline Ratio edge_fracturedness(const Graph& g, const Labeling& lab) {
    if (g.edges.empty()) throw Error("empty_graph", "edge fracturedness needs at least one edge");
    if (lab.label.size() != g.vertices) throw Error("bad_labeling", "labeling does not cover the graph");
    std::int64_t crossing = 0;
    for (auto [a, b] : g.edges)
        if (lab.label[a] != lab.label[b]) ++crossing;
    return {crossing, static_cast<std::int64_t>(g.edges.size())};
}

namespace detail {

/// Connected components of the subgraph induced by each label, in one DFS
/// sweep; components[c] for every label value below `categories`.
inline std::vector<std::int64_t> components_per_label(const Graph& g, const Labeling& lab,
                                                      std::size_t categories) {
    if (lab.label.size() != g.vertices) throw Error("bad_labeling", "labeling does not cover the graph");
    const auto adj = g.adjacency();
    std::vector<std::int64_t> out(categories, 0);
    std::vector<char> seen(g.vertices, 0);
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < g.vertices; ++s) {
        if (seen[s]) continue;
        const auto c = lab.label[s];
        if (c >= categories) throw Error("bad_labeling", "label outside the category range");
        ++out[c];
        seen[s] = 1;
        stack.push_back(s);
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            for (auto w : adj[v])
                if (!seen[w] && lab.label[w] == c) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
    }
    return out;
}

inline std::size_t label_bound(const Labeling& lab) {
    std::uint32_t m = 0;
    for (auto c : lab.label) m = std::max(m, c);
    return lab.label.empty() ? 0 : static_cast<std::size_t>(m) + 1;
}

}  // namespace detail

/// Number of connected components of the subgraph induced by vertices
/// labelled `category`; 0 if no vertex carries it.
inline std::int64_t category_components(const Graph& g, const Labeling& lab, std::uint32_t category) {
    const auto counts = detail::components_per_label(
        g, lab, std::max(detail::label_bound(lab), static_cast<std::size_t>(category) + 1));
    return counts[category];
}

struct CategoryContribution {
    std::uint32_t category = 0;
    std::int64_t components = 0;
    Ratio f_comp;  // (components - 1) / omega
};

struct ComponentFracturedness {
    Ratio f_comp;            // 1 - observed categories / omega
    std::int64_t omega = 0;  // total components over all categories
    std::vector<CategoryContribution> per_category;  // observed categories, ascending id
};

/// Component-based fracturedness over the categories that occur in the
/// labeling. All values share the denominator omega, so the per-category
/// contributions sum to the attribute value exactly.
inline ComponentFracturedness component_fracturedness(const Graph& g, const Labeling& lab) {
    if (g.vertices == 0) throw Error("empty_graph", "component fracturedness needs vertices");
    const auto counts = detail::components_per_label(g, lab, detail::label_bound(lab));
    ComponentFracturedness out;
    std::int64_t observed = 0;
    for (auto c : counts)
        if (c > 0) {
            out.omega += c;
            ++observed;
        }
    if (out.omega == 0) throw Error("empty_graph", "no components");
    out.f_comp = {out.omega - observed, out.omega};
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] > 0)
            out.per_category.push_back(
                {static_cast<std::uint32_t>(c), counts[c], Ratio{counts[c] - 1, out.omega}});
    return out;
}

struct AttributeFracturedness {
    std::size_t attribute = 0;
    Ratio f_edge;
    ComponentFracturedness comp;
    std::vector<std::uint32_t> category_order;  // ascending contribution, ties by schema order
};

struct FracturednessReport {
    std::vector<AttributeFracturedness> attributes;  // schema order
    std::vector<std::size_t> ranking;                // ascending edge fracturedness
};

/// Attribute ids ascending by edge fracturedness, ties in schema order.
inline std::vector<std::size_t> rank_attributes(const std::vector<AttributeFracturedness>& attrs) {
    std::vector<std::size_t> idx(attrs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (attrs[a].f_edge == attrs[b].f_edge) return attrs[a].attribute < attrs[b].attribute;
        return attrs[a].f_edge < attrs[b].f_edge;
    });
    std::vector<std::size_t> out;
    for (auto i : idx) out.push_back(attrs[i].attribute);
    return out;
}

inline std::vector<std::uint32_t> rank_categories(const ComponentFracturedness& comp) {
    auto cats = comp.per_category;
    std::stable_sort(cats.begin(), cats.end(), [](const auto& a, const auto& b) {
        if (a.f_comp == b.f_comp) return a.category < b.category;
        return a.f_comp < b.f_comp;
    });
    std::vector<std::uint32_t> out;
    for (const auto& c : cats) out.push_back(c.category);
    return out;
}

inline FracturednessReport fracturedness_report(const Graph& g, const SubsetTable& subsets) {
    FracturednessReport report;
    for (std::size_t a = 0; a < subsets.schema.attribute_count(); ++a) {
        const auto lab = labeling_for(subsets, a);
        AttributeFracturedness af;
        af.attribute = a;
        af.f_edge = edge_fracturedness(g, lab);
        af.comp = component_fracturedness(g, lab);
        af.category_order = rank_categories(af.comp);
        report.attributes.push_back(std::move(af));
    }
    report.ranking = rank_attributes(report.attributes);
    return report;
}

}  // namespace catmap
