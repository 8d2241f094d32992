#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "catmap/dataset.hpp"
#include "catmap/error.hpp"
#include "catmap/fracturedness.hpp"
#include "catmap/geometry.hpp"
#include "catmap/pipeline.hpp"
#include "catmap/projection.hpp"
#include "catmap/quality.hpp"
#include "catmap/selection.hpp"

namespace catmap::json {

using nlohmann::json;

inline json schema_json(const AttributeSchema& schema) {
    json attrs = json::array();
    for (const auto& a : schema.attributes()) attrs.push_back({{"name", a.name}, {"categories", a.categories}});
    return {{"attributes", attrs}};
}

inline json subsets_json(const SubsetTable& t) {
    json subsets = json::array();
    for (std::size_t i = 0; i < t.size(); ++i)
        subsets.push_back({{"id", i}, {"values", t.subsets[i].values}, {"count", t.subsets[i].count}});
    return {{"schema", schema_json(t.schema)}, {"subsets", subsets}, {"total", t.total}};
}

/// Layout points carry the subset count when `subsets` is given.
inline json layout_json(const Layout& l, const SubsetTable* subsets = nullptr,
                        const Viewport* viewport = nullptr) {
    json out;
    out["method"] = std::string(to_string(l.method));
    out["measure"] = l.measure ? json(std::string(to_string(*l.measure))) : json(nullptr);
    out["stress"] = l.stress;
    out["iterations"] = l.iterations_run;
    out["degenerate"] = l.degenerate;
    out["overlapReduced"] = l.overlap_reduced;
    if (viewport) out["viewport"] = {{"width", viewport->width}, {"height", viewport->height}};
    json points = json::array();
    for (std::size_t i = 0; i < l.size(); ++i) {
        json p = {{"id", i}, {"x", l.positions[i].x}, {"y", l.positions[i].y},
                  {"r", i < l.radii.size() ? l.radii[i] : 0.0}};
        if (subsets) p["count"] = subsets->subsets.at(i).count;
        points.push_back(std::move(p));
    }
    out["points"] = std::move(points);
    json pre = json::array();
    for (std::size_t i = 0; i < l.pre_overlap_positions.size(); ++i)
        pre.push_back({{"id", i}, {"x", l.pre_overlap_positions[i].x}, {"y", l.pre_overlap_positions[i].y}});
    out["preOverlap"] = std::move(pre);
    return out;
}

struct ParsedLayout {
    Layout layout;
    Viewport viewport;
};

inline ParsedLayout parse_layout(const json& j) {
    try {
        ParsedLayout out;
        auto method = parse_method(j.at("method").get<std::string>());
        if (!method) throw Error("bad_layout", "unknown method");
        out.layout.method = *method;
        if (j.contains("measure") && !j.at("measure").is_null()) {
            out.layout.measure = parse_measure(j.at("measure").get<std::string>());
            if (!out.layout.measure) throw Error("bad_layout", "unknown measure");
        }
        out.layout.stress = j.value("stress", 0.0);
        out.layout.overlap_reduced = j.value("overlapReduced", false);
        if (j.contains("viewport"))
            out.viewport = {j["viewport"].at("width").get<double>(), j["viewport"].at("height").get<double>()};
        const auto& pts = j.at("points");
        out.layout.positions.resize(pts.size());
        out.layout.radii.resize(pts.size());
        for (const auto& p : pts) {
            const auto id = p.at("id").get<std::size_t>();
            if (id >= pts.size()) throw Error("bad_layout", "point id out of range");
            out.layout.positions[id] = {p.at("x").get<double>(), p.at("y").get<double>()};
            out.layout.radii[id] = p.value("r", 0.0);
        }
        if (j.contains("preOverlap")) {
            const auto& pre = j.at("preOverlap");
            out.layout.pre_overlap_positions.resize(pre.size());
            for (const auto& p : pre) {
                const auto id = p.at("id").get<std::size_t>();
                if (id >= pre.size()) throw Error("bad_layout", "point id out of range");
                out.layout.pre_overlap_positions[id] = {p.at("x").get<double>(), p.at("y").get<double>()};
            }
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad_layout", e.what());
    }
}

inline json partition_json(const VoronoiPartition& part, const DelaunayGraph& g) {
    json cells = json::array();
    for (const auto& c : part.cells) {
        json poly = json::array();
        for (auto p : c.polygon) poly.push_back({p.x, p.y});
        cells.push_back({{"id", c.id}, {"polygon", poly}, {"neighbors", c.neighbors}});
    }
    json edges = json::array();
    for (auto [a, b] : g.edges()) edges.push_back({a, b});
    json dups = json::array();
    for (auto [a, b] : g.duplicates) dups.push_back({a, b});
    return {{"bounds", {{"x", part.bounds.x}, {"y", part.bounds.y}, {"w", part.bounds.w}, {"h", part.bounds.h}}},
            {"cells", cells},
            {"edges", edges},
            {"hull", g.hull},
            {"collinear", g.collinear},
            {"duplicates", dups}};
}

inline json ratio_json(const Ratio& r) { return {{"num", r.num}, {"den", r.den}}; }

inline json fracturedness_json(const FracturednessReport& report, const AttributeSchema& schema) {
    json attrs = json::array();
    for (const auto& a : report.attributes) {
        const auto& attr = schema.attribute(a.attribute);
        json cats = json::array();
        for (auto c : a.category_order) {
            const auto it = std::find_if(a.comp.per_category.begin(), a.comp.per_category.end(),
                                         [&](const auto& pc) { return pc.category == c; });
            cats.push_back({{"name", attr.categories[c]},
                            {"fComp", it->f_comp.value()},
                            {"components", it->components}});
        }
        attrs.push_back({{"name", attr.name},
                         {"fEdge", a.f_edge.value()},
                         {"fComp", a.comp.f_comp.value()},
                         {"omega", a.comp.omega},
                         {"fEdgeExact", ratio_json(a.f_edge)},
                         {"fCompExact", ratio_json(a.comp.f_comp)},
                         {"categories", cats}});
    }
    json ranking = json::array();
    for (auto a : report.ranking) ranking.push_back(schema.attribute(a).name);
    return {{"attributes", attrs}, {"rankingEdge", ranking}};
}

inline json selection_json(const SelectionResult& s, const AttributeSchema& schema) {
    json common = json::array();
    for (auto [a, c] : s.common)
        common.push_back({{"attribute", schema.attribute(a).name}, {"category", schema.attribute(a).categories[c]}});
    json distinct = json::array();
    for (auto a : s.distinct) distinct.push_back(schema.attribute(a).name);
    return {{"selected", s.selected}, {"common", common}, {"distinct", distinct}, {"matching", s.matching}};
}

inline json quality_json(const QualityReport& r, const AttributeSchema& schema) {
    json nh = json::object();
    for (std::size_t a = 0; a < r.nh_per_attribute.size(); ++a) nh[schema.attribute(a).name] = r.nh_per_attribute[a];
    return {{"config", r.label}, {"k", r.k},       {"tw", r.tw},          {"ct", r.ct},
            {"sc", r.sc},        {"ns", r.ns},     {"nhMean", r.nh_mean}, {"nhMedian", r.nh_median},
            {"nh", nh}};
}

}  // namespace catmap::json
