#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "catmap/dataset.hpp"
#include "catmap/distance.hpp"
#include "catmap/fracturedness.hpp"
#include "catmap/geometry.hpp"
#include "catmap/projection.hpp"
#include "catmap/render.hpp"

namespace catmap {

/// End-to-end settings: encoding and distance, projection, optional overlap
/// reduction in pixel space, tessellation.
struct PipelineConfig {
    Measure measure = Measure::overlap;
    Method method = Method::mds;
    bool overlap_reduction = true;
    std::uint64_t seed = 0;
    GlyphDesign glyph = GlyphDesign::area_square;
    double base_size = 0.0;  // px; 0 picks a size from the viewport and subset count
    Viewport viewport{};
    double padding = 40.0;
    MdsConfig mds{};
    OverlapConfig overlap{};
};

struct PipelineResult {
    SubsetTable subsets;
    Layout projection;  // P stage, layout units
    Layout layout;      // normalized to the viewport, overlap-reduced if requested
    GlyphSpec glyph;
    DelaunayGraph delaunay;
    VoronoiPartition partition;
    FracturednessReport fracturedness;
};

/// Largest-glyph size for n subsets: 40 px, shrunk so that n glyphs of that
/// size cover at most a quarter of the viewport.
inline double auto_base_size(std::size_t n, const Viewport& v) {
    const double fit = std::sqrt(0.25 * v.width * v.height / static_cast<double>(std::max<std::size_t>(n, 1)));
    return std::clamp(fit, 2.0, 40.0);
}

/// Projected layout for the configured method.
inline Layout project(const SubsetTable& subsets, const PipelineConfig& cfg) {
    if (cfg.method == Method::mca) return mca_project(subsets);
    MdsConfig mds = cfg.mds;
    mds.seed = cfg.seed;
    return mds_project(build_matrix(subsets, cfg.measure), mds);
}

/// Tessellation of `layout.positions`, which after overlap reduction are the
/// reduced positions.
inline void tessellate(PipelineResult& r, const Viewport& viewport) {
    const auto& pos = r.layout.positions;
    r.partition.bounds = default_bounds(pos, viewport.width, viewport.height);
    if (pos.size() == 1) {
        r.delaunay = {};
        r.delaunay.points = pos;
        r.delaunay.graph.vertices = 1;
        r.partition = voronoi_single(pos[0], r.partition.bounds);
        return;
    }
    r.delaunay = delaunay(pos);
    r.partition = voronoi(r.delaunay, r.partition.bounds);
}

inline PipelineResult run_pipeline(SubsetTable subsets, const PipelineConfig& cfg = {}) {
    PipelineResult r;
    r.subsets = std::move(subsets);
    r.projection = project(r.subsets, cfg);
    r.glyph = {cfg.glyph, cfg.base_size > 0.0 ? cfg.base_size : auto_base_size(r.subsets.size(), cfg.viewport)};
    r.layout = normalize_layout(r.projection, cfg.viewport, cfg.padding);
    const auto radii = glyph_radii(r.subsets, r.glyph);
    if (cfg.overlap_reduction)
        r.layout = reduce_overlap(r.layout, radii, cfg.overlap);
    else
        r.layout.radii = radii;
    tessellate(r, cfg.viewport);
    if (r.subsets.size() >= 2) r.fracturedness = fracturedness_report(r.delaunay.graph, r.subsets);
    return r;
}

inline PipelineResult run_pipeline(const CategoricalTable& table, const PipelineConfig& cfg = {}) {
    return run_pipeline(deduplicate(table), cfg);
}

}  // namespace catmap
