#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "catmap/dataset.hpp"
#include "catmap/error.hpp"
#include "catmap/geometry.hpp"
#include "catmap/projection.hpp"

namespace catmap {

enum class GlyphDesign { area_square, bar_square, area_circle, arc_circle };

inline std::string_view to_string(GlyphDesign g) {
    switch (g) {
        case GlyphDesign::area_square: return "area_square";
        case GlyphDesign::bar_square: return "bar_square";
        case GlyphDesign::area_circle: return "area_circle";
        case GlyphDesign::arc_circle: return "arc_circle";
    }
    return "area_square";
}

inline std::optional<GlyphDesign> parse_glyph(std::string_view name) {
    for (auto g : {GlyphDesign::area_square, GlyphDesign::bar_square, GlyphDesign::area_circle,
                   GlyphDesign::arc_circle})
        if (name == to_string(g)) return g;
    return std::nullopt;
}

struct GlyphSpec {
    GlyphDesign design = GlyphDesign::area_square;
    double base_size = 40.0;  // px: side of the largest square / diameter of the largest circle
};

/// d3 category10. Category index i takes colour i mod 10 in every attribute.
struct Palette {
    std::array<std::string_view, 10> colors{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    double lighten = 0.4;  // share of the way toward white for background cells

    std::string color(std::uint32_t category) const { return std::string(colors[category % colors.size()]); }

    std::string background(std::uint32_t category) const {
        const auto hex = colors[category % colors.size()];
        std::string out = "#";
        char buf[3];
        for (int k = 0; k < 3; ++k) {
            const int c = std::stoi(std::string(hex.substr(1 + 2 * k, 2)), nullptr, 16);
            const int v = static_cast<int>(std::lround(c + lighten * (255 - c)));
            std::snprintf(buf, sizeof buf, "%02x", v);
            out += buf;
        }
        return out;
    }
};

/// One drawable piece of a glyph, in coordinates relative to the glyph centre
/// (y down). Angles are radians clockwise from 12 o'clock.
struct GlyphPart {
    enum class Shape { rect, sector, bar_track, bar, arc };
    Shape shape = Shape::rect;
    long attribute = -1;  // segment attribute, -1 for size indicators
    std::uint32_t category = 0;
    double x = 0, y = 0, w = 0, h = 0;                       // rect, bar_track, bar
    double radius = 0, inner = 0, start = 0, sweep = 0;      // sector, arc

    double area() const {
        switch (shape) {
            case Shape::rect:
            case Shape::bar_track:
            case Shape::bar: return w * h;
            case Shape::sector: return 0.5 * radius * radius * sweep;
            case Shape::arc: return 0.5 * (radius * radius - inner * inner) * sweep;
        }
        return 0.0;
    }
};

struct GlyphGeometry {
    std::vector<GlyphPart> parts;
    double extent = 0.0;  // radius of a disc around the centre covering the glyph
};

namespace detail {

/// Segments per row for the square designs: floor(sqrt(A)) rows, the first
/// A mod rows rows holding one extra segment. Row heights are proportional to
/// their segment counts, so every segment has area side^2 / A.
inline std::vector<std::size_t> square_rows(std::size_t attributes) {
    const auto rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(attributes))));
    std::vector<std::size_t> out(rows, attributes / rows);
    for (std::size_t r = 0; r < attributes % rows; ++r) ++out[r];
    return out;
}

inline void square_segments(const Assignment& values, double side, double top, std::vector<GlyphPart>& parts) {
    const auto a = values.size();
    std::size_t attr = 0;
    double y = top;
    for (auto count : square_rows(a)) {
        const double h = side * static_cast<double>(count) / static_cast<double>(a);
        const double w = side / static_cast<double>(count);
        for (std::size_t c = 0; c < count; ++c, ++attr) {
            GlyphPart p;
            p.shape = GlyphPart::Shape::rect;
            p.attribute = static_cast<long>(attr);
            p.category = values[attr];
            p.x = -side / 2 + w * static_cast<double>(c);
            p.y = y;
            p.w = w;
            p.h = h;
            parts.push_back(p);
        }
        y += h;
    }
}

inline void circle_segments(const Assignment& values, double radius, std::vector<GlyphPart>& parts) {
    const double sweep = 2.0 * std::numbers::pi / static_cast<double>(values.size());
    for (std::size_t a = 0; a < values.size(); ++a) {
        GlyphPart p;
        p.shape = GlyphPart::Shape::sector;
        p.attribute = static_cast<long>(a);
        p.category = values[a];
        p.radius = radius;
        p.start = sweep * static_cast<double>(a);
        p.sweep = sweep;
        parts.push_back(p);
    }
}

}  // namespace detail

/// Segment and size-indicator geometry of one subset glyph.
inline GlyphGeometry glyph_geometry(const Assignment& values, double rel_freq, double max_rel_freq,
                                    const GlyphSpec& spec) {
    if (!(rel_freq > 0.0) || !(max_rel_freq > 0.0) || rel_freq > max_rel_freq)
        throw Error("bad_frequency", "relative frequency must lie in (0, max]");
    if (values.empty()) throw Error("bad_assignment", "glyph needs at least one attribute");
    const double ratio = rel_freq / max_rel_freq;
    const double base = spec.base_size;
    GlyphGeometry g;
    switch (spec.design) {
        case GlyphDesign::area_square: {
            const double side = base * std::sqrt(ratio);
            detail::square_segments(values, side, -side / 2, g.parts);
            g.extent = side * std::numbers::sqrt2 / 2;
            break;
        }
        case GlyphDesign::bar_square: {
            const double bar_h = 0.15 * base;
            detail::square_segments(values, base, -base / 2, g.parts);
            GlyphPart track;
            track.shape = GlyphPart::Shape::bar_track;
            track.x = -base / 2;
            track.y = -base / 2 - bar_h;
            track.w = base;
            track.h = bar_h;
            GlyphPart bar = track;
            bar.shape = GlyphPart::Shape::bar;
            bar.w = base * ratio;
            g.parts.push_back(track);
            g.parts.push_back(bar);
            g.extent = std::hypot(base / 2, base / 2 + bar_h);
            break;
        }
        case GlyphDesign::area_circle: {
            const double r = base / 2 * std::sqrt(ratio);
            detail::circle_segments(values, r, g.parts);
            g.extent = r;
            break;
        }
        case GlyphDesign::arc_circle: {
            const double r = base / 2;
            const double gap = 0.05 * base, width = 0.1 * base;
            detail::circle_segments(values, r, g.parts);
            GlyphPart arc;
            arc.shape = GlyphPart::Shape::arc;
            arc.inner = r + gap;
            arc.radius = r + gap + width;
            arc.start = 0.0;
            arc.sweep = 2.0 * std::numbers::pi * ratio;
            g.parts.push_back(arc);
            g.extent = arc.radius;
            break;
        }
    }
    return g;
}

/// Collision radius of every subset's glyph, for overlap reduction.
inline std::vector<double> glyph_radii(const SubsetTable& subsets, const GlyphSpec& spec) {
    std::vector<double> out;
    out.reserve(subsets.size());
    const double max_rel = static_cast<double>(subsets.max_count()) / static_cast<double>(subsets.total);
    for (std::size_t i = 0; i < subsets.size(); ++i)
        out.push_back(glyph_geometry(subsets.subsets[i].values, subsets.relative_frequency(i), max_rel, spec).extent);
    return out;
}

/// Fixed-point with up to three decimals and no trailing zeros; "-0" is "0".
inline std::string svg_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s(buf);
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    if (s == "-0") s = "0";
    return s;
}

struct RenderOptions {
    std::optional<std::size_t> primary;    // background attribute; none draws neutral cells
    std::optional<std::size_t> secondary;  // outline attribute
    GlyphSpec glyph;
    Palette palette;
    std::string neutral = "#e6e6e6";
    std::string outline_color = "#222222";
    double outline_width = 3.0;
};

namespace detail {

inline std::string polar(double cx, double cy, double r, double angle) {
    return svg_number(cx + r * std::sin(angle)) + "," + svg_number(cy - r * std::cos(angle));
}

inline std::string sector_path(const GlyphPart& p) {
    if (p.sweep >= 2.0 * std::numbers::pi - 1e-12) {
        // full ring or disc as two half arcs
        std::string d = "M" + polar(0, 0, p.radius, 0) + "A" + svg_number(p.radius) + "," + svg_number(p.radius) +
                        " 0 1 1 " + polar(0, 0, p.radius, std::numbers::pi) + "A" + svg_number(p.radius) + "," +
                        svg_number(p.radius) + " 0 1 1 " + polar(0, 0, p.radius, 0) + "Z";
        if (p.inner > 0.0)
            d += "M" + polar(0, 0, p.inner, 0) + "A" + svg_number(p.inner) + "," + svg_number(p.inner) + " 0 1 0 " +
                 polar(0, 0, p.inner, std::numbers::pi) + "A" + svg_number(p.inner) + "," + svg_number(p.inner) +
                 " 0 1 0 " + polar(0, 0, p.inner, 0) + "Z";
        return d;
    }
    const double end = p.start + p.sweep;
    const char* large = p.sweep > std::numbers::pi ? "1" : "0";
    const std::string r = svg_number(p.radius);
    if (p.inner > 0.0) {
        const std::string ri = svg_number(p.inner);
        return "M" + polar(0, 0, p.radius, p.start) + "A" + r + "," + r + " 0 " + large + " 1 " +
               polar(0, 0, p.radius, end) + "L" + polar(0, 0, p.inner, end) + "A" + ri + "," + ri + " 0 " + large +
               " 0 " + polar(0, 0, p.inner, p.start) + "Z";
    }
    return "M0,0L" + polar(0, 0, p.radius, p.start) + "A" + r + "," + r + " 0 " + large + " 1 " +
           polar(0, 0, p.radius, end) + "Z";
}

inline void append_part(std::string& out, const GlyphPart& p, const Palette& palette) {
    using S = GlyphPart::Shape;
    switch (p.shape) {
        case S::rect:
        case S::bar_track:
        case S::bar: {
            std::string fill = p.shape == S::rect ? palette.color(p.category)
                               : p.shape == S::bar ? std::string("#333333")
                                                   : std::string("#ffffff");
            out += "<rect x=\"" + svg_number(p.x) + "\" y=\"" + svg_number(p.y) + "\" width=\"" + svg_number(p.w) +
                   "\" height=\"" + svg_number(p.h) + "\" fill=\"" + fill + "\"";
            if (p.shape == S::bar_track) out += " stroke=\"#333333\" stroke-width=\"0.5\"";
            out += "/>";
            break;
        }
        case S::sector:
            out += "<path d=\"" + sector_path(p) + "\" fill=\"" + palette.color(p.category) + "\"/>";
            break;
        case S::arc:
            out += "<path d=\"" + sector_path(p) + "\" fill=\"#333333\" fill-rule=\"evenodd\"/>";
            break;
    }
}

inline void check_attribute(const SubsetTable& subsets, std::optional<std::size_t> a) {
    if (a && *a >= subsets.schema.attribute_count())
        throw Error("unknown_attribute", "attribute index " + std::to_string(*a) + " is not in the schema");
}

}  // namespace detail

/// Glyph ids in drawing order: largest first so smaller glyphs stay on top.
inline std::vector<std::size_t> glyph_order(const SubsetTable& subsets) {
    std::vector<std::size_t> ids(subsets.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
        return subsets.subsets[a].count > subsets.subsets[b].count;
    });
    return ids;
}

/// Boundaries between cells whose subsets differ in `attribute`.
inline std::vector<SharedBoundary> category_boundaries(const VoronoiPartition& part, const SubsetTable& subsets,
                                                       std::size_t attribute) {
    std::vector<SharedBoundary> out;
    for (const auto& b : shared_boundaries(part))
        if (subsets.subsets[b.a].values[attribute] != subsets.subsets[b.b].values[attribute]) out.push_back(b);
    return out;
}

/// SVG map: Voronoi background, optional second-attribute outlines, glyphs.
inline std::string render_map(const Layout& layout, const VoronoiPartition& part, const SubsetTable& subsets,
                              const RenderOptions& opts = {}) {
    if (layout.size() != subsets.size() || part.cells.size() != subsets.size())
        throw Error("size_mismatch", "layout, partition and subsets differ in size");
    detail::check_attribute(subsets, opts.primary);
    detail::check_attribute(subsets, opts.secondary);
    const Rect& b = part.bounds;

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + svg_number(b.w) + "\" height=\"" +
           svg_number(b.h) + "\" viewBox=\"" + svg_number(b.x) + " " + svg_number(b.y) + " " + svg_number(b.w) + " " +
           svg_number(b.h) + "\">\n";

    out += "<g id=\"background\">\n";
    for (const auto& cell : part.cells) {
        const std::string fill = opts.primary ? opts.palette.background(subsets.subsets[cell.id].values[*opts.primary])
                                              : opts.neutral;
        out += "<polygon id=\"cell-" + std::to_string(cell.id) + "\" points=\"";
        for (std::size_t k = 0; k < cell.polygon.size(); ++k) {
            if (k) out += ' ';
            out += svg_number(cell.polygon[k].x) + "," + svg_number(cell.polygon[k].y);
        }
        out += "\" fill=\"" + fill + "\" stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n";
    }
    out += "</g>\n";

    out += "<g id=\"outlines\" stroke=\"" + opts.outline_color + "\" stroke-width=\"" + svg_number(opts.outline_width) +
           "\" stroke-linecap=\"round\" fill=\"none\">\n";
    if (opts.secondary)
        for (const auto& s : category_boundaries(part, subsets, *opts.secondary))
            out += "<path d=\"M" + svg_number(s.from.x) + "," + svg_number(s.from.y) + "L" + svg_number(s.to.x) + "," +
                   svg_number(s.to.y) + "\"/>\n";
    out += "</g>\n";

    out += "<g id=\"glyphs\">\n";
    const double max_rel = static_cast<double>(subsets.max_count()) / static_cast<double>(subsets.total);
    for (auto id : glyph_order(subsets)) {
        const auto geom = glyph_geometry(subsets.subsets[id].values, subsets.relative_frequency(id), max_rel, opts.glyph);
        const Point2 p = layout.positions[id];
        out += "<g id=\"glyph-" + std::to_string(id) + "\" transform=\"translate(" + svg_number(p.x) + "," +
               svg_number(p.y) + ")\">";
        for (const auto& part_geom : geom.parts) detail::append_part(out, part_geom, opts.palette);
        out += "</g>\n";
    }
    out += "</g>\n</svg>\n";
    return out;
}

}  // namespace catmap
