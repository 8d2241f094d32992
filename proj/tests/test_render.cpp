#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <regex>
#include <set>

#include "catmap/pipeline.hpp"
#include "catmap/render.hpp"
#include "oracles.hpp"

using namespace catmap;

namespace {

const GlyphDesign kDesigns[] = {GlyphDesign::area_square, GlyphDesign::bar_square, GlyphDesign::area_circle,
                                GlyphDesign::arc_circle};

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

double segment_area(const GlyphGeometry& g) {
    double a = 0.0;
    for (const auto& p : g.parts)
        if (p.attribute >= 0) a += p.area();
    return a;
}

PipelineResult titanic_pipeline(PipelineConfig cfg = {}) {
    return run_pipeline(load_csv(std::string(CATMAP_TEST_DATA) + "/titanic.csv"), cfg);
}

}  // namespace

TEST(Glyph, AreaSquareSizeLaw) {
    GlyphSpec spec{GlyphDesign::area_square, 40.0};
    Assignment v{0, 1, 0, 1};
    auto full = glyph_geometry(v, 0.5, 0.5, spec);
    EXPECT_NEAR(segment_area(full), 1600.0, 1e-9);
    auto quarter = glyph_geometry(v, 0.125, 0.5, spec);
    EXPECT_NEAR(std::sqrt(segment_area(quarter)), 20.0, 1e-9);
}

TEST(Glyph, EightAttributesFourByTwo) {
    GlyphSpec spec{GlyphDesign::area_square, 40.0};
    Assignment v(8, 0);
    auto g = glyph_geometry(v, 1.0, 1.0, spec);
    ASSERT_EQ(g.parts.size(), 8u);
    std::set<long long> xs, ys;
    for (const auto& p : g.parts) {
        EXPECT_NEAR(p.area(), 200.0, 1e-9);
        xs.insert(std::llround(p.x * 1000));
        ys.insert(std::llround(p.y * 1000));
    }
    EXPECT_EQ(xs.size(), 4u);
    EXPECT_EQ(ys.size(), 2u);
    for (std::size_t a = 0; a < 8; ++a) EXPECT_EQ(g.parts[a].attribute, static_cast<long>(a));
}

TEST(Glyph, SegmentsTileTheSquare) {
    GlyphSpec spec{GlyphDesign::area_square, 30.0};
    for (std::size_t attrs = 1; attrs <= 23; ++attrs) {
        auto g = glyph_geometry(Assignment(attrs, 0), 1.0, 1.0, spec);
        ASSERT_EQ(g.parts.size(), attrs);
        double total = 0.0;
        for (const auto& p : g.parts) {
            EXPECT_NEAR(p.area(), 900.0 / double(attrs), 1e-9);
            EXPECT_GE(p.x, -15.0 - 1e-9);
            EXPECT_LE(p.x + p.w, 15.0 + 1e-9);
            EXPECT_GE(p.y, -15.0 - 1e-9);
            EXPECT_LE(p.y + p.h, 15.0 + 1e-9);
            total += p.area();
        }
        EXPECT_NEAR(total, 900.0, 1e-9);
    }
}

TEST(Glyph, SegmentCountAndEqualAreaForEveryDesign) {
    for (auto d : kDesigns)
        for (std::size_t attrs : {1u, 2u, 4u, 8u, 22u}) {
            auto g = glyph_geometry(Assignment(attrs, 1), 0.3, 0.6, {d, 40.0});
            std::size_t segments = 0;
            double first = -1;
            for (const auto& p : g.parts)
                if (p.attribute >= 0) {
                    ++segments;
                    if (first < 0) first = p.area();
                    EXPECT_NEAR(p.area(), first, 1e-9);
                }
            EXPECT_EQ(segments, attrs) << to_string(d);
        }
}

TEST(Glyph, AreaRatioEqualsFrequencyRatio) {
    for (auto d : {GlyphDesign::area_square, GlyphDesign::area_circle}) {
        auto a = glyph_geometry({0, 0, 0}, 0.3, 0.5, {d, 40.0});
        auto b = glyph_geometry({0, 0, 0}, 0.1, 0.5, {d, 40.0});
        EXPECT_NEAR(segment_area(a) / segment_area(b), 3.0, 1e-12);
    }
}

TEST(Glyph, BarAndArcIndicators) {
    auto bar = glyph_geometry({0, 1}, 0.25, 0.5, {GlyphDesign::bar_square, 40.0});
    auto arc = glyph_geometry({0, 1}, 0.25, 0.5, {GlyphDesign::arc_circle, 40.0});
    double width = -1, sweep = -1;
    for (const auto& p : bar.parts)
        if (p.shape == GlyphPart::Shape::bar) width = p.w;
    for (const auto& p : arc.parts)
        if (p.shape == GlyphPart::Shape::arc) sweep = p.sweep;
    EXPECT_NEAR(width, 20.0, 1e-12);
    EXPECT_NEAR(sweep, std::numbers::pi, 1e-12);
    // fixed-size body regardless of frequency
    EXPECT_NEAR(segment_area(bar), 1600.0, 1e-9);
}

TEST(Glyph, Errors) {
    EXPECT_THROW(glyph_geometry({0}, 0.0, 0.5, {}), Error);
    EXPECT_THROW(glyph_geometry({0}, 0.6, 0.5, {}), Error);
    EXPECT_THROW(glyph_geometry({}, 0.5, 0.5, {}), Error);
}

TEST(Palette, CategoryTenAndLightening) {
    Palette p;
    EXPECT_EQ(p.color(0), "#1f77b4");
    EXPECT_EQ(p.color(13), "#d62728");
    EXPECT_EQ(p.background(0), "#79add2");
    EXPECT_EQ(p.background(7), "#b2b2b2");
}

TEST(SvgNumber, Deterministic) {
    EXPECT_EQ(svg_number(1.0), "1");
    EXPECT_EQ(svg_number(-0.0001), "0");
    EXPECT_EQ(svg_number(2.5), "2.5");
    EXPECT_EQ(svg_number(1.23456), "1.235");
}

TEST(RenderMap, LayersAndIds) {
    auto r = titanic_pipeline();
    RenderOptions opts;
    opts.glyph = r.glyph;
    const auto svg = render_map(r.layout, r.partition, r.subsets, opts);
    EXPECT_EQ(count(svg, "<g id=\"background\">"), 1u);
    EXPECT_EQ(count(svg, "<g id=\"outlines\""), 1u);
    EXPECT_EQ(count(svg, "<g id=\"glyphs\">"), 1u);
    EXPECT_EQ(count(svg, "id=\"cell-"), 24u);
    EXPECT_EQ(count(svg, "id=\"glyph-"), 24u);
    // no secondary attribute: the outline layer is empty
    const auto outlines = svg.substr(svg.find("<g id=\"outlines\""), svg.find("<g id=\"glyphs\">") - svg.find("<g id=\"outlines\""));
    EXPECT_EQ(count(outlines, "<path"), 0u);
    EXPECT_EQ(svg, render_map(r.layout, r.partition, r.subsets, opts));
}

TEST(RenderMap, GlyphsLargestFirst) {
    auto r = titanic_pipeline();
    const auto svg = render_map(r.layout, r.partition, r.subsets, {});
    std::regex id_re("id=\"glyph-([0-9]+)\"");
    std::vector<std::uint64_t> counts;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), id_re); it != std::sregex_iterator(); ++it)
        counts.push_back(r.subsets.subsets[std::stoul((*it)[1])].count);
    ASSERT_EQ(counts.size(), 24u);
    for (std::size_t i = 1; i < counts.size(); ++i) EXPECT_GE(counts[i - 1], counts[i]);
}

TEST(RenderMap, UniformPrimaryIsOneColour) {
    auto s = deduplicate(parse_csv("a,b\nx,p\nx,q\nx,r\nx,s\n"));
    PipelineConfig cfg;
    cfg.overlap_reduction = false;
    auto r = run_pipeline(s, cfg);
    RenderOptions opts;
    opts.primary = 0;
    const auto svg = render_map(r.layout, r.partition, r.subsets, opts);
    std::regex fill_re("<polygon[^>]*fill=\"(#[0-9a-f]{6})\"");
    std::set<std::string> fills;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), fill_re); it != std::sregex_iterator(); ++it)
        fills.insert((*it)[1]);
    EXPECT_EQ(fills, std::set<std::string>{Palette{}.background(0)});
}

TEST(RenderMap, OutlinesMatchDifferingBoundaries) {
    auto r = titanic_pipeline();
    for (std::size_t a = 0; a < 4; ++a) {
        RenderOptions opts;
        opts.secondary = a;
        const auto svg = render_map(r.layout, r.partition, r.subsets, opts);
        std::size_t expected = 0;
        for (const auto& b : shared_boundaries(r.partition)) {
            EXPECT_TRUE(std::binary_search(r.delaunay.edges().begin(), r.delaunay.edges().end(), std::pair{b.a, b.b}));
            if (r.subsets.subsets[b.a].values[a] != r.subsets.subsets[b.b].values[a]) ++expected;
        }
        const auto outlines = svg.substr(svg.find("<g id=\"outlines\""), svg.find("<g id=\"glyphs\">") - svg.find("<g id=\"outlines\""));
        EXPECT_EQ(count(outlines, "<path"), expected);
        // every outlined boundary is a crossing Delaunay edge
        EXPECT_LE(expected, static_cast<std::size_t>(r.fracturedness.attributes[a].f_edge.num));
    }
}

TEST(RenderMap, SexSplitsIntoTwoRegions) {
    auto r = titanic_pipeline();
    const auto sex = r.subsets.schema.find_attribute("Sex").value();
    RenderOptions opts;
    opts.primary = sex;
    const auto svg = render_map(r.layout, r.partition, r.subsets, opts);
    std::regex fill_re("<polygon[^>]*fill=\"(#[0-9a-f]{6})\"");
    std::set<std::string> fills;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), fill_re); it != std::sregex_iterator(); ++it)
        fills.insert((*it)[1]);
    EXPECT_EQ(fills.size(), 2u);
    EXPECT_EQ(r.fracturedness.attributes[sex].comp.omega, 2);
}

TEST(RenderMap, UnknownAttribute) {
    auto r = titanic_pipeline();
    RenderOptions opts;
    opts.primary = 9;
    EXPECT_THROW(render_map(r.layout, r.partition, r.subsets, opts), Error);
}

TEST(RenderMap, EveryDesignRenders) {
    for (auto d : kDesigns) {
        PipelineConfig cfg;
        cfg.glyph = d;
        auto r = titanic_pipeline(cfg);
        RenderOptions opts;
        opts.glyph = r.glyph;
        opts.primary = 0;
        opts.secondary = 3;
        const auto svg = render_map(r.layout, r.partition, r.subsets, opts);
        EXPECT_EQ(svg.find("nan"), std::string::npos);
        EXPECT_EQ(svg.find("inf"), std::string::npos);
        EXPECT_EQ(count(svg, "id=\"glyph-"), 24u);
    }
}
