#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "catmap/http.hpp"
#include "catmap/pipeline.hpp"
#include "catmap/quality.hpp"
#include "catmap/render.hpp"
#include "catmap/serialize.hpp"
#include "catmap/service.hpp"

namespace {

struct Options {
    std::string input;
    std::string output;
    std::string distance = "overlap";
    std::string method = "mds";
    bool overlap = true;
    std::uint64_t seed = 0;
    std::string glyph = "area_square";
    std::string attribute;
    std::string secondary;
    std::size_t k = 7;
    std::string configs = "mds:overlap,mds:jaccard,mca";
    std::string format = "csv";
    std::string config_file;
    std::string host;
    int port = 0;
    std::string data_dir;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--input", o.input, "Input file");
    cmd->add_option("--output", o.output, "Output file (default: stdout)");
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--distance", o.distance, "overlap, jaccard, dice, manhattan or euclidean");
    cmd->add_option("--method", o.method, "mds or mca");
    cmd->add_option("--overlap-reduction", o.overlap, "Remove glyph overlap (true/false)");
    cmd->add_option("--glyph", o.glyph, "area_square, bar_square, area_circle or arc_circle");
    cmd->add_option("--attribute", o.attribute, "Background attribute");
    cmd->add_option("--secondary-attribute", o.secondary, "Outline attribute");
    cmd->add_option("--k", o.k, "Neighbourhood size for the quality metrics");
}

catmap::PipelineConfig pipeline_config(const Options& o) {
    catmap::PipelineConfig cfg;
    auto m = catmap::parse_measure(o.distance);
    if (!m) throw CLI::ValidationError("--distance", "unknown distance '" + o.distance + "'");
    auto method = catmap::parse_method(o.method);
    if (!method) throw CLI::ValidationError("--method", "unknown method '" + o.method + "'");
    auto glyph = catmap::parse_glyph(o.glyph);
    if (!glyph) throw CLI::ValidationError("--glyph", "unknown glyph '" + o.glyph + "'");
    cfg.measure = *m;
    cfg.method = *method;
    cfg.overlap_reduction = o.overlap;
    cfg.seed = o.seed;
    cfg.glyph = *glyph;
    return cfg;
}

void require_input(const Options& o) {
    if (o.input.empty()) throw CLI::RequiredError("--input");
}

void write_output(const Options& o, const std::string& text) {
    if (o.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(o.output, std::ios::binary);
    if (!out) throw catmap::Error("unwritable_file", "cannot write " + o.output);
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw catmap::Error("unreadable_file", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<std::size_t> attribute_index(const catmap::SubsetTable& t, const std::string& name) {
    if (name.empty()) return std::nullopt;
    auto a = t.schema.find_attribute(name);
    if (!a) throw catmap::Error("unknown_attribute", "no attribute '" + name + "'");
    return a;
}

int cmd_project(const Options& o) {
    require_input(o);
    const auto cfg = pipeline_config(o);
    const auto r = catmap::run_pipeline(catmap::load_csv(o.input), cfg);
    auto j = catmap::json::layout_json(r.layout, &r.subsets, &cfg.viewport);
    j["glyph"] = {{"design", std::string(catmap::to_string(r.glyph.design))}, {"baseSize", r.glyph.base_size}};
    write_output(o, j.dump(2) + "\n");
    return 0;
}

int cmd_tessellate(const Options& o) {
    require_input(o);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(o.input));
    } catch (const nlohmann::json::parse_error& e) {
        throw catmap::Error("bad_layout", e.what());
    }
    auto parsed = catmap::json::parse_layout(j);
    catmap::PipelineResult r;
    r.layout = std::move(parsed.layout);
    catmap::tessellate(r, parsed.viewport);
    write_output(o, catmap::json::partition_json(r.partition, r.delaunay).dump(2) + "\n");
    return 0;
}

int cmd_fracturedness(const Options& o) {
    require_input(o);
    const auto r = catmap::run_pipeline(catmap::load_csv(o.input), pipeline_config(o));
    write_output(o, catmap::json::fracturedness_json(r.fracturedness, r.subsets.schema).dump(2) + "\n");
    return 0;
}

int cmd_metrics(const Options& o) {
    require_input(o);
    if (o.format != "csv" && o.format != "markdown")
        throw CLI::ValidationError("--format", "must be csv or markdown");
    catmap::CompareOptions opts;
    opts.k = o.k;
    opts.mds.seed = o.seed;
    const auto rows = catmap::compare_pipelines(catmap::load_csv(o.input), catmap::parse_pipeline_specs(o.configs), opts);
    std::ostringstream out;
    if (o.format == "csv")
        catmap::write_quality_csv(out, rows);
    else
        catmap::write_quality_markdown(out, rows);
    write_output(o, out.str());
    return 0;
}

int cmd_render(const Options& o) {
    require_input(o);
    const auto r = catmap::run_pipeline(catmap::load_csv(o.input), pipeline_config(o));
    catmap::RenderOptions opts;
    opts.primary = attribute_index(r.subsets, o.attribute);
    opts.secondary = attribute_index(r.subsets, o.secondary);
    opts.glyph = r.glyph;
    write_output(o, catmap::render_map(r.layout, r.partition, r.subsets, opts));
    return 0;
}

int cmd_serve(const Options& o) {
    auto cfg = o.config_file.empty() ? catmap::ServiceConfig{} : catmap::ServiceConfig::load(o.config_file);
    if (!o.host.empty()) cfg.host = o.host;
    if (o.port) cfg.port = o.port;
    if (!o.data_dir.empty()) cfg.data_dir = o.data_dir;
    catmap::Service service(cfg);
    for (const auto& f : service.load_data_dir()) std::cerr << "warning: skipped " << f << "\n";
    httplib::Server server;
    catmap::mount(server, service);
    std::cerr << "listening on " << cfg.host << ":" << cfg.port << "\n";
    if (!server.listen(cfg.host, cfg.port))
        throw catmap::Error("listen_failed", "cannot listen on " + cfg.host + ":" + std::to_string(cfg.port));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Categorical data maps: projection, tessellation, fracturedness, quality, rendering"};
    app.require_subcommand(1);
    Options o;

    auto* project = app.add_subcommand("project", "CSV to layout JSON");
    auto* tessellate = app.add_subcommand("tessellate", "Layout JSON to Delaunay/Voronoi JSON");
    auto* fract = app.add_subcommand("fracturedness", "CSV to fracturedness report JSON");
    auto* metrics = app.add_subcommand("metrics", "Projection quality table");
    auto* render = app.add_subcommand("render", "CSV to SVG map");
    auto* serve = app.add_subcommand("serve", "Start the HTTP service");
    for (auto* cmd : {project, tessellate, fract, metrics, render, serve}) add_common(cmd, o);
    metrics->add_option("--configs", o.configs, "Comma-separated method:distance list");
    metrics->add_option("--format", o.format, "csv or markdown");
    serve->add_option("--config", o.config_file, "key=value config file");
    serve->add_option("--host", o.host, "Bind address");
    serve->add_option("--port", o.port, "Port");
    serve->add_option("--data-dir", o.data_dir, "Directory of CSV files to preload");

    try {
        app.parse(argc, argv);
        if (*project) return cmd_project(o);
        if (*tessellate) return cmd_tessellate(o);
        if (*fract) return cmd_fracturedness(o);
        if (*metrics) return cmd_metrics(o);
        if (*render) return cmd_render(o);
        if (*serve) return cmd_serve(o);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Error& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    } catch (const catmap::Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
        return 1;
    }
    return 2;
}
