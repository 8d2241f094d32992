#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "catmap/dataset.hpp"
#include "catmap/error.hpp"
#include "catmap/pipeline.hpp"
#include "catmap/quality.hpp"
#include "catmap/render.hpp"
#include "catmap/selection.hpp"
#include "catmap/serialize.hpp"

namespace catmap {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir;
    std::size_t default_k = 7;

    /// key = value lines; '#' starts a comment.
    static ServiceConfig parse(std::string_view text) {
        ServiceConfig cfg;
        std::istringstream in{std::string(text)};
        std::string line;
        int lineno = 0;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw Error("bad_config", "line " + std::to_string(lineno) + ": expected key = value");
            const auto key = trim(line.substr(0, eq));
            auto value = trim(line.substr(eq + 1));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
            try {
                if (key == "host")
                    cfg.host = value;
                else if (key == "port")
                    cfg.port = std::stoi(value);
                else if (key == "data_dir")
                    cfg.data_dir = value;
                else if (key == "default_k")
                    cfg.default_k = std::stoul(value);
                else
                    throw Error("bad_config", "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
            } catch (const std::logic_error&) {
                throw Error("bad_config", "line " + std::to_string(lineno) + ": bad value for '" + key + "'");
            }
        }
        return cfg;
    }

    static ServiceConfig load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("unreadable_file", "cannot open " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }
};

struct Request {
    std::string method;  // "GET", "POST"
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// 64-bit FNV-1a, hex encoded.
inline std::string content_id(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// HTTP-independent request handler. Datasets are immutable once added;
/// pipeline results are computed at most once per parameter key, concurrent
/// requests for the same key wait on the same computation.
class Service {
public:
    struct Dataset {
        std::string id;
        std::string name;
        CategoricalTable table;
        SubsetTable subsets;
    };

    explicit Service(ServiceConfig cfg = {}) : cfg_(std::move(cfg)) {}

    const ServiceConfig& config() const noexcept { return cfg_; }

    /// Returns the dataset id and whether it was new.
    std::pair<std::string, bool> add_dataset(std::string_view csv, std::string name) {
        auto table = parse_csv(csv);
        auto ds = std::make_shared<Dataset>();
        ds->id = content_id(csv);
        ds->name = name.empty() ? ds->id : std::move(name);
        ds->subsets = deduplicate(table);
        ds->table = std::move(table);
        std::unique_lock lock(datasets_mu_);
        auto [it, inserted] = datasets_.emplace(ds->id, ds);
        return {it->first, inserted};
    }

    /// Loads every *.csv in the data directory, in name order. Returns the
    /// files that failed with their error text.
    std::vector<std::string> load_data_dir() {
        std::vector<std::string> failures;
        if (cfg_.data_dir.empty()) return failures;
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::directory_iterator(cfg_.data_dir))
            if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            try {
                std::ifstream in(f, std::ios::binary);
                std::ostringstream ss;
                ss << in.rdbuf();
                add_dataset(ss.str(), f.stem().string());
            } catch (const Error& e) {
                failures.push_back(f.string() + ": " + e.code() + ": " + e.what());
            }
        }
        return failures;
    }

    Response handle(const Request& req) {
        try {
            return route(req);
        } catch (const HttpError& e) {
            return error_response(e.status, e.code, e.message);
        } catch (const Error& e) {
            return error_response(422, e.code(), e.what());
        }
    }

    /// Number of pipeline computations started so far (cache misses).
    std::size_t computations() const {
        std::lock_guard lock(cache_mu_);
        return computations_;
    }

private:
    using ResultPtr = std::shared_ptr<const PipelineResult>;
    using CacheKey = std::tuple<std::string, int, int, bool, std::uint64_t, int>;

    struct HttpError {
        int status;
        std::string code;
        std::string message;
    };

    struct Params {
        PipelineConfig pipeline;
        bool measure_given = false;
    };

    static Response error_response(int status, const std::string& code, const std::string& message) {
        nlohmann::json j = {{"error", {{"code", code}, {"message", message}}}};
        return {status, "application/json", j.dump()};
    }

    static Response json_response(const nlohmann::json& j, int status = 200) {
        return {status, "application/json", j.dump()};
    }

    static std::vector<std::string> split_path(const std::string& path) {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : path) {
            if (c == '/') {
                if (!cur.empty()) parts.push_back(std::move(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) parts.push_back(std::move(cur));
        return parts;
    }

    static const std::string* find_param(const Request& req, const std::string& key) {
        auto it = req.query.find(key);
        return it == req.query.end() ? nullptr : &it->second;
    }

    static std::uint64_t parse_uint(const std::string& key, const std::string& v) {
        std::uint64_t out = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
            throw HttpError{422, "invalid_param", key + " must be a non-negative integer"};
        return out;
    }

    static bool parse_bool(const std::string& key, const std::string& v) {
        if (v == "1" || v == "true" || v == "on") return true;
        if (v == "0" || v == "false" || v == "off") return false;
        throw HttpError{422, "invalid_param", key + " must be true or false"};
    }

    static Params pipeline_params(const Request& req) {
        Params p;
        if (auto v = find_param(req, "distance")) {
            auto m = parse_measure(*v);
            if (!m) throw HttpError{422, "invalid_param", "unknown distance '" + *v + "'"};
            p.pipeline.measure = *m;
            p.measure_given = true;
        }
        if (auto v = find_param(req, "method")) {
            auto m = parse_method(*v);
            if (!m) throw HttpError{422, "invalid_param", "unknown method '" + *v + "'"};
            p.pipeline.method = *m;
        }
        if (auto v = find_param(req, "overlap")) p.pipeline.overlap_reduction = parse_bool("overlap", *v);
        if (auto v = find_param(req, "seed")) p.pipeline.seed = parse_uint("seed", *v);
        if (auto v = find_param(req, "glyph")) {
            auto g = parse_glyph(*v);
            if (!g) throw HttpError{422, "invalid_param", "unknown glyph '" + *v + "'"};
            p.pipeline.glyph = *g;
        }
        return p;
    }

    std::shared_ptr<const Dataset> dataset(const std::string& id) const {
        std::shared_lock lock(datasets_mu_);
        auto it = datasets_.find(id);
        if (it == datasets_.end()) throw HttpError{404, "not_found", "unknown dataset '" + id + "'"};
        return it->second;
    }

    // The key includes the glyph design because collision radii depend on it.
    ResultPtr result(const Dataset& ds, const PipelineConfig& cfg) const {
        const bool mca = cfg.method == Method::mca;
        CacheKey key{ds.id, mca ? -1 : static_cast<int>(cfg.measure), static_cast<int>(cfg.method),
                     cfg.overlap_reduction, mca ? 0 : cfg.seed, static_cast<int>(cfg.glyph)};
        std::promise<ResultPtr> promise;
        std::shared_future<ResultPtr> future;
        bool owner = false;
        {
            std::lock_guard lock(cache_mu_);
            auto it = cache_.find(key);
            if (it == cache_.end()) {
                future = promise.get_future().share();
                cache_.emplace(key, future);
                owner = true;
                ++computations_;
            } else {
                future = it->second;
            }
        }
        if (owner) {
            try {
                promise.set_value(std::make_shared<const PipelineResult>(run_pipeline(ds.subsets, cfg)));
            } catch (...) {
                promise.set_exception(std::current_exception());
            }
        }
        return future.get();
    }

    Response route(const Request& req) {
        const auto parts = split_path(req.path);
        if (parts.empty() || parts[0] != "datasets") throw HttpError{404, "not_found", "no route " + req.path};
        if (parts.size() == 1) {
            if (req.method == "GET") return list_datasets();
            if (req.method == "POST") return upload(req);
            throw HttpError{405, "method_not_allowed", req.method + " " + req.path};
        }
        const auto ds = dataset(parts[1]);
        if (parts.size() == 2) {
            if (req.method != "GET") throw HttpError{405, "method_not_allowed", req.method + " " + req.path};
            return json_response(describe(*ds));
        }
        if (parts.size() != 3) throw HttpError{404, "not_found", "no route " + req.path};
        const auto& what = parts[2];
        if (what == "selection") {
            if (req.method != "POST") throw HttpError{405, "method_not_allowed", req.method + " " + req.path};
            return selection(*ds, req);
        }
        if (req.method != "GET") throw HttpError{405, "method_not_allowed", req.method + " " + req.path};
        if (what == "subsets") return json_response(json::subsets_json(ds->subsets));
        const auto params = pipeline_params(req);
        if (what == "layout") {
            const auto r = result(*ds, params.pipeline);
            auto j = json::layout_json(r->layout, &r->subsets, &params.pipeline.viewport);
            j["glyph"] = {{"design", std::string(to_string(r->glyph.design))}, {"baseSize", r->glyph.base_size}};
            return json_response(j);
        }
        if (what == "tessellation") {
            const auto r = result(*ds, params.pipeline);
            return json_response(json::partition_json(r->partition, r->delaunay));
        }
        if (what == "fracturedness") {
            const auto r = result(*ds, params.pipeline);
            return json_response(json::fracturedness_json(r->fracturedness, r->subsets.schema));
        }
        if (what == "quality") return quality(*ds, req, params);
        if (what == "render.svg") return render(*ds, req, params);
        throw HttpError{404, "not_found", "no route " + req.path};
    }

    static nlohmann::json describe(const Dataset& ds) {
        return {{"id", ds.id},
                {"name", ds.name},
                {"rows", ds.table.row_count()},
                {"subsets", ds.subsets.size()},
                {"schema", json::schema_json(ds.subsets.schema)}};
    }

    Response list_datasets() const {
        nlohmann::json out = nlohmann::json::array();
        std::shared_lock lock(datasets_mu_);
        for (const auto& [id, ds] : datasets_)
            out.push_back({{"id", id}, {"name", ds->name}, {"rows", ds->table.row_count()}, {"subsets", ds->subsets.size()}});
        return json_response(out);
    }

    Response upload(const Request& req) {
        std::string name;
        if (auto v = find_param(req, "name")) name = *v;
        std::pair<std::string, bool> added;
        try {
            added = add_dataset(req.body, name);
        } catch (const Error& e) {
            throw HttpError{400, e.code(), e.what()};
        }
        auto j = describe(*dataset(added.first));
        return json_response(j, added.second ? 201 : 200);
    }

    Response selection(const Dataset& ds, const Request& req) const {
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception& e) {
            throw HttpError{400, "malformed_json", e.what()};
        }
        const nlohmann::json* ids = &body;
        if (body.is_object()) {
            if (!body.contains("ids")) throw HttpError{422, "invalid_param", "body needs an 'ids' array"};
            ids = &body["ids"];
        }
        if (!ids->is_array()) throw HttpError{422, "invalid_param", "'ids' must be an array"};
        std::vector<std::size_t> sel;
        for (const auto& v : *ids) {
            if (!v.is_number_integer() || v.get<long long>() < 0)
                throw HttpError{422, "invalid_param", "ids must be non-negative integers"};
            sel.push_back(v.get<std::size_t>());
        }
        // order attributes like the side panel: ascending edge fracturedness
        const auto r = result(ds, pipeline_params(req).pipeline);
        const auto s = common_categories(ds.subsets, sel, r->fracturedness.ranking);
        return json_response(json::selection_json(s, ds.subsets.schema));
    }

    Response quality(const Dataset& ds, const Request& req, const Params& params) const {
        std::size_t k = cfg_.default_k;
        if (auto v = find_param(req, "k")) k = parse_uint("k", *v);
        if (k < 1 || k >= ds.subsets.size())
            throw HttpError{422, "invalid_param", "k must lie in [1, " + std::to_string(ds.subsets.size()) + ")"};
        PipelineSpec spec{params.pipeline.method, std::nullopt};
        if (params.pipeline.method == Method::mds || params.measure_given) spec.measure = params.pipeline.measure;
        const auto r = result(ds, params.pipeline);
        const auto high = build_matrix(ds.subsets, spec.grounding());
        auto report = evaluate_quality(high, r->projection, ds.subsets, k);
        report.label = spec.label();
        return json_response(json::quality_json(report, ds.subsets.schema));
    }

    Response render(const Dataset& ds, const Request& req, const Params& params) const {
        RenderOptions opts;
        auto attribute = [&](const char* key) -> std::optional<std::size_t> {
            auto v = find_param(req, key);
            if (!v || v->empty()) return std::nullopt;
            auto a = ds.subsets.schema.find_attribute(*v);
            if (!a) throw HttpError{422, "unknown_attribute", "no attribute '" + *v + "'"};
            return *a;
        };
        opts.primary = attribute("attribute");
        opts.secondary = attribute("secondary");
        const auto r = result(ds, params.pipeline);
        opts.glyph = r->glyph;
        return {200, "image/svg+xml", render_map(r->layout, r->partition, r->subsets, opts)};
    }

    ServiceConfig cfg_;
    mutable std::shared_mutex datasets_mu_;
    std::map<std::string, std::shared_ptr<const Dataset>> datasets_;
    mutable std::mutex cache_mu_;
    mutable std::map<CacheKey, std::shared_future<ResultPtr>> cache_;
    mutable std::size_t computations_ = 0;
};

}  // namespace catmap
