#include "cli/config.hpp"

#include <algorithm>
#include <set>

#include "wikimig/csv.hpp"
#include "wikimig/error.hpp"

namespace wikimig::cli {

using json = nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    raise(ErrorCode::Configuration, where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) bad(where, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items()) {
        if (!ok.count(k)) bad(where, "unknown key '" + k + "'");
    }
}

std::string get_string(const json& v, const std::string& where) {
    if (!v.is_string()) bad(where, "expected a string");
    return v.get<std::string>();
}

double get_number(const json& v, const std::string& where) {
    if (!v.is_number()) bad(where, "expected a number");
    return v.get<double>();
}

int get_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) bad(where, "expected an integer");
    return v.get<int>();
}

ts::Day get_day(const json& v, const std::string& where) {
    const auto text = get_string(v, where);
    try {
        return ts::parse_iso_day(text);
    } catch (const Error&) {
        bad(where, "invalid date '" + text + "'");
    }
}

std::filesystem::path get_path(const json& v, const std::string& where, const std::filesystem::path& base) {
    std::filesystem::path p = get_string(v, where);
    if (p.empty()) bad(where, "empty path");
    return p.is_absolute() ? p : (base / p).lexically_normal();
}

void read_window(const json& obj, const std::string& where, std::optional<ts::Day>& start,
                 std::optional<ts::Day>& end) {
    only_keys(obj, where, {"start", "end"});
    if (obj.contains("start")) start = get_day(obj["start"], where + ".start");
    if (obj.contains("end")) end = get_day(obj["end"], where + ".end");
    if (start && end && *end < *start) bad(where, "end precedes start");
}

std::string echo_path(const std::filesystem::path& p, const std::filesystem::path& base) {
    if (base.empty()) return p.generic_string();
    return p.lexically_proximate(base).generic_string();
}

json window_json(const std::optional<ts::Day>& start, const std::optional<ts::Day>& end) {
    json w = json::object();
    if (start) w["start"] = ts::to_iso(*start);
    if (end) w["end"] = ts::to_iso(*end);
    return w;
}

}  // namespace

std::string PipelineConfig::language_name(const std::string& code) const {
    const auto it = language_names.find(code);
    return it == language_names.end() ? code : it->second;
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        raise(ErrorCode::Configuration, std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(doc, "config",
              {"projects", "articles", "ground_truth", "location_mapping", "date_range", "weekly_anchor",
               "relchange_window", "breaks", "econometrics", "rank", "language_names", "cache_root", "output_dir",
               "seed", "workers", "user_agent", "fetch"});

    PipelineConfig cfg;
    cfg.base_dir = base_dir;

    if (!doc.contains("date_range")) bad("config", "date_range is required");
    only_keys(doc["date_range"], "date_range", {"start", "end"});
    if (!doc["date_range"].contains("start") || !doc["date_range"].contains("end")) {
        bad("date_range", "start and end are required");
    }
    cfg.start = get_day(doc["date_range"]["start"], "date_range.start");
    cfg.end = get_day(doc["date_range"]["end"], "date_range.end");
    if (cfg.end < cfg.start) bad("date_range", "end precedes start");

    if (doc.contains("projects")) {
        if (!doc["projects"].is_array()) bad("projects", "expected an array");
        for (const auto& p : doc["projects"]) cfg.projects.push_back(get_string(p, "projects[]"));
    }
    if (doc.contains("articles")) {
        const auto& arts = doc["articles"];
        if (!arts.is_object()) bad("articles", "expected an object keyed by project");
        for (const auto& [project, list] : arts.items()) {
            const std::string where = "articles." + project;
            if (!list.is_array()) bad(where, "expected an array");
            if (doc.contains("projects") &&
                std::find(cfg.projects.begin(), cfg.projects.end(), project) == cfg.projects.end()) {
                bad(where, "project is not listed in 'projects'");
            }
            for (const auto& item : list) {
                ArticleSpec a;
                a.project = project;
                if (item.is_string()) {
                    a.title = item.get<std::string>();
                    a.city = a.title;
                } else {
                    only_keys(item, where + "[]", {"city", "title"});
                    if (!item.contains("title")) bad(where + "[]", "title is required");
                    a.title = get_string(item["title"], where + "[].title");
                    a.city = item.contains("city") ? get_string(item["city"], where + "[].city") : a.title;
                }
                cfg.articles.push_back(std::move(a));
            }
        }
        if (!doc.contains("projects")) {
            for (const auto& [project, list] : arts.items()) cfg.projects.push_back(project);
        }
    }
    for (const auto& p : cfg.projects) {
        if (language_of_project(p).empty()) bad("projects", "'" + p + "' is not a <lang>.wikipedia.org project");
    }

    if (doc.contains("ground_truth")) {
        if (!doc["ground_truth"].is_array()) bad("ground_truth", "expected an array");
        std::set<std::string> names;
        for (const auto& g : doc["ground_truth"]) {
            only_keys(g, "ground_truth[]", {"name", "kind", "path"});
            if (!g.contains("kind") || !g.contains("path")) bad("ground_truth[]", "kind and path are required");
            GroundTruthSpec spec;
            try {
                spec.kind = ingest::parse_ground_truth_kind(get_string(g["kind"], "ground_truth[].kind"));
            } catch (const Error& e) {
                bad("ground_truth[].kind", e.what());
            }
            spec.path = get_path(g["path"], "ground_truth[].path", base_dir);
            spec.name = g.contains("name") ? get_string(g["name"], "ground_truth[].name")
                                           : spec.path.stem().string();
            if (!names.insert(spec.name).second) bad("ground_truth", "duplicate name '" + spec.name + "'");
            cfg.ground_truth.push_back(std::move(spec));
        }
    }
    if (doc.contains("location_mapping")) {
        cfg.location_mapping = get_path(doc["location_mapping"], "location_mapping", base_dir);
    }
    if (doc.contains("weekly_anchor")) cfg.weekly_anchor = get_day(doc["weekly_anchor"], "weekly_anchor");

    if (doc.contains("relchange_window")) {
        const auto& w = doc["relchange_window"];
        only_keys(w, "relchange_window", {"start", "days"});
        if (w.contains("start")) cfg.relchange_window_start = get_day(w["start"], "relchange_window.start");
        if (w.contains("days")) cfg.relchange_window_days = get_int(w["days"], "relchange_window.days");
        if (cfg.relchange_window_days < 1) bad("relchange_window.days", "must be positive");
    }

    if (doc.contains("breaks")) {
        const auto& b = doc["breaks"];
        only_keys(b, "breaks", {"min_segment_frac", "max_breaks", "ci_level", "window", "report_year"});
        if (b.contains("min_segment_frac")) {
            cfg.breaks.min_segment_frac = get_number(b["min_segment_frac"], "breaks.min_segment_frac");
        }
        if (b.contains("max_breaks")) cfg.breaks.max_breaks = get_int(b["max_breaks"], "breaks.max_breaks");
        if (b.contains("ci_level")) cfg.breaks.ci_level = get_number(b["ci_level"], "breaks.ci_level");
        if (b.contains("window")) read_window(b["window"], "breaks.window", cfg.breaks.window_start, cfg.breaks.window_end);
        if (b.contains("report_year")) cfg.breaks.report_year = get_int(b["report_year"], "breaks.report_year");
    }
    if (!(cfg.breaks.min_segment_frac > 0.0 && cfg.breaks.min_segment_frac <= 0.5)) {
        bad("breaks.min_segment_frac", "must lie in (0, 0.5]");
    }
    if (cfg.breaks.max_breaks < 0) bad("breaks.max_breaks", "must be non-negative");
    if (!(cfg.breaks.ci_level > 0.0 && cfg.breaks.ci_level < 1.0)) bad("breaks.ci_level", "must lie in (0, 1)");

    if (doc.contains("econometrics")) {
        const auto& e = doc["econometrics"];
        only_keys(e, "econometrics", {"p_max", "adf_max_lag", "lm_order", "significance", "window"});
        auto& o = cfg.econometrics;
        if (e.contains("p_max")) o.p_max = get_int(e["p_max"], "econometrics.p_max");
        if (e.contains("adf_max_lag") && !e["adf_max_lag"].is_null()) {
            o.adf_max_lag = get_int(e["adf_max_lag"], "econometrics.adf_max_lag");
        }
        if (e.contains("lm_order")) o.lm_order = get_int(e["lm_order"], "econometrics.lm_order");
        if (e.contains("significance")) o.significance = get_number(e["significance"], "econometrics.significance");
        if (e.contains("window")) read_window(e["window"], "econometrics.window", o.window_start, o.window_end);
    }
    {
        const auto& o = cfg.econometrics;
        if (o.p_max < 1) bad("econometrics.p_max", "must be at least 1");
        if (o.adf_max_lag && *o.adf_max_lag < 0) bad("econometrics.adf_max_lag", "must be non-negative");
        if (o.lm_order < 1) bad("econometrics.lm_order", "must be at least 1");
        if (!(o.significance > 0.0 && o.significance < 1.0)) bad("econometrics.significance", "must lie in (0, 1)");
    }

    if (doc.contains("rank")) {
        const auto& r = doc["rank"];
        only_keys(r, "rank", {"year", "language", "stocks"});
        if (r.contains("year")) cfg.rank.year = get_int(r["year"], "rank.year");
        if (r.contains("language")) cfg.rank.language = get_string(r["language"], "rank.language");
        if (r.contains("stocks")) cfg.rank.stocks = get_string(r["stocks"], "rank.stocks");
    }
    if (doc.contains("language_names")) {
        if (!doc["language_names"].is_object()) bad("language_names", "expected an object");
        for (const auto& [code, name] : doc["language_names"].items()) {
            cfg.language_names[code] = get_string(name, "language_names." + code);
        }
    }

    cfg.cache_root = doc.contains("cache_root") ? get_path(doc["cache_root"], "cache_root", base_dir)
                                                : (base_dir / "cache").lexically_normal();
    cfg.output_dir = doc.contains("output_dir") ? get_path(doc["output_dir"], "output_dir", base_dir)
                                                : (base_dir / "output").lexically_normal();
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) bad("seed", "expected a non-negative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("workers")) cfg.workers = get_int(doc["workers"], "workers");
    if (cfg.workers < 1) bad("workers", "must be at least 1");
    if (doc.contains("user_agent")) cfg.user_agent = get_string(doc["user_agent"], "user_agent");

    if (doc.contains("fetch")) {
        const auto& f = doc["fetch"];
        only_keys(f, "fetch",
                  {"redirects", "max_concurrent", "min_request_spacing_ms", "max_retries", "backoff_base_ms",
                   "api_base", "wiki_api_template"});
        auto& p = cfg.fetch;
        if (f.contains("redirects")) {
            if (!f["redirects"].is_boolean()) bad("fetch.redirects", "expected a boolean");
            p.redirects = f["redirects"].get<bool>();
        }
        if (f.contains("max_concurrent")) p.max_concurrent = get_int(f["max_concurrent"], "fetch.max_concurrent");
        if (f.contains("min_request_spacing_ms")) {
            p.min_request_spacing = std::chrono::milliseconds(get_int(f["min_request_spacing_ms"], "fetch.min_request_spacing_ms"));
        }
        if (f.contains("max_retries")) p.max_retries = get_int(f["max_retries"], "fetch.max_retries");
        if (f.contains("backoff_base_ms")) {
            p.backoff_base = std::chrono::milliseconds(get_int(f["backoff_base_ms"], "fetch.backoff_base_ms"));
        }
        if (f.contains("api_base")) p.api_base = get_string(f["api_base"], "fetch.api_base");
        if (f.contains("wiki_api_template")) {
            p.wiki_api_template = get_string(f["wiki_api_template"], "fetch.wiki_api_template");
        }
        if (p.max_concurrent < 1) bad("fetch.max_concurrent", "must be at least 1");
        if (p.max_retries < 0) bad("fetch.max_retries", "must be non-negative");
        if (p.min_request_spacing.count() < 0 || p.backoff_base.count() < 0) bad("fetch", "durations must be non-negative");
    }
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = csv::read_text(path);
    } catch (const Error& e) {
        raise(ErrorCode::Configuration, "cannot read config '" + path.string() + "'");
    }
    auto base = std::filesystem::absolute(path).parent_path();
    return parse_config(text, base);
}

json PipelineConfig::to_json() const {
    json doc;
    doc["projects"] = projects;
    json arts = json::object();
    for (const auto& a : articles) arts[a.project].push_back({{"city", a.city}, {"title", a.title}});
    doc["articles"] = arts;
    json gt = json::array();
    for (const auto& g : ground_truth) {
        gt.push_back({{"name", g.name}, {"kind", ingest::to_string(g.kind)}, {"path", echo_path(g.path, base_dir)}});
    }
    doc["ground_truth"] = gt;
    doc["location_mapping"] = location_mapping ? json(echo_path(*location_mapping, base_dir)) : json(nullptr);
    doc["date_range"] = {{"start", ts::to_iso(start)}, {"end", ts::to_iso(end)}};
    doc["weekly_anchor"] = weekly_anchor ? json(ts::to_iso(*weekly_anchor)) : json(nullptr);
    doc["relchange_window"] = {
        {"start", relchange_window_start ? json(ts::to_iso(*relchange_window_start)) : json(nullptr)},
        {"days", relchange_window_days}};
    doc["breaks"] = {{"min_segment_frac", breaks.min_segment_frac},
                     {"max_breaks", breaks.max_breaks},
                     {"ci_level", breaks.ci_level},
                     {"window", window_json(breaks.window_start, breaks.window_end)},
                     {"report_year", breaks.report_year ? json(*breaks.report_year) : json(nullptr)}};
    doc["econometrics"] = {
        {"p_max", econometrics.p_max},
        {"adf_max_lag", econometrics.adf_max_lag ? json(*econometrics.adf_max_lag) : json(nullptr)},
        {"lm_order", econometrics.lm_order},
        {"significance", econometrics.significance},
        {"window", window_json(econometrics.window_start, econometrics.window_end)}};
    doc["rank"] = {{"year", rank.year ? json(*rank.year) : json(nullptr)},
                   {"language", rank.language ? json(*rank.language) : json(nullptr)},
                   {"stocks", rank.stocks ? json(*rank.stocks) : json(nullptr)}};
    doc["language_names"] = language_names;
    doc["cache_root"] = echo_path(cache_root, base_dir);
    doc["output_dir"] = echo_path(output_dir, base_dir);
    doc["seed"] = seed;
    doc["workers"] = workers;
    doc["user_agent"] = user_agent;
    doc["fetch"] = {{"redirects", fetch.redirects},
                    {"max_concurrent", fetch.max_concurrent},
                    {"min_request_spacing_ms", fetch.min_request_spacing.count()},
                    {"max_retries", fetch.max_retries},
                    {"backoff_base_ms", fetch.backoff_base.count()},
                    {"api_base", fetch.api_base},
                    {"wiki_api_template", fetch.wiki_api_template}};
    return doc;
}

}  // namespace wikimig::cli
