#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "wikimig/breaks.hpp"
#include "wikimig/csv.hpp"
#include "wikimig/error.hpp"
#include "wikimig/metrics.hpp"
#include "wikimig/rank.hpp"

#ifndef WIKIMIG_VERSION
#define WIKIMIG_VERSION "0.0.0"
#endif

namespace wikimig::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* tool_version() { return WIKIMIG_VERSION; }

namespace {

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

/// Runs fn(i) for i in [0, n) on up to `workers` threads. fn must not throw.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

std::string num(double v) { return csv::format_number(v); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string opt_day(const std::optional<ts::Day>& d) { return d ? ts::to_iso(*d) : "NA"; }

std::string file_stem(const std::string& name) { return ingest::sanitize_title(name); }

std::vector<ArticleSpec> selected_articles(const PipelineConfig& cfg, const Invocation& inv) {
    std::vector<ArticleSpec> out;
    for (const auto& a : cfg.articles) {
        if (inv.language && a.language() != *inv.language) continue;
        out.push_back(a);
    }
    std::sort(out.begin(), out.end(), [](const ArticleSpec& x, const ArticleSpec& y) {
        return std::tie(x.city, x.project, x.title) < std::tie(y.city, y.project, y.title);
    });
    return out;
}

std::string views_name(const PipelineConfig& cfg, const ArticleSpec& a) {
    return "Wikipedia views in " + cfg.language_name(a.language());
}

struct Snapshot {
    std::string label;
    ingest::CacheManifest manifest;
};

struct ViewData {
    ts::DailySeries article;
    ts::DailySeries totals;
    std::vector<Snapshot> snapshots;
};

ViewData load_views(const PipelineConfig& cfg, const ArticleKey& key) {
    key.validate();
    const ingest::SeriesCache cache(cfg.cache_root);
    auto art = cache.load_article(key);
    if (!art) raise(ErrorCode::NoData, key.label() + " is not cached; run fetch first");
    auto tot = cache.load_totals(key.project);
    if (!tot) raise(ErrorCode::NoData, "project totals for " + key.project + " are not cached; run fetch first");
    ViewData v;
    v.article = art->series.slice(cfg.start, cfg.end);
    v.totals = tot->series.slice(cfg.start, cfg.end);
    if (v.article.empty()) raise(ErrorCode::NoData, key.label() + " has no views inside date_range");
    v.snapshots.push_back({key.label(), art->manifest});
    v.snapshots.push_back({key.project + "/(project total)", tot->manifest});
    return v;
}

ts::DailySeries window(const ts::DailySeries& s, std::optional<ts::Day> from, std::optional<ts::Day> to) {
    if (s.empty()) return s;
    return s.slice(from.value_or(s.first_date()), to.value_or(s.last_date()));
}

ingest::GroundTruthTable load_table(const GroundTruthSpec& spec) {
    if (!fs::exists(spec.path)) {
        raise(ErrorCode::Configuration, "ground truth '" + spec.name + "' not found at " + spec.path.string());
    }
    try {
        return ingest::load_ground_truth(spec.path, spec.kind);
    } catch (const Error& e) {
        raise(ErrorCode::Configuration, "ground truth '" + spec.name + "': " + e.what());
    }
}

std::string describe(const std::exception& e) { return e.what(); }

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::string body = csv::join_row(header);
    for (const auto& r : rows) body += csv::join_row(r);
    csv::write_file_atomic(path, body);
}

// ---------------------------------------------------------------------------
// relative change
// ---------------------------------------------------------------------------

struct RelchangeOutcome {
    ArticleSpec article;
    std::vector<std::vector<std::string>> rows;  // week_start,pwv,pwv_0_100,rc_percent,partial
    std::optional<metrics::PeakChange> peak;
    std::optional<std::string> error;
    std::vector<Snapshot> snapshots;
};

ts::Day effective_anchor(ts::Day anchor, ts::Day first) {
    if (anchor <= first) return anchor;
    const long weeks = (ts::days_between(first, anchor) + 6) / 7;
    return anchor - std::chrono::days{7 * weeks};
}

RelchangeOutcome relchange_one(const PipelineConfig& cfg, const ArticleSpec& a) {
    RelchangeOutcome out{a, {}, std::nullopt, std::nullopt, {}};
    try {
        const auto data = load_views(cfg, a.key());
        out.snapshots = data.snapshots;
        std::optional<ts::Day> anchor;
        if (cfg.weekly_anchor) anchor = effective_anchor(*cfg.weekly_anchor, data.article.first_date());
        const auto weekly = metrics::proportion_of_views(data.article, data.totals, ts::Granularity::weekly(anchor),
                                                         a.key());
        std::vector<std::optional<double>> shares;
        for (const auto& p : weekly.points) shares.push_back(p.share);
        std::vector<std::optional<double>> scaled(shares.size());
        if (std::any_of(shares.begin(), shares.end(), [](const auto& s) { return s.has_value(); })) {
            scaled = metrics::rescale_0_100(shares);
        }
        const auto rc = metrics::relative_change(weekly);
        for (std::size_t i = 0; i < weekly.points.size(); ++i) {
            const auto& p = weekly.points[i];
            out.rows.push_back({ts::to_iso(p.period_start), opt_num(p.share), opt_num(scaled[i]),
                                opt_num(rc.points[i].percent), p.partial ? "1" : "0"});
        }
        ts::Day wstart = rc.points.front().week_start;
        int wdays = static_cast<int>(ts::days_between(wstart, rc.points.back().week_start)) + 7;
        if (cfg.relchange_window_start) {
            wstart = *cfg.relchange_window_start;
            wdays = cfg.relchange_window_days;
        }
        out.peak = metrics::max_relative_change(rc, wstart, wdays);
    } catch (const std::exception& e) {
        out.error = describe(e);
    }
    return out;
}

std::vector<RelchangeOutcome> run_relchange(const PipelineConfig& cfg, const std::vector<ArticleSpec>& arts) {
    std::vector<RelchangeOutcome> results(arts.size());
    parallel_for(arts.size(), cfg.workers, [&](std::size_t i) { results[i] = relchange_one(cfg, arts[i]); });
    return results;
}

void write_relchange(const fs::path& dir, const std::vector<RelchangeOutcome>& results, bool per_article) {
    std::vector<std::vector<std::string>> peaks;
    for (const auto& r : results) {
        if (per_article && !r.rows.empty()) {
            write_csv(dir / "relchange" / r.article.language() / (file_stem(r.article.city) + ".csv"),
                      {"week_start", "pwv", "pwv_0_100", "rc_percent", "partial"}, r.rows);
        }
        peaks.push_back({r.article.title, r.article.language(), r.peak ? num(r.peak->percent) : "NA",
                         r.peak ? ts::to_iso(r.peak->week_start) : "NA"});
    }
    write_csv(dir / "relchange_peaks.csv", {"article", "language", "peak_rc_percent", "peak_week"}, peaks);
}

// ---------------------------------------------------------------------------
// breaks
// ---------------------------------------------------------------------------

struct BreaksOutcome {
    ArticleSpec article;
    std::optional<breaks::BreakReport> report;
    std::optional<std::string> error;
    std::vector<Snapshot> snapshots;
};

BreaksOutcome breaks_one(const PipelineConfig& cfg, const ArticleSpec& a) {
    BreaksOutcome out{a, std::nullopt, std::nullopt, {}};
    try {
        const auto data = load_views(cfg, a.key());
        out.snapshots = data.snapshots;
        const auto art = window(data.article, cfg.breaks.window_start, cfg.breaks.window_end);
        const auto tot = window(data.totals, cfg.breaks.window_start, cfg.breaks.window_end);
        const auto daily = metrics::proportion_of_views(art, tot, ts::Granularity::daily(), a.key());
        breaks::BreakModel model;
        model.series_key = a.key().label();
        model.min_segment_frac = cfg.breaks.min_segment_frac;
        model.max_breaks = cfg.breaks.max_breaks;
        model.ci_level = cfg.breaks.ci_level;
        out.report = breaks::detect_breaks(daily, model);
    } catch (const std::exception& e) {
        out.error = describe(e);
    }
    return out;
}

std::vector<BreaksOutcome> run_breaks(const PipelineConfig& cfg, const std::vector<ArticleSpec>& arts) {
    std::vector<BreaksOutcome> results(arts.size());
    parallel_for(arts.size(), cfg.workers, [&](std::size_t i) { results[i] = breaks_one(cfg, arts[i]); });
    return results;
}

std::vector<breaks::BreakEstimate> reported_breaks(const PipelineConfig& cfg, const breaks::BreakReport& r) {
    std::vector<breaks::BreakEstimate> out;
    for (const auto& b : r.breaks) {
        if (cfg.breaks.report_year && (!b.date || ts::year_of(*b.date) != *cfg.breaks.report_year)) continue;
        out.push_back(b);
    }
    return out;
}

void write_breaks(const PipelineConfig& cfg, const fs::path& dir, const std::vector<BreaksOutcome>& results,
                  bool per_series) {
    std::map<std::string, std::vector<std::vector<std::string>>> by_language;
    std::set<std::string> languages;
    for (const auto& a : cfg.articles) languages.insert(a.language());
    for (const auto& r : results) {
        auto& rows = by_language[r.article.language()];
        if (!r.report) {
            rows.push_back({r.article.city, "error", "NA", "NA"});
            continue;
        }
        const auto kept = reported_breaks(cfg, *r.report);
        if (kept.empty()) rows.push_back({r.article.city, "none", "NA", "NA"});
        for (const auto& b : kept) rows.push_back({r.article.city, opt_day(b.date), opt_day(b.ci_lower), opt_day(b.ci_upper)});
        if (per_series) {
            std::vector<std::vector<std::string>> profile;
            for (std::size_t m = 0; m < r.report->rss_by_breaks.size(); ++m) {
                profile.push_back({std::to_string(m), num(r.report->rss_by_breaks[m]), num(r.report->bic_by_breaks[m]),
                                   static_cast<int>(m) == r.report->n_breaks_selected ? "1" : "0"});
            }
            write_csv(dir / "breaks" / r.article.language() / (file_stem(r.article.city) + ".csv"),
                      {"n_breaks", "rss", "bic", "selected"}, profile);
        }
    }
    for (const auto& [lang, rows] : by_language) {
        write_csv(dir / ("breaks_" + lang + ".csv"), {"city", "break_date", "ci_lower", "ci_upper"}, rows);
    }
}

// ---------------------------------------------------------------------------
// granger
// ---------------------------------------------------------------------------

struct GrangerOutcome {
    ArticleSpec article;
    std::string crossings;
    std::optional<econ::Rq2Record> record;
    std::optional<std::string> error;
    std::vector<Snapshot> snapshots;
};

struct CrossingsInput {
    std::string name;
    ts::DailySeries series;
};

std::vector<CrossingsInput> crossings_inputs(const PipelineConfig& cfg) {
    std::vector<CrossingsInput> out;
    for (const auto& g : cfg.ground_truth) {
        if (g.kind != ingest::GroundTruthKind::BorderCrossingsDaily) continue;
        out.push_back({g.name, load_table(g).crossings_series(g.name)});
    }
    return out;
}

std::vector<GrangerOutcome> run_granger(const PipelineConfig& cfg, const std::vector<ArticleSpec>& arts,
                                        const std::vector<CrossingsInput>& crossings) {
    std::vector<GrangerOutcome> results;
    for (const auto& a : arts) {
        for (const auto& c : crossings) results.push_back({a, c.name, std::nullopt, std::nullopt, {}});
    }
    parallel_for(results.size(), cfg.workers, [&](std::size_t i) {
        auto& r = results[i];
        const auto& c = crossings[i % crossings.size()];
        try {
            const auto data = load_views(cfg, r.article.key());
            r.snapshots = data.snapshots;
            const auto daily = metrics::proportion_of_views(data.article, data.totals, ts::Granularity::daily(),
                                                            r.article.key());
            const auto pair = ts::align(daily.present(), c.series);
            r.record = econ::run_rq2_pipeline(pair, views_name(cfg, r.article), c.name, cfg.econometrics);
        } catch (const std::exception& e) {
            r.error = describe(e);
        }
    });
    return results;
}

std::vector<std::string> granger_row(const std::string& city, const econ::GrangerResult& g) {
    return {city, g.cause + " -> " + g.effect, std::to_string(g.lag), num(g.f_stat), num(g.p_value)};
}

std::string adf_cell(const std::optional<econ::AdfResult>& a, int which) {
    if (!a) return "NA";
    if (which == 0) return num(a->statistic);
    if (which == 1) return num(a->p_value);
    return std::to_string(a->lag_used);
}

void write_granger(const PipelineConfig& cfg, const fs::path& dir, const std::vector<GrangerOutcome>& results) {
    const std::vector<std::string> header{"city", "relationship", "optimal_lag", "f_statistic", "p_value"};
    std::vector<std::vector<std::string>> full, significant, diag;
    for (const auto& r : results) {
        if (r.record) {
            for (const auto* g : {&r.record->crossings_to_views, &r.record->views_to_crossings}) {
                if (!*g) continue;
                full.push_back(granger_row(r.article.city, **g));
                if ((*g)->p_value < cfg.econometrics.significance) significant.push_back(full.back());
            }
        }
        std::vector<std::string> d{r.article.city, r.article.language(), r.crossings};
        if (r.record) {
            const auto& rec = *r.record;
            std::string notes;
            for (const auto& n : rec.diagnostics) notes += (notes.empty() ? "" : "; ") + n;
            d.insert(d.end(), {std::to_string(rec.n_aligned), adf_cell(rec.adf_views, 0), adf_cell(rec.adf_views, 1),
                               adf_cell(rec.adf_views, 2), adf_cell(rec.adf_crossings, 0),
                               adf_cell(rec.adf_crossings, 1), adf_cell(rec.adf_crossings, 2),
                               rec.halted ? "NA" : std::to_string(rec.selected_lag),
                               rec.lm ? num(rec.lm->statistic) : "NA", rec.lm ? std::to_string(rec.lm->df) : "NA",
                               rec.lm ? num(rec.lm->p_value) : "NA",
                               rec.stability ? num(rec.stability->max_modulus) : "NA",
                               rec.stability ? (rec.stability->stable ? "1" : "0") : "NA", rec.valid ? "1" : "0",
                               rec.halted ? "1" : "0", notes});
        } else {
            d.insert(d.end(), 15, "NA");
            d.push_back("error: " + r.error.value_or(""));
        }
        diag.push_back(std::move(d));
    }
    write_csv(dir / "granger_full.csv", header, full);
    write_csv(dir / "granger_significant.csv", header, significant);
    write_csv(dir / "granger_diagnostics.csv",
              {"city", "language", "crossings", "n_aligned", "adf_views_stat", "adf_views_p", "adf_views_lag",
               "adf_crossings_stat", "adf_crossings_p", "adf_crossings_lag", "selected_lag", "lm_stat", "lm_df",
               "lm_p", "max_modulus", "stable", "valid", "halted", "notes"},
              diag);
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

struct RankOutcome {
    int year = 0;
    std::string language;
    std::optional<rank::RankComparison> comparison;
    std::vector<std::string> failures;
    std::vector<Snapshot> snapshots;
};

const GroundTruthSpec* stocks_spec(const PipelineConfig& cfg) {
    for (const auto& g : cfg.ground_truth) {
        if (g.kind != ingest::GroundTruthKind::StocksYearly) continue;
        if (!cfg.rank.stocks || *cfg.rank.stocks == g.name) return &g;
    }
    return nullptr;
}

RankOutcome run_rank(const PipelineConfig& cfg, int year, const std::string& language) {
    const auto* spec = stocks_spec(cfg);
    if (!spec) raise(ErrorCode::Configuration, "rank needs a stocks_yearly ground-truth entry");
    if (!cfg.location_mapping) raise(ErrorCode::Configuration, "rank needs location_mapping");
    if (!fs::exists(*cfg.location_mapping)) {
        raise(ErrorCode::Configuration, "location mapping not found at " + cfg.location_mapping->string());
    }
    const auto stocks = load_table(*spec);
    std::vector<rank::LocationMapping> mapping;
    try {
        mapping = rank::load_location_mapping(*cfg.location_mapping);
    } catch (const Error& e) {
        raise(ErrorCode::Configuration, std::string("location mapping: ") + e.what());
    }

    RankOutcome out;
    out.year = year;
    out.language = language;
    std::vector<rank::LocationMapping> rows;
    for (const auto& m : mapping) {
        if (language_of_project(m.project) == language) rows.push_back(m);
    }
    std::vector<std::optional<double>> shares(rows.size());
    std::vector<std::optional<std::string>> errors(rows.size());
    std::vector<std::vector<Snapshot>> snaps(rows.size());
    parallel_for(rows.size(), cfg.workers, [&](std::size_t i) {
        try {
            const auto data = load_views(cfg, {rows[i].project, rows[i].article_title});
            snaps[i] = data.snapshots;
            const auto yearly = metrics::proportion_of_views(data.article, data.totals, ts::Granularity::yearly());
            shares[i] = yearly.share_at(ts::make_day(year, 1, 1));
            if (!shares[i]) errors[i] = "no share for " + std::to_string(year);
        } catch (const std::exception& e) {
            errors[i] = describe(e);
        }
    });
    std::map<std::string, double> by_region;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (auto& s : snaps[i]) out.snapshots.push_back(std::move(s));
        if (errors[i]) {
            out.failures.push_back(rows[i].stock_region + ": " + *errors[i]);
        } else {
            by_region[rows[i].stock_region] = *shares[i];
        }
    }
    try {
        out.comparison = rank::build_rank_comparison(stocks, by_region, year, language, cfg.seed);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientData && e.code() != ErrorCode::Degenerate) throw;
        out.failures.push_back(e.what());
    }
    return out;
}

std::string rank_suffix(const RankOutcome& r) { return std::to_string(r.year) + "_" + r.language; }

void write_rank(const fs::path& dir, const RankOutcome& r) {
    std::vector<std::vector<std::string>> rows;
    if (r.comparison) {
        for (const auto& e : r.comparison->entries) {
            rows.push_back({e.location, std::to_string(e.stock), num(e.share), num(e.stock_rank), num(e.share_rank)});
        }
    }
    write_csv(dir / ("rank_" + rank_suffix(r) + ".csv"), {"location", "stock", "share", "stock_rank", "share_rank"},
              rows);
    std::vector<std::vector<std::string>> summary;
    if (r.comparison) {
        const auto& c = *r.comparison;
        summary.push_back({std::to_string(c.year), c.language, std::to_string(c.entries.size()), num(c.rho),
                           num(c.p_value), opt_num(c.permutation_p)});
    }
    write_csv(dir / ("rank_summary_" + rank_suffix(r) + ".csv"),
              {"year", "language", "n", "rho", "p_value", "permutation_p"}, summary);
}

std::string rank_table(const RankOutcome& r) {
    std::ostringstream os;
    if (!r.comparison) {
        os << "no results for " << r.year << " / " << r.language << "\n";
        return os.str();
    }
    const auto& c = *r.comparison;
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %12s %14s %10s %10s\n", "location", "stock", "share", "stock_rank",
                  "share_rank");
    os << line;
    for (const auto& e : c.entries) {
        std::snprintf(line, sizeof line, "%-24s %12lld %14.8f %10.1f %10.1f\n", e.location.c_str(),
                      static_cast<long long>(e.stock), e.share, e.stock_rank, e.share_rank);
        os << line;
    }
    os << "spearman rho = " << fixed(c.rho, 4) << ", p = " << fixed(c.p_value, 6);
    if (c.permutation_p) os << ", permutation p = " << fixed(*c.permutation_p, 6);
    os << ", n = " << c.entries.size() << "\n";
    return os.str();
}

int resolve_year(const PipelineConfig& cfg, const Invocation& inv) {
    if (inv.year) return *inv.year;
    if (cfg.rank.year) return *cfg.rank.year;
    raise(ErrorCode::Configuration, "rank needs --year or rank.year");
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

void add_snapshots(std::map<std::string, ingest::CacheManifest>& all, const std::vector<Snapshot>& snaps) {
    for (const auto& s : snaps) all.emplace(s.label, s.manifest);
}

std::string pad(const std::string& s, std::size_t width) {
    // width counts bytes; non-ASCII names just shift the columns a little
    return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

}  // namespace

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

int cmd_fetch(const PipelineConfig& cfg, const Invocation& inv, Console io, ingest::HttpClient* http) {
    struct Task {
        std::optional<ArticleKey> article;
        std::string project;
    };
    std::vector<Task> tasks;
    std::set<ArticleKey> keys;
    for (const auto& a : selected_articles(cfg, inv)) keys.insert(a.key());
    if (cfg.location_mapping && fs::exists(*cfg.location_mapping)) {
        try {
            for (const auto& m : rank::load_location_mapping(*cfg.location_mapping)) {
                if (inv.language && language_of_project(m.project) != *inv.language) continue;
                keys.insert({m.project, m.article_title});
            }
        } catch (const Error& e) {
            raise(ErrorCode::Configuration, std::string("location mapping: ") + e.what());
        }
    }
    std::set<std::string> projects;
    for (const auto& k : keys) projects.insert(k.project);
    for (const auto& p : projects) tasks.push_back({std::nullopt, p});
    for (const auto& k : keys) tasks.push_back({k, k.project});

    if (tasks.empty()) {
        io.out << "0 fetched, 0 cached, 0 failed\n";
        return kExitOk;
    }

    std::optional<ingest::HttplibClient> owned;
    if (!http) http = &owned.emplace();
    ingest::PageviewFetcher fetcher(*http, ingest::SeriesCache(cfg.cache_root), cfg.fetch, cfg.user_agent);

    std::vector<int> status(tasks.size(), 0);  // 0 fetched, 1 cached, 2 failed
    std::vector<std::string> messages(tasks.size());
    parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
        const auto& t = tasks[i];
        try {
            const auto r = t.article ? fetcher.fetch_article_views(*t.article, cfg.start, cfg.end)
                                     : fetcher.fetch_project_totals(t.project, cfg.start, cfg.end);
            status[i] = r.from_cache ? 1 : 0;
        } catch (const std::exception& e) {
            status[i] = 2;
            messages[i] = (t.article ? t.article->label() : t.project + " totals") + ": " + e.what();
        }
    });
    int counts[3] = {0, 0, 0};
    for (int s : status) ++counts[s];
    io.out << counts[0] << " fetched, " << counts[1] << " cached, " << counts[2] << " failed\n";
    for (const auto& m : messages) {
        if (!m.empty()) io.err << "fetch failed: " << m << "\n";
    }
    return counts[2] > 0 ? kExitPartial : kExitOk;
}

int cmd_rank(const PipelineConfig& cfg, const Invocation& inv, Console io) {
    const int year = resolve_year(cfg, inv);
    const auto language = inv.language ? inv.language : cfg.rank.language;
    if (!language) raise(ErrorCode::Configuration, "rank needs --language or rank.language");
    const auto r = run_rank(cfg, year, *language);
    write_rank(cfg.output_dir, r);
    io.out << rank_table(r);
    for (const auto& f : r.failures) io.err << "rank: " << f << "\n";
    return r.failures.empty() && r.comparison ? kExitOk : kExitPartial;
}

int cmd_relchange(const PipelineConfig& cfg, const Invocation& inv, Console io) {
    const auto results = run_relchange(cfg, selected_articles(cfg, inv));
    write_relchange(cfg.output_dir, results, true);
    int failures = 0;
    for (const auto& r : results) {
        if (r.error) {
            ++failures;
            io.err << "relchange " << r.article.key().label() << ": " << *r.error << "\n";
        } else {
            io.out << r.article.city << " (" << r.article.language() << "): peak "
                   << (r.peak ? fixed(r.peak->percent, 2) + "% in week " + ts::to_iso(r.peak->week_start) : "NA")
                   << "\n";
        }
    }
    return failures ? kExitPartial : kExitOk;
}

int cmd_breaks(const PipelineConfig& cfg, const Invocation& inv, Console io) {
    const auto results = run_breaks(cfg, selected_articles(cfg, inv));
    write_breaks(cfg, cfg.output_dir, results, true);
    int failures = 0;
    for (const auto& r : results) {
        if (r.error) {
            ++failures;
            io.err << "breaks " << r.article.key().label() << ": " << *r.error << "\n";
            continue;
        }
        io.out << r.article.city << " (" << r.article.language() << "): " << r.report->n_breaks_selected
               << " break(s)";
        for (const auto& b : r.report->breaks) io.out << " " << opt_day(b.date);
        io.out << "\n";
    }
    return failures ? kExitPartial : kExitOk;
}

int cmd_granger(const PipelineConfig& cfg, const Invocation& inv, Console io) {
    const auto crossings = crossings_inputs(cfg);
    if (crossings.empty()) raise(ErrorCode::Configuration, "granger needs a border_crossings_daily ground-truth entry");
    const auto results = run_granger(cfg, selected_articles(cfg, inv), crossings);
    write_granger(cfg, cfg.output_dir, results);
    int failures = 0;
    for (const auto& r : results) {
        if (r.error) {
            ++failures;
            io.err << "granger " << r.article.key().label() << " x " << r.crossings << ": " << *r.error << "\n";
            continue;
        }
        const auto& rec = *r.record;
        io.out << r.article.city << " (" << r.article.language() << ") x " << r.crossings << ": ";
        if (rec.halted) {
            io.out << "halted\n";
            continue;
        }
        io.out << "lag " << rec.selected_lag << ", F(crossings->views) = " << fixed(rec.crossings_to_views->f_stat, 2)
               << " p = " << fixed(rec.crossings_to_views->p_value, 4)
               << ", F(views->crossings) = " << fixed(rec.views_to_crossings->f_stat, 2)
               << " p = " << fixed(rec.views_to_crossings->p_value, 4) << (rec.valid ? "" : " [diagnostics failed]")
               << "\n";
    }
    return failures ? kExitPartial : kExitOk;
}

int cmd_report(const PipelineConfig& cfg, const Invocation& inv, Console io) {
    const fs::path dir = cfg.output_dir / "report";
    const auto arts = selected_articles(cfg, inv);
    std::vector<std::string> failures;
    std::map<std::string, ingest::CacheManifest> snapshots;

    // rank: one comparison per configured language when stocks, mapping and a year are available
    std::vector<RankOutcome> ranks;
    const std::optional<int> year = inv.year ? inv.year : cfg.rank.year;
    if (year && stocks_spec(cfg) && cfg.location_mapping) {
        std::set<std::string> languages;
        if (inv.language) {
            languages.insert(*inv.language);
        } else if (cfg.rank.language) {
            languages.insert(*cfg.rank.language);
        } else {
            for (const auto& p : cfg.projects) languages.insert(language_of_project(p));
        }
        for (const auto& lang : languages) {
            ranks.push_back(run_rank(cfg, *year, lang));
            for (const auto& f : ranks.back().failures) failures.push_back("rank " + lang + ": " + f);
            add_snapshots(snapshots, ranks.back().snapshots);
        }
    }

    const auto rel = run_relchange(cfg, arts);
    const auto brk = run_breaks(cfg, arts);
    const auto crossings = crossings_inputs(cfg);
    const auto gr = crossings.empty() ? std::vector<GrangerOutcome>{} : run_granger(cfg, arts, crossings);
    for (const auto& r : rel) {
        add_snapshots(snapshots, r.snapshots);
        if (r.error) failures.push_back("relchange " + r.article.key().label() + ": " + *r.error);
    }
    for (const auto& r : brk) {
        add_snapshots(snapshots, r.snapshots);
        if (r.error) failures.push_back("breaks " + r.article.key().label() + ": " + *r.error);
    }
    for (const auto& r : gr) {
        add_snapshots(snapshots, r.snapshots);
        if (r.error) failures.push_back("granger " + r.article.key().label() + " x " + r.crossings + ": " + *r.error);
    }

    // CSV bundle
    for (const auto& r : ranks) write_rank(dir, r);
    write_relchange(dir, rel, false);
    write_breaks(cfg, dir, brk, false);
    write_granger(cfg, dir, gr);

    std::vector<std::vector<std::string>> summary;
    std::ostringstream txt;
    txt << "wikimig report\n";
    txt << "version: " << tool_version() << "\n";
    txt << "selection: " << (inv.language ? "language " + *inv.language : "all languages") << "\n\n";

    txt << "== Configuration ==\n" << cfg.to_json().dump(2) << "\n\n";

    txt << "== Data snapshots ==\n";
    if (snapshots.empty()) txt << "no results\n";
    for (const auto& [label, m] : snapshots) {
        txt << label << ": " << ts::to_iso(m.start) << ".." << ts::to_iso(m.end) << ", fetched " << m.fetched_at
            << (m.redirects ? ", redirects included" : "") << "\n";
    }
    txt << "\n== Rank correlation ==\n";
    if (ranks.empty()) txt << "no results\n";
    for (const auto& r : ranks) txt << "year " << r.year << ", language " << r.language << "\n" << rank_table(r);

    txt << "\n== Relative change peaks ==\n";
    bool any_peak = false;
    for (const auto& r : rel) {
        if (!r.peak) continue;
        any_peak = true;
        txt << pad(r.article.city, 20) << pad(r.article.language(), 6) << fixed(r.peak->percent, 2) << "% (week of "
            << ts::to_iso(r.peak->week_start) << ")\n";
    }
    if (!any_peak) txt << "no results\n";

    txt << "\n== Structural breaks ==\n";
    bool any_break = false;
    for (const auto& r : brk) {
        if (!r.report) continue;
        for (const auto& b : reported_breaks(cfg, *r.report)) {
            any_break = true;
            txt << pad(r.article.city, 20) << pad(r.article.language(), 6) << opt_day(b.date) << " [" << opt_day(b.ci_lower)
                << ", " << opt_day(b.ci_upper) << "]\n";
        }
    }
    if (!any_break) txt << "no results\n";

    txt << "\n== Granger causality (p < " << num(cfg.econometrics.significance) << ") ==\n";
    bool any_granger = false;
    for (const auto& r : gr) {
        if (!r.record) continue;
        for (const auto* g : {&r.record->crossings_to_views, &r.record->views_to_crossings}) {
            if (!*g || (*g)->p_value >= cfg.econometrics.significance) continue;
            any_granger = true;
            txt << pad(r.article.city, 20) << (*g)->cause << " -> " << (*g)->effect << ": lag " << (*g)->lag << ", F = "
                << fixed((*g)->f_stat, 2) << " (p = " << fixed((*g)->p_value, 4) << ")"
                << (r.record->valid ? "" : " [diagnostics failed]") << "\n";
        }
    }
    if (!any_granger) txt << "no results\n";

    txt << "\n== Per-article summary ==\n";
    if (arts.empty()) txt << "no results\n";
    for (std::size_t i = 0; i < arts.size(); ++i) {
        const auto& a = arts[i];
        std::string peak = rel[i].peak ? num(rel[i].peak->percent) : "NA";
        std::string break_dates;
        if (brk[i].report) {
            for (const auto& b : reported_breaks(cfg, *brk[i].report)) {
                break_dates += (break_dates.empty() ? "" : " ") + opt_day(b.date);
            }
            if (break_dates.empty()) break_dates = "none";
        } else {
            break_dates = "NA";
        }
        std::string lag = "NA", f = "NA", p = "NA";
        for (const auto& g : gr) {
            // first crossings series in config order is the headline pairing
            if (g.article.key() != a.key() || !g.record || !g.record->crossings_to_views) continue;
            lag = std::to_string(g.record->selected_lag);
            f = num(g.record->crossings_to_views->f_stat);
            p = num(g.record->crossings_to_views->p_value);
            break;
        }
        const bool ok = !rel[i].error && !brk[i].error;
        summary.push_back({a.city, a.language(), a.title, peak, break_dates, lag, f, p, ok ? "ok" : "partial"});
        txt << pad(a.city, 20) << pad(a.language(), 6) << "peak_rc=" << peak << " breaks=" << break_dates
            << " granger_lag=" << lag << " F=" << f << " p=" << p << (ok ? "" : " (partial)") << "\n";
    }
    write_csv(dir / "summary.csv",
              {"city", "language", "title", "peak_rc_percent", "break_dates", "granger_lag", "granger_f_crossings_to_views",
               "granger_p_crossings_to_views", "status"},
              summary);

    txt << "\n== Failures ==\n";
    if (failures.empty()) txt << "none\n";
    for (const auto& f : failures) txt << f << "\n";

    csv::write_file_atomic(dir / "report.txt", txt.str());
    io.out << "report written to " << (dir / "report.txt").string() << "\n";
    for (const auto& f : failures) io.err << f << "\n";
    return failures.empty() ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// entry points
// ---------------------------------------------------------------------------

int run(const Invocation& inv, Console io, ingest::HttpClient* http) {
    try {
        auto cfg = load_config(inv.config_path);
        if (inv.seed) cfg.seed = *inv.seed;
        if (inv.workers) {
            if (*inv.workers < 1) raise(ErrorCode::Configuration, "--workers must be at least 1");
            cfg.workers = *inv.workers;
        }
        cfg.cache_root = ingest::SeriesCache::resolve_root(cfg.cache_root);

        if (inv.command == "fetch") return cmd_fetch(cfg, inv, io, http);
        if (inv.command == "rank") return cmd_rank(cfg, inv, io);
        if (inv.command == "relchange") return cmd_relchange(cfg, inv, io);
        if (inv.command == "breaks") return cmd_breaks(cfg, inv, io);
        if (inv.command == "granger") return cmd_granger(cfg, inv, io);
        if (inv.command == "report") return cmd_report(cfg, inv, io);
        raise(ErrorCode::Configuration, "unknown command '" + inv.command + "'");
    } catch (const Error& e) {
        io.err << e.what() << "\n";
        return e.code() == ErrorCode::Configuration ? kExitConfig : kExitPartial;
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return kExitPartial;
    }
}

int main_entry(int argc, char** argv, Console io, ingest::HttpClient* http) {
    CLI::App app{"Wikipedia pageview migration analysis toolkit", "wikimig"};
    app.set_version_flag("--version", std::string(tool_version()));
    Invocation inv;
    std::string config;
    app.add_option("command", inv.command, "fetch, rank, relchange, breaks, granger or report")
        ->required()
        ->check(CLI::IsMember({"fetch", "rank", "relchange", "breaks", "granger", "report"}));
    app.add_option("--config", config, "pipeline configuration (JSON)")->required();
    int year = 0, workers = 0;
    std::string language;
    std::uint64_t seed = 0;
    auto* year_opt = app.add_option("--year", year, "analysis year for rank");
    auto* lang_opt = app.add_option("--language", language, "language code, e.g. uk");
    auto* seed_opt = app.add_option("--seed", seed, "seed for randomized procedures");
    auto* workers_opt = app.add_option("--workers", workers, "number of worker threads");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, io.out, io.err);
        return rc == 0 ? kExitOk : kExitConfig;
    }
    inv.config_path = config;
    if (*year_opt) inv.year = year;
    if (*lang_opt) inv.language = language;
    if (*seed_opt) inv.seed = seed;
    if (*workers_opt) inv.workers = workers;
    return run(inv, io, http);
}

}  // namespace wikimig::cli
