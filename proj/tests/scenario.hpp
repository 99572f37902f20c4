#pragma once

// A small synthetic study: a few cities in two language editions, a level shift
// on 2022-02-24, border crossings that lead the Ukrainian views by three days.

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "fake_wiki.hpp"
#include "wikimig/csv.hpp"

namespace scenario {

namespace fs = std::filesystem;
namespace ts = wikimig::ts;

inline const ts::Day kInvasion = ts::make_day(2022, 2, 24);

/// Deterministic noise in [-0.5, 0.5) from (key, day).
inline double jitter(const std::string& key, ts::Day d) {
    std::uint64_t x = std::hash<std::string>{}(key) ^ (static_cast<std::uint64_t>(d.time_since_epoch().count()) * 0x9E3779B97F4A7C15ull);
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdull;
    x ^= x >> 33;
    return static_cast<double>(x % 1000000) / 1e6 - 0.5;
}

inline double crossings_on(ts::Day d) {
    const int k = static_cast<int>(ts::days_between(kInvasion, d));
    double base = 20000 + 4000 * jitter("crossings", d);
    if (k >= 0) base += 80000 * std::exp(-k / 30.0);
    return std::round(base);
}

inline double views_on(const std::string& project, const std::string& title, ts::Day d) {
    const double level = 200 + static_cast<double>(std::hash<std::string>{}(title) % 300);
    double v = level * (1 + 0.3 * jitter(project + title, d));
    if (project == "uk.wikipedia.org" && d >= kInvasion) {
        v *= 3.0;
        v += 0.01 * crossings_on(d - std::chrono::days{3});
    }
    return std::round(v);
}

struct Workspace {
    fs::path dir;
    fs::path config;
};

/// Writes config, ground truth and mapping files into `dir` (emptied first).
inline Workspace write(const fs::path& dir, const std::string& extra_config = "") {
    fs::remove_all(dir);
    fs::create_directories(dir / "data");

    std::string crossings = "date,count\n";
    for (auto d = ts::make_day(2021, 12, 1); d <= ts::make_day(2022, 9, 30); d += std::chrono::days{1}) {
        crossings += ts::to_iso(d) + "," + std::to_string(static_cast<long long>(crossings_on(d))) + "\n";
    }
    wikimig::csv::write_file_atomic(dir / "data" / "crossings_pl.csv", crossings);
    wikimig::csv::write_file_atomic(dir / "data" / "stocks_pl.csv",
                                    "region,year,count\nWarszawa,2022,90000\nKrakow,2022,60000\nKatowice,2022,30000\n"
                                    "Wroclaw,2022,45000\nGdansk,2022,20000\n");
    wikimig::csv::write_file_atomic(dir / "data" / "mapping.csv",
                                    "stock_region,article_title,project\nWarszawa,Варшава,uk.wikipedia.org\n"
                                    "Krakow,Краків,uk.wikipedia.org\nKatowice,Катовіце,uk.wikipedia.org\n"
                                    "Wroclaw,Вроцлав,uk.wikipedia.org\nGdansk,Гданськ,uk.wikipedia.org\n");

    std::string cfg = R"json({
  "projects": ["uk.wikipedia.org", "pl.wikipedia.org"],
  "articles": {
    "uk.wikipedia.org": [{"city": "Warszawa", "title": "Варшава"}, {"city": "Katowice", "title": "Катовіце"},
                         {"city": "Krakow", "title": "Краків"}],
    "pl.wikipedia.org": [{"city": "Warszawa", "title": "Warszawa"}]
  },
  "ground_truth": [
    {"name": "border crossings PL", "kind": "border_crossings_daily", "path": "data/crossings_pl.csv"},
    {"name": "stocks", "kind": "stocks_yearly", "path": "data/stocks_pl.csv"}
  ],
  "location_mapping": "data/mapping.csv",
  "date_range": {"start": "2021-01-01", "end": "2022-09-30"},
  "weekly_anchor": "2022-02-24",
  "relchange_window": {"start": "2022-02-24", "days": 28},
  "breaks": {"max_breaks": 3, "window": {"start": "2022-01-01", "end": "2022-06-30"}},
  "econometrics": {"p_max": 10, "window": {"start": "2022-01-01", "end": "2022-09-30"}},
  "rank": {"year": 2022, "language": "uk"},
  "language_names": {"uk": "Ukrainian", "pl": "Polish"},
  "user_agent": "wikimig-tests/0.1 (test@example.org)",
  "fetch": {"min_request_spacing_ms": 0, "backoff_base_ms": 1, "api_base": "https://wikimedia.example/api/rest_v1"})json";
    cfg += extra_config;
    cfg += "\n}\n";
    wikimig::csv::write_file_atomic(dir / "config.json", cfg);
    return {dir, dir / "config.json"};
}

inline void install(fake::Wiki& wiki) {
    wiki.views = views_on;
    wiki.redirects["uk.wikipedia.org"]["Варшава"] = {"Варшава (місто)"};
}

}  // namespace scenario
