#include <sstream>

#include "../scenario.hpp"
#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "support.hpp"
#include "wikimig/csv.hpp"

using namespace testing;
using namespace wikimig;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args, ingest::HttpClient* http = nullptr) {
    args.insert(args.begin(), "wikimig");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), {out, err}, http);
    return {code, out.str(), err.str()};
}

std::string first_line(const fs::path& p) {
    const auto text = csv::read_text(p);
    return text.substr(0, text.find('\n'));
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = csv::read_text(e.path());
    }
    return files;
}

std::string minimal(const std::string& body) {
    return R"({"date_range": {"start": "2022-01-01", "end": "2022-03-01"})" + body + "}";
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = cli::parse_config(minimal(R"(, "cache_root": "c", "articles": {"uk.wikipedia.org": ["Львів"]})"),
                                       "/base");
    CHECK(cfg.cache_root == fs::path("/base/c"));
    CHECK(cfg.output_dir == fs::path("/base/output"));
    CHECK(cfg.seed == 42);
    REQUIRE(cfg.articles.size() == 1);
    CHECK(cfg.articles[0].city == "Львів");
    CHECK(cfg.projects == std::vector<std::string>{"uk.wikipedia.org"});
    CHECK(cfg.fetch.max_concurrent == 4);
    CHECK(cfg.fetch.min_request_spacing == std::chrono::milliseconds(250));
    CHECK(cfg.breaks.min_segment_frac == 0.15);
    CHECK(cfg.econometrics.significance == 0.05);
    CHECK(cfg.to_json()["cache_root"] == "c");
    CHECK(cfg.language_name("uk") == "uk");

    auto bad = [](const std::string& text) { return code_of([&] { cli::parse_config(text, "/"); }); };
    CHECK(bad("{") == ErrorCode::Configuration);
    CHECK(bad("{}") == ErrorCode::Configuration);
    CHECK(bad(minimal(R"(, "sead": 4)")) == ErrorCode::Configuration);
    CHECK(bad(minimal(R"(, "breaks": {"trim": 0.1})")) == ErrorCode::Configuration);
    CHECK(bad(minimal(R"(, "breaks": {"min_segment_frac": 0.9})")) == ErrorCode::Configuration);
    CHECK(bad(minimal(R"(, "projects": ["ukwiki"])")) == ErrorCode::Configuration);
    CHECK(bad(minimal(R"(, "workers": 0)")) == ErrorCode::Configuration);
    CHECK(bad(minimal(R"(, "ground_truth": [{"kind": "monthly", "path": "x"}])")) == ErrorCode::Configuration);
    CHECK(bad(R"({"date_range": {"start": "2022-03-01", "end": "2022-01-01"}})") == ErrorCode::Configuration);
    CHECK(bad(minimal(R"(, "projects": ["pl.wikipedia.org"], "articles": {"uk.wikipedia.org": ["x"]})")) ==
          ErrorCode::Configuration);
}

TEST_CASE("exit code 2 for configuration and usage errors") {
    const auto dir = temp_dir("cli-usage");
    CHECK(run_cli({"fetch"}).code == cli::kExitConfig);
    CHECK(run_cli({"explode", "--config", "x.json"}).code == cli::kExitConfig);
    CHECK(run_cli({"fetch", "--config", (dir / "absent.json").string()}).code == cli::kExitConfig);
    csv::write_file_atomic(dir / "bad.json", minimal(R"(, "colour": "blue")"));
    const auto r = run_cli({"report", "--config", (dir / "bad.json").string()});
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("colour") != std::string::npos);
    csv::write_file_atomic(dir / "ok.json", minimal(""));
    CHECK(run_cli({"report", "--config", (dir / "ok.json").string(), "--workers", "0"}).code == cli::kExitConfig);
    CHECK(run_cli({"rank", "--config", (dir / "ok.json").string()}).code == cli::kExitConfig);
    CHECK(run_cli({"granger", "--config", (dir / "ok.json").string()}).code == cli::kExitConfig);
    CHECK(run_cli({"--help"}).code == cli::kExitOk);
}

TEST_CASE("fetch: empty list, warm cache, one unfetchable title") {
    const auto dir = temp_dir("cli-fetch");
    csv::write_file_atomic(dir / "empty.json", minimal(""));
    fake::Wiki wiki;
    auto r = run_cli({"fetch", "--config", (dir / "empty.json").string()}, &wiki);
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out == "0 fetched, 0 cached, 0 failed\n");
    CHECK(wiki.calls() == 0);

    const auto ws = scenario::write(dir / "study");
    scenario::install(wiki);
    r = run_cli({"fetch", "--config", ws.config.string()}, &wiki);
    CHECK(r.code == cli::kExitOk);
    // two project totals, four articles, two extra mapping titles
    CHECK(r.out == "8 fetched, 0 cached, 0 failed\n");
    const auto calls = wiki.calls();
    r = run_cli({"fetch", "--config", ws.config.string(), "--workers", "3"}, &wiki);
    CHECK(r.out == "0 fetched, 8 cached, 0 failed\n");
    CHECK(wiki.calls() == calls);

    const auto broken = scenario::write(dir / "broken", R"(, "cache_root": "cache2")");
    wiki.missing.insert({"uk.wikipedia.org", "Катовіце"});
    r = run_cli({"fetch", "--config", broken.config.string()}, &wiki);
    CHECK(r.code == cli::kExitPartial);
    CHECK(r.out == "7 fetched, 0 cached, 1 failed\n");
    CHECK(r.err.find("Катовіце") != std::string::npos);
}

TEST_CASE("analysis commands write their tables") {
    const auto ws = scenario::write(temp_dir("cli-analysis") / "study");
    fake::Wiki wiki;
    scenario::install(wiki);
    REQUIRE(run_cli({"fetch", "--config", ws.config.string()}, &wiki).code == cli::kExitOk);
    const auto out = ws.dir / "output";

    // commands before fetch would fail; here every one succeeds
    auto r = run_cli({"relchange", "--config", ws.config.string()});
    CHECK(r.code == cli::kExitOk);
    CHECK(first_line(out / "relchange_peaks.csv") == "article,language,peak_rc_percent,peak_week");
    CHECK(first_line(out / "relchange" / "uk" / "Warszawa.csv") == "week_start,pwv,pwv_0_100,rc_percent,partial");
    const auto peaks = csv::parse(csv::read_text(out / "relchange_peaks.csv"));
    REQUIRE(peaks.size() == 5);
    for (std::size_t i = 1; i < peaks.size(); ++i) {
        const double peak = std::stod(peaks[i].fields[2]);
        if (peaks[i].fields[1] == "uk") CHECK(peak >= 150.0);  // views triple after the shift
        if (peaks[i].fields[1] == "pl") CHECK(std::fabs(peak) < 50.0);
    }

    r = run_cli({"breaks", "--config", ws.config.string(), "--language", "uk"});
    CHECK(r.code == cli::kExitOk);
    CHECK(first_line(out / "breaks_uk.csv") == "city,break_date,ci_lower,ci_upper");
    const auto brk = csv::parse(csv::read_text(out / "breaks_uk.csv"));
    bool near = false;
    for (std::size_t i = 1; i < brk.size(); ++i) {
        if (brk[i].fields[0] == "Warszawa" && brk[i].fields[1] != "none") {
            near = near || std::abs(ts::days_between(scenario::kInvasion, ts::parse_iso_day(brk[i].fields[1]))) <= 3;
        }
    }
    CHECK(near);
    CHECK(first_line(out / "breaks" / "uk" / "Warszawa.csv") == "n_breaks,rss,bic,selected");
    CHECK_FALSE(fs::exists(out / "breaks_pl.csv"));

    r = run_cli({"granger", "--config", ws.config.string()});
    CHECK(r.code == cli::kExitOk);
    CHECK(first_line(out / "granger_full.csv") == "city,relationship,optimal_lag,f_statistic,p_value");
    CHECK(first_line(out / "granger_significant.csv") == "city,relationship,optimal_lag,f_statistic,p_value");
    const auto full = csv::parse(csv::read_text(out / "granger_full.csv"));
    CHECK(full.size() == 1 + 2 * 4);
    bool labelled = false;
    for (const auto& row : full) {
        labelled = labelled || row.fields[1] == "border crossings PL -> Wikipedia views in Ukrainian";
    }
    CHECK(labelled);
    CHECK(csv::parse(first_line(out / "granger_diagnostics.csv"))[0].fields.size() == 19);

    r = run_cli({"rank", "--config", ws.config.string()});
    CHECK(r.code == cli::kExitOk);
    CHECK(first_line(out / "rank_2022_uk.csv") == "location,stock,share,stock_rank,share_rank");
    CHECK(first_line(out / "rank_summary_2022_uk.csv") == "year,language,n,rho,p_value,permutation_p");
    CHECK(csv::parse(csv::read_text(out / "rank_2022_uk.csv")).size() == 6);
    CHECK(r.out.find("Warszawa") != std::string::npos);

    // every CSV has a header row
    for (const auto& e : fs::recursive_directory_iterator(out)) {
        if (e.path().extension() == ".csv") CHECK(csv::read_text(e.path()).find('\n') != std::string::npos);
    }
}

TEST_CASE("report: determinism, completeness and empty sections") {
    const auto ws = scenario::write(temp_dir("cli-report") / "study");
    fake::Wiki wiki;
    scenario::install(wiki);
    REQUIRE(run_cli({"fetch", "--config", ws.config.string()}, &wiki).code == cli::kExitOk);

    auto r = run_cli({"report", "--config", ws.config.string()});
    CHECK(r.code == cli::kExitOk);
    const auto first = snapshot(ws.dir / "output" / "report");
    fs::remove_all(ws.dir / "output");
    r = run_cli({"report", "--config", ws.config.string()});
    CHECK(r.code == cli::kExitOk);
    CHECK(snapshot(ws.dir / "output" / "report") == first);

    // the worker count only shows up in the config echo
    fs::remove_all(ws.dir / "output");
    CHECK(run_cli({"report", "--config", ws.config.string(), "--workers", "4"}).code == cli::kExitOk);
    auto threaded = snapshot(ws.dir / "output" / "report");
    auto serial = first;
    threaded.erase("report.txt");
    serial.erase("report.txt");
    CHECK(threaded == serial);

    const auto summary = csv::parse(first.at("summary.csv"));
    REQUIRE(summary.size() == 5);
    CHECK(summary[1].fields[0] == "Katowice");
    CHECK(summary[3].fields[0] == "Warszawa");
    CHECK(summary[3].fields[1] == "pl");
    CHECK(summary[4].fields[1] == "uk");
    const auto& txt = first.at("report.txt");
    CHECK(txt.find(std::string("version: ") + cli::tool_version()) != std::string::npos);
    CHECK(txt.find("\"seed\": 42") != std::string::npos);
    CHECK(txt.find("fetched ") != std::string::npos);
    CHECK(txt.find("== Failures ==\nnone") != std::string::npos);

    const auto dir = temp_dir("cli-report-empty");
    csv::write_file_atomic(dir / "c.json", minimal(""));
    r = run_cli({"report", "--config", (dir / "c.json").string()});
    CHECK(r.code == cli::kExitOk);
    const auto empty = csv::read_text(dir / "output" / "report" / "report.txt");
    CHECK(empty.find("== Rank correlation ==\nno results") != std::string::npos);
    CHECK(empty.find("== Per-article summary ==\nno results") != std::string::npos);

    // uncached data is a partial failure, not a crash
    const auto cold = scenario::write(temp_dir("cli-report-cold") / "study");
    r = run_cli({"report", "--config", cold.config.string()});
    CHECK(r.code == cli::kExitPartial);
    CHECK(r.err.find("run fetch first") != std::string::npos);
}
