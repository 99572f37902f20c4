#include "wikimig/ingest.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <map>
#include <json.hpp>
#include <set>
#include <thread>

#include "wikimig/csv.hpp"
#include "wikimig/error.hpp"

namespace wikimig::ingest {

using json = nlohmann::json;

namespace {

bool unreserved(unsigned char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
           c == '.' || c == '~';
}

std::string percent_encode(const std::string& text, bool keep_unreserved) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : text) {
        if (keep_unreserved && unreserved(c)) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(kHex[c >> 4]);
            out.push_back(kHex[c & 0xF]);
        }
    }
    return out;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

}  // namespace

std::string encode_title(const std::string& title) {
    std::string t = title;
    std::replace(t.begin(), t.end(), ' ', '_');
    return percent_encode(t, true);
}

std::string url_encode_query(const std::string& value) { return percent_encode(value, true); }

std::string per_article_url(const FetchPolicy& policy, const ArticleKey& key, ts::Day start, ts::Day end) {
    return policy.api_base + "/metrics/pageviews/per-article/" + key.project + "/" + FetchPolicy::access + "/" +
           FetchPolicy::agent + "/" + encode_title(key.title) + "/" + FetchPolicy::granularity + "/" +
           ts::to_compact(start) + "00/" + ts::to_compact(end) + "00";
}

std::string aggregate_url(const FetchPolicy& policy, const std::string& project, ts::Day start, ts::Day end) {
    return policy.api_base + "/metrics/pageviews/aggregate/" + project + "/" + FetchPolicy::access + "/" +
           FetchPolicy::agent + "/" + FetchPolicy::granularity + "/" + ts::to_compact(start) + "00/" +
           ts::to_compact(end) + "00";
}

std::string redirects_url(const FetchPolicy& policy, const ArticleKey& key, const std::string& continuation) {
    std::string url = replace_all(policy.wiki_api_template, "{project}", key.project);
    url += "?action=query&format=json&formatversion=2&prop=redirects&rdlimit=max&rdnamespace=0&titles=" +
           url_encode_query(key.title);
    if (!continuation.empty()) url += "&rdcontinue=" + url_encode_query(continuation);
    return url;
}

ts::DailySeries parse_pageviews(const std::string& body, const std::string& label) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        raise(ErrorCode::Protocol, "pageviews payload is not JSON: " + std::string(e.what()));
    }
    if (!doc.is_object() || !doc.contains("items") || !doc["items"].is_array()) {
        raise(ErrorCode::Protocol, "pageviews payload has no items array");
    }
    std::map<ts::Day, double> by_day;
    for (const auto& item : doc["items"]) {
        if (!item.is_object() || !item.contains("timestamp") || !item["timestamp"].is_string() ||
            !item.contains("views") || !item["views"].is_number()) {
            raise(ErrorCode::Protocol, "pageviews item lacks timestamp or views");
        }
        ts::Day day;
        try {
            day = ts::parse_compact_day(item["timestamp"].get<std::string>());
        } catch (const Error&) {
            raise(ErrorCode::Protocol, "bad pageviews timestamp '" + item["timestamp"].get<std::string>() + "'");
        }
        const double views = item["views"].get<double>();
        if (views < 0) raise(ErrorCode::Protocol, "negative view count");
        by_day[day] += views;
    }
    std::vector<ts::Point> points;
    for (const auto& [day, views] : by_day) points.push_back({day, views});
    return ts::DailySeries(label, std::move(points));
}

ts::DailySeries sum_series(const std::vector<ts::DailySeries>& parts, const std::string& label) {
    std::map<ts::Day, double> by_day;
    for (const auto& s : parts) {
        for (const auto& p : s.points()) by_day[p.date] += p.value;
    }
    std::vector<ts::Point> points;
    for (const auto& [day, views] : by_day) points.push_back({day, views});
    return ts::DailySeries(label, std::move(points));
}

std::string utc_timestamp_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// RequestThrottle
// ---------------------------------------------------------------------------

RequestThrottle::RequestThrottle(int max_concurrent, std::chrono::milliseconds min_spacing)
    : max_concurrent_(max_concurrent), min_spacing_(min_spacing) {
    if (max_concurrent_ < 1) raise(ErrorCode::Configuration, "max_concurrent must be positive");
    if (min_spacing_.count() < 0) raise(ErrorCode::Configuration, "min_request_spacing must be non-negative");
}

RequestThrottle::Slot RequestThrottle::acquire() {
    {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return in_flight_ < max_concurrent_; });
        ++in_flight_;
    }
    {
        // held while sleeping so request starts are serialized
        std::lock_guard lock(spacing_mutex_);
        const auto now = std::chrono::steady_clock::now();
        if (last_start_ && now < *last_start_ + min_spacing_) {
            std::this_thread::sleep_until(*last_start_ + min_spacing_);
        }
        last_start_ = std::chrono::steady_clock::now();
    }
    return Slot(*this);
}

void RequestThrottle::release() {
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
    }
    cv_.notify_one();
}

// ---------------------------------------------------------------------------
// SeriesCache
// ---------------------------------------------------------------------------

std::string sanitize_title(const std::string& title) {
    std::string safe = encode_title(title);
    if (safe.size() > 180) {
        char suffix[20];
        std::snprintf(suffix, sizeof suffix, "~%016llx", static_cast<unsigned long long>(fnv1a(title)));
        safe = safe.substr(0, 160) + suffix;
    }
    return safe;
}

SeriesCache::SeriesCache(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path SeriesCache::resolve_root(const std::filesystem::path& fallback) {
    if (const char* env = std::getenv("WIKIMIG_CACHE_DIR"); env && *env) return env;
    return fallback;
}

std::filesystem::path SeriesCache::series_path(const std::string& project, const std::string& title) const {
    return root_ / sanitize_title(project) / (sanitize_title(title) + ".csv");
}

std::filesystem::path SeriesCache::totals_path(const std::string& project) const {
    // '@' is always percent-encoded in article names, so this cannot collide
    return root_ / sanitize_title(project) / "@project-total.csv";
}

std::optional<CachedSeries> SeriesCache::load(const std::filesystem::path& csv_path, const std::string& label) const {
    auto manifest_path = csv_path;
    manifest_path.replace_extension(".json");
    if (!std::filesystem::exists(csv_path) || !std::filesystem::exists(manifest_path)) return std::nullopt;

    CachedSeries out;
    try {
        const json m = json::parse(csv::read_text(manifest_path));
        out.manifest.start = ts::parse_iso_day(m.at("start").get<std::string>());
        out.manifest.end = ts::parse_iso_day(m.at("end").get<std::string>());
        out.manifest.redirects = m.at("redirects").get<bool>();
        out.manifest.titles = m.at("titles").get<std::vector<std::string>>();
        out.manifest.fetched_at = m.at("fetched_at").get<std::string>();
    } catch (const json::exception& e) {
        raise(ErrorCode::Format, "corrupt cache manifest '" + manifest_path.string() + "': " + e.what());
    }

    const auto rows = csv::read_file(csv_path);
    if (rows.empty() || rows.front().fields != std::vector<std::string>{"date", "views"}) {
        raise(ErrorCode::Format, "cache file '" + csv_path.string() + "' line 1: header must be 'date,views'");
    }
    std::vector<ts::Point> points;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        if (f.size() != 2) {
            raise(ErrorCode::Format, "cache file '" + csv_path.string() + "' line " + std::to_string(rows[r].line));
        }
        try {
            points.push_back({ts::parse_iso_day(f[0]), std::stod(f[1])});
        } catch (const std::exception&) {
            raise(ErrorCode::Format, "cache file '" + csv_path.string() + "' line " + std::to_string(rows[r].line));
        }
    }
    out.series = ts::DailySeries(label, std::move(points));
    return out;
}

void SeriesCache::store(const std::filesystem::path& csv_path, const ts::DailySeries& series,
                        const CacheManifest& manifest) const {
    std::string body = "date,views\n";
    for (const auto& p : series.points()) body += ts::to_iso(p.date) + "," + csv::format_number(p.value) + "\n";
    const json m = {{"start", ts::to_iso(manifest.start)},
                    {"end", ts::to_iso(manifest.end)},
                    {"redirects", manifest.redirects},
                    {"titles", manifest.titles},
                    {"fetched_at", manifest.fetched_at}};
    auto manifest_path = csv_path;
    manifest_path.replace_extension(".json");
    csv::write_file_atomic(csv_path, body);
    csv::write_file_atomic(manifest_path, m.dump(2) + "\n");
}

std::optional<CachedSeries> SeriesCache::load_article(const ArticleKey& key) const {
    return load(series_path(key.project, key.title), key.label());
}

std::optional<CachedSeries> SeriesCache::load_totals(const std::string& project) const {
    return load(totals_path(project), "project-total:" + project);
}

void SeriesCache::store_article(const ArticleKey& key, const ts::DailySeries& series,
                                const CacheManifest& manifest) const {
    store(series_path(key.project, key.title), series, manifest);
}

void SeriesCache::store_totals(const std::string& project, const ts::DailySeries& series,
                               const CacheManifest& manifest) const {
    store(totals_path(project), series, manifest);
}

// ---------------------------------------------------------------------------
// PageviewFetcher
// ---------------------------------------------------------------------------

PageviewFetcher::PageviewFetcher(HttpClient& http, SeriesCache cache, FetchPolicy policy, std::string user_agent,
                                 std::function<void(std::chrono::milliseconds)> sleeper)
    : http_(http),
      cache_(std::move(cache)),
      policy_(std::move(policy)),
      user_agent_(std::move(user_agent)),
      sleeper_(std::move(sleeper)),
      throttle_(policy_.max_concurrent, policy_.min_request_spacing) {
    if (user_agent_.empty()) raise(ErrorCode::Configuration, "a User-Agent string is mandatory");
    if (policy_.max_retries < 0) raise(ErrorCode::Configuration, "max_retries must be non-negative");
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::optional<std::string> PageviewFetcher::get(const std::string& url, int& requests) {
    const std::vector<Header> headers{{"User-Agent", user_agent_}, {"Accept", "application/json"}};
    HttpResponse last;
    for (int attempt = 0; attempt <= policy_.max_retries; ++attempt) {
        if (attempt > 0) sleeper_(policy_.backoff_base * (1 << (attempt - 1)));
        {
            auto slot = throttle_.acquire();
            ++requests;
            last = http_.get(url, headers);
        }
        if (last.status == 200) return last.body;
        if (last.status == 404) return std::nullopt;
        if (!retryable(last.status)) break;
    }
    if (last.status == 429) raise(ErrorCode::RateLimited, "rate limited after retries: " + url);
    if (last.status == 0) raise(ErrorCode::Protocol, "transport failure for " + url + ": " + last.error);
    raise(ErrorCode::Protocol, "HTTP " + std::to_string(last.status) + " for " + url);
}

std::optional<ts::DailySeries> PageviewFetcher::fetch_title(const ArticleKey& key, ts::Day start, ts::Day end,
                                                            int& requests) {
    const auto body = get(per_article_url(policy_, key, start, end), requests);
    if (!body) return std::nullopt;
    return parse_pageviews(*body, key.label()).slice(start, end);
}

std::vector<std::string> PageviewFetcher::list_redirects(const ArticleKey& key) {
    std::vector<std::string> titles;
    std::string continuation;
    int requests = 0;
    std::set<std::string> seen_tokens;
    do {
        const auto body = get(redirects_url(policy_, key, continuation), requests);
        if (!body) return titles;
        json doc;
        try {
            doc = json::parse(*body);
        } catch (const json::exception& e) {
            raise(ErrorCode::Protocol, "redirect query payload is not JSON: " + std::string(e.what()));
        }
        if (!doc.contains("query")) {
            raise(ErrorCode::Protocol, "redirect query response has no 'query' member");
        }
        const auto& pages = doc["query"].value("pages", json::array());
        auto visit = [&](const json& page) {
            if (!page.contains("redirects")) return;
            for (const auto& r : page["redirects"]) {
                if (r.contains("title") && r["title"].is_string()) titles.push_back(r["title"].get<std::string>());
            }
        };
        if (pages.is_array()) {
            for (const auto& page : pages) visit(page);
        } else if (pages.is_object()) {
            for (const auto& [id, page] : pages.items()) visit(page);
        }
        continuation.clear();
        if (doc.contains("continue") && doc["continue"].contains("rdcontinue")) {
            continuation = doc["continue"]["rdcontinue"].get<std::string>();
            if (!seen_tokens.insert(continuation).second) {
                raise(ErrorCode::Protocol, "redirect query continuation does not advance");
            }
        }
    } while (!continuation.empty());
    std::sort(titles.begin(), titles.end());
    titles.erase(std::unique(titles.begin(), titles.end()), titles.end());
    titles.erase(std::remove(titles.begin(), titles.end(), key.title), titles.end());
    return titles;
}

FetchResult PageviewFetcher::fetch_article_views(const ArticleKey& key, ts::Day start, ts::Day end) {
    key.validate();
    if (end < start) raise(ErrorCode::Precondition, "end date precedes start date");

    const auto cached = cache_.load_article(key);
    ts::Day fetch_start = start;
    ts::Day fetch_end = end;
    if (cached && cached->manifest.redirects == policy_.redirects) {
        if (cached->manifest.start <= start && cached->manifest.end >= end) {
            return {cached->series.slice(start, end), true, 0};
        }
        fetch_start = std::min(start, cached->manifest.start);
        fetch_end = std::max(end, cached->manifest.end);
    }

    FetchResult result;
    auto main = fetch_title(key, fetch_start, fetch_end, result.requests);
    if (!main) raise(ErrorCode::ArticleUnavailable, "no pageviews for " + key.label());

    std::vector<std::string> titles{key.title};
    std::vector<ts::DailySeries> parts{std::move(*main)};
    if (policy_.redirects) {
        for (const auto& title : list_redirects(key)) {
            auto part = fetch_title({key.project, title}, fetch_start, fetch_end, result.requests);
            titles.push_back(title);
            if (part) parts.push_back(std::move(*part));
        }
    }
    const auto total = sum_series(parts, key.label());
    cache_.store_article(key, total, {fetch_start, fetch_end, policy_.redirects, titles, utc_timestamp_now()});
    result.series = total.slice(start, end);
    return result;
}

FetchResult PageviewFetcher::fetch_project_totals(const std::string& project, ts::Day start, ts::Day end) {
    ArticleKey{project, "-"}.validate();
    if (end < start) raise(ErrorCode::Precondition, "end date precedes start date");

    const std::string label = "project-total:" + project;
    const auto cached = cache_.load_totals(project);
    ts::Day fetch_start = start;
    ts::Day fetch_end = end;
    if (cached) {
        if (cached->manifest.start <= start && cached->manifest.end >= end) {
            return {cached->series.slice(start, end), true, 0};
        }
        fetch_start = std::min(start, cached->manifest.start);
        fetch_end = std::max(end, cached->manifest.end);
    }
    FetchResult result;
    const auto body = get(aggregate_url(policy_, project, fetch_start, fetch_end), result.requests);
    if (!body) raise(ErrorCode::ArticleUnavailable, "no project totals for " + project);
    const auto series = parse_pageviews(*body, label).slice(fetch_start, fetch_end);
    cache_.store_totals(project, series, {fetch_start, fetch_end, false, {}, utc_timestamp_now()});
    result.series = series.slice(start, end);
    return result;
}

}  // namespace wikimig::ingest
