#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wikimig/article_key.hpp"
#include "wikimig/timeseries.hpp"

namespace wikimig::ingest {

using Header = std::pair<std::string, std::string>;

struct HttpResponse {
    /// 0 when the transport failed before a status line arrived.
    int status = 0;
    std::string body;
    std::string error;
};

class HttpClient {
public:
    virtual ~HttpClient() = default;
    virtual HttpResponse get(const std::string& url, const std::vector<Header>& headers) = 0;
};

/// cpp-httplib backed client (http and https).
class HttplibClient final : public HttpClient {
public:
    explicit HttplibClient(std::chrono::seconds timeout = std::chrono::seconds(30));
    HttpResponse get(const std::string& url, const std::vector<Header>& headers) override;

private:
    std::chrono::seconds timeout_;
};

/// Access and agent are fixed so only user traffic (no crawlers) is counted.
struct FetchPolicy {
    static constexpr const char* access = "all-access";
    static constexpr const char* agent = "user";
    static constexpr const char* granularity = "daily";

    bool redirects = true;
    int max_concurrent = 4;
    std::chrono::milliseconds min_request_spacing{250};
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{1000};
    std::string api_base = "https://wikimedia.org/api/rest_v1";
    /// "{project}" is replaced by the project host.
    std::string wiki_api_template = "https://{project}/w/api.php";
};

/// Percent-encodes a title for a URL path segment (spaces become underscores).
std::string encode_title(const std::string& title);
std::string url_encode_query(const std::string& value);

std::string per_article_url(const FetchPolicy& policy, const ArticleKey& key, ts::Day start, ts::Day end);
std::string aggregate_url(const FetchPolicy& policy, const std::string& project, ts::Day start, ts::Day end);
std::string redirects_url(const FetchPolicy& policy, const ArticleKey& key, const std::string& continuation);

/// Parses a pageviews response body ({"items": [{"timestamp", "views"}, ...]}).
/// Throws Error(Protocol) on malformed payloads.
ts::DailySeries parse_pageviews(const std::string& body, const std::string& label);

/// Bounds concurrent requests and spaces consecutive request starts.
class RequestThrottle {
public:
    RequestThrottle(int max_concurrent, std::chrono::milliseconds min_spacing);

    class Slot {
    public:
        explicit Slot(RequestThrottle& owner) : owner_(&owner) {}
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;
        ~Slot() { owner_->release(); }

    private:
        RequestThrottle* owner_;
    };

    /// Blocks until a slot is free and the spacing since the previous start has elapsed.
    [[nodiscard]] Slot acquire();

private:
    void release();

    int max_concurrent_;
    std::chrono::milliseconds min_spacing_;
    std::mutex mutex_;
    std::condition_variable cv_;
    int in_flight_ = 0;
    std::mutex spacing_mutex_;
    std::optional<std::chrono::steady_clock::time_point> last_start_;
};

struct CacheManifest {
    ts::Day start;
    ts::Day end;
    bool redirects = true;
    std::vector<std::string> titles;
    /// UTC time the series was written, "YYYY-MM-DDTHH:MM:SSZ".
    std::string fetched_at;
};

struct CachedSeries {
    ts::DailySeries series;
    CacheManifest manifest;
};

/// One "date,views" CSV plus a JSON manifest per (project, title) under the root.
class SeriesCache {
public:
    explicit SeriesCache(std::filesystem::path root);

    /// Root taken from WIKIMIG_CACHE_DIR when set, else `fallback`.
    static std::filesystem::path resolve_root(const std::filesystem::path& fallback);

    const std::filesystem::path& root() const noexcept { return root_; }
    std::filesystem::path series_path(const std::string& project, const std::string& title) const;
    std::filesystem::path totals_path(const std::string& project) const;

    std::optional<CachedSeries> load_article(const ArticleKey& key) const;
    std::optional<CachedSeries> load_totals(const std::string& project) const;
    void store_article(const ArticleKey& key, const ts::DailySeries& series, const CacheManifest& manifest) const;
    void store_totals(const std::string& project, const ts::DailySeries& series, const CacheManifest& manifest) const;

private:
    std::optional<CachedSeries> load(const std::filesystem::path& csv_path, const std::string& label) const;
    void store(const std::filesystem::path& csv_path, const ts::DailySeries& series,
               const CacheManifest& manifest) const;

    std::filesystem::path root_;
};

/// File-system safe form of a title; stable across runs.
std::string sanitize_title(const std::string& title);

struct FetchResult {
    ts::DailySeries series;
    bool from_cache = false;
    int requests = 0;
};

/// Wikimedia pageviews client. Thread-safe; all requests share one throttle.
class PageviewFetcher {
public:
    /// Throws Error(Configuration) when the user agent is empty.
    PageviewFetcher(HttpClient& http, SeriesCache cache, FetchPolicy policy, std::string user_agent,
                    std::function<void(std::chrono::milliseconds)> sleeper = {});

    /// With redirects enabled the result sums the target title and every redirect
    /// title per day. Errors: ArticleUnavailable (404), RateLimited, Protocol, Precondition.
    FetchResult fetch_article_views(const ArticleKey& key, ts::Day start, ts::Day end);
    FetchResult fetch_project_totals(const std::string& project, ts::Day start, ts::Day end);

    /// Titles that redirect to `key`, via the wiki's query API (with continuation).
    std::vector<std::string> list_redirects(const ArticleKey& key);

    const SeriesCache& cache() const noexcept { return cache_; }

private:
    /// GET with throttling and retries. 404 returns nullopt.
    std::optional<std::string> get(const std::string& url, int& requests);
    std::optional<ts::DailySeries> fetch_title(const ArticleKey& key, ts::Day start, ts::Day end, int& requests);

    HttpClient& http_;
    SeriesCache cache_;
    FetchPolicy policy_;
    std::string user_agent_;
    std::function<void(std::chrono::milliseconds)> sleeper_;
    RequestThrottle throttle_;
};

/// Sums series day by day; a day is present when any input has it.
ts::DailySeries sum_series(const std::vector<ts::DailySeries>& parts, const std::string& label);

std::string utc_timestamp_now();

}  // namespace wikimig::ingest
