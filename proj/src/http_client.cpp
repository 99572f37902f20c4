#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "wikimig/error.hpp"
#include "wikimig/ingest.hpp"

namespace wikimig::ingest {

HttplibClient::HttplibClient(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttplibClient::get(const std::string& url, const std::vector<Header>& headers) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) raise(ErrorCode::Configuration, "URL without scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_follow_location(true);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);

    httplib::Headers hdrs;
    for (const auto& [name, value] : headers) hdrs.emplace(name, value);

    HttpResponse out;
    auto res = client.Get(path, hdrs);
    if (!res) {
        out.error = httplib::to_string(res.error());
        return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
}

}  // namespace wikimig::ingest
