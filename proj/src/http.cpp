#include "ragbench/http.hpp"

#include <httplib.h>

#include <fmt/format.h>

#include "ragbench/errors.hpp"

namespace ragbench {

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ValidationError(fmt::format("URL without scheme: '{}'", url));
    }
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ValidationError(fmt::format("unsupported URL scheme '{}' in '{}'", scheme, url));
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

HttpResponse HttplibTransport::post_json(const std::string& url, const std::string& body,
                                         const HttpHeaders& headers,
                                         std::chrono::milliseconds timeout) {
    const SplitUrl parts = split_url(url);
    httplib::Client client(parts.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers hdrs;
    for (const auto& [k, v] : headers) hdrs.emplace(k, v);

    HttpResponse out;
    auto result = client.Post(parts.path, hdrs, body, "application/json");
    if (!result) {
        out.transport_error = httplib::to_string(result.error());
        return out;
    }
    out.status = result->status;
    out.body = result->body;
    return out;
}

std::shared_ptr<HttpTransport> default_transport() {
    static const auto transport = std::make_shared<HttplibTransport>();
    return transport;
}

}  // namespace ragbench
