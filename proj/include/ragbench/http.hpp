#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace ragbench {

struct HttpResponse {
    int status = 0;            // 0 when the request never got an HTTP answer
    std::string body;
    std::string transport_error;  // non-empty on connection failure / timeout
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// Minimal POST-JSON transport so providers can be scripted in tests.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post_json(const std::string& url, const std::string& body,
                                   const HttpHeaders& headers,
                                   std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed transport. Accepts http:// and https:// URLs.
class HttplibTransport final : public HttpTransport {
public:
    HttpResponse post_json(const std::string& url, const std::string& body,
                           const HttpHeaders& headers,
                           std::chrono::milliseconds timeout) override;
};

std::shared_ptr<HttpTransport> default_transport();

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // starts with '/'
};

/// Throws ValidationError when the URL has no http(s) scheme.
SplitUrl split_url(const std::string& url);

}  // namespace ragbench
