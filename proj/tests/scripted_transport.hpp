#pragma once

#include <deque>
#include <mutex>
#include <string>
#include <vector>

#include "ragbench/http.hpp"

namespace testsupport {

/// Replays a fixed sequence of HTTP statuses; the last one repeats.
class ScriptedTransport final : public ragbench::HttpTransport {
public:
    explicit ScriptedTransport(std::vector<int> statuses, std::string ok_body = default_ok_body())
        : statuses_(std::move(statuses)), ok_body_(std::move(ok_body)) {}

    ragbench::HttpResponse post_json(const std::string& url, const std::string& body,
                                     const ragbench::HttpHeaders& headers,
                                     std::chrono::milliseconds) override {
        std::lock_guard<std::mutex> lock(mutex_);
        last_url = url;
        last_body = body;
        last_headers = headers;
        const int status = statuses_.at(std::min(attempts, statuses_.size() - 1));
        ++attempts;
        ragbench::HttpResponse r;
        if (status < 0) {
            r.transport_error = "timeout";
            return r;
        }
        r.status = status;
        r.body = status == 200 ? ok_body_ : R"({"error":"scripted"})";
        return r;
    }

    static std::string default_ok_body() {
        return R"({"choices":[{"message":{"role":"assistant","content":"DIAGNOSES:\n- gout\nTREATMENTS:\n- colchicine"},"finish_reason":"stop"}]})";
    }

    std::size_t attempts = 0;
    std::string last_url;
    std::string last_body;
    ragbench::HttpHeaders last_headers;

private:
    std::vector<int> statuses_;
    std::string ok_body_;
    std::mutex mutex_;
};

}  // namespace testsupport
