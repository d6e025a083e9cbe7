#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ragbench/condition.hpp"
#include "ragbench/corpus.hpp"
#include "ragbench/http.hpp"
#include "ragbench/retrieval.hpp"

namespace ragbench {

enum class ModelClass { SLM, LLM };

std::string to_string(ModelClass c);
ModelClass parse_model_class(std::string_view s);

enum class BackendKind { chat_http, mock };

struct ModelConfig {
    std::string name;
    std::string endpoint;
    std::string model_id;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::chrono::milliseconds timeout{60000};
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{500};
    std::optional<std::int64_t> seed = 42;
    ModelClass class_label = ModelClass::SLM;
    BackendKind backend = BackendKind::chat_http;

    void validate() const;
    /// "<NAME>_API_KEY" with the name upper-cased and non-alphanumerics as '_'.
    std::string api_key_env() const;
    /// Stable description for run fingerprints (no secrets).
    std::string fingerprint_text() const;
};

struct FewShotExample {
    std::string input;
    std::string output;
};

/// Versioned prompt templates shared by every model, plus the judge prompts.
struct TemplateSet {
    std::string version;
    std::string system;
    std::string user_skeleton;  // placeholders {case}, {context}, {prediagnosis}
    std::vector<FewShotExample> few_shot;
    std::string context_header = "Guideline excerpts:";
    std::string prediagnosis_header = "Pre-defined diagnosis:";
    std::string judge_claims;          // placeholders {answer}
    std::string judge_verdicts;        // placeholders {contexts}, {claims}
    std::string judge_gen_questions;   // placeholders {answer}, {n}

    static TemplateSet parse(const std::string& json_text);
    static TemplateSet load(const std::filesystem::path& path);
};

struct Prompt {
    std::string system;
    std::string user;
    std::vector<FewShotExample> few_shot_examples;
    std::string content_hash;  // SHA-256 hex of the rendered system + user text

    // Routing metadata; not part of the rendered content.
    std::string case_id;
    Condition condition;
    std::string template_version;
};

enum class FinishReason { stop, length, content_filter, other };

std::string to_string(FinishReason r);
FinishReason parse_finish_reason(std::string_view s);

struct ModelAnswer {
    std::string raw_text;
    std::string model;
    Condition condition;
    std::string case_id;
    std::chrono::milliseconds latency{0};
    std::string prompt_hash;
    FinishReason finish_reason = FinishReason::stop;
    int attempts = 1;
};

/// Substitutes `{name}` placeholders; unknown placeholders are left as-is.
std::string render_template(const std::string& skeleton,
                            const std::map<std::string, std::string>& values);

/// Renders the History/Medications/Labs/Course block.
std::string render_case_narrative(const PatientCase& patient);

/// Throws ValidationError when `context` presence does not match
/// condition.rag_enabled, or when a pre-diagnosis is requested but missing.
Prompt build_prompt(const PatientCase& patient, const Condition& condition,
                    const std::optional<ContextBundle>& context, const TemplateSet& templates);

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ModelAnswer complete(const ModelConfig& config, const Prompt& prompt) = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// OpenAI-compatible chat-completions client with exponential backoff on
/// 429, 5xx and transport failures. 401/403 fail immediately.
class HttpChatBackend final : public ChatBackend {
public:
    explicit HttpChatBackend(std::shared_ptr<HttpTransport> transport = nullptr,
                             Sleeper sleeper = nullptr);
    ModelAnswer complete(const ModelConfig& config, const Prompt& prompt) override;

    static std::string request_body(const ModelConfig& config, const Prompt& prompt);

private:
    std::shared_ptr<HttpTransport> transport_;
    Sleeper sleeper_;
};

/// Key format used by mock scripts: "case_id|model name|condition token".
std::string mock_key(const std::string& case_id, const std::string& model, const Condition& c);

/// Canned answers keyed by (case, model, condition). Unknown keys are errors.
class MockBackend final : public ChatBackend {
public:
    MockBackend() = default;
    explicit MockBackend(std::map<std::string, std::string> script);

    /// JSON object {"<case>|<model>|<condition>": "text", ...}.
    static std::shared_ptr<MockBackend> from_file(const std::filesystem::path& path);

    void set(const std::string& case_id, const std::string& model, const Condition& c,
             std::string text);
    /// Every call fails with a retryable ProviderError (simulates a dead endpoint).
    void set_always_fail(bool fail) { always_fail_ = fail; }
    /// Artificial per-call latency; zero by default.
    void set_delay(std::chrono::milliseconds delay) { delay_ = delay; }

    ModelAnswer complete(const ModelConfig& config, const Prompt& prompt) override;

    std::size_t calls() const noexcept { return calls_.load(); }
    std::size_t max_in_flight() const noexcept { return max_in_flight_.load(); }
    void reset_counters();

private:
    std::map<std::string, std::string> script_;
    bool always_fail_ = false;
    std::chrono::milliseconds delay_{0};
    std::atomic<std::size_t> calls_{0};
    std::atomic<std::size_t> in_flight_{0};
    std::atomic<std::size_t> max_in_flight_{0};
};

/// Dispatches to the backend and stamps routing metadata onto the answer.
ModelAnswer complete(ChatBackend& backend, const ModelConfig& config, const Prompt& prompt);

}  // namespace ragbench
