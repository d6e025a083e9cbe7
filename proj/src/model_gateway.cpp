#include "ragbench/model_gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "ragbench/errors.hpp"
#include "ragbench/hash.hpp"
#include "ragbench/text.hpp"

namespace ragbench {

using nlohmann::json;

std::string to_string(ModelClass c) { return c == ModelClass::LLM ? "LLM" : "SLM"; }

ModelClass parse_model_class(std::string_view s) {
    const std::string u = text::to_lower_ascii(text::trim(s));
    if (u == "slm") return ModelClass::SLM;
    if (u == "llm") return ModelClass::LLM;
    throw ValidationError(fmt::format("unknown model class '{}' (expected SLM or LLM)", s));
}

void ModelConfig::validate() const {
    if (text::trim(name).empty()) throw ValidationError("model config without a name");
    if (temperature < 0.0) throw ValidationError(fmt::format("model {}: temperature must be >= 0", name));
    if (max_tokens <= 0) throw ValidationError(fmt::format("model {}: max_tokens must be positive", name));
    if (max_retries < 0 || max_retries > 10) {
        throw ValidationError(fmt::format("model {}: max_retries must be within [0, 10]", name));
    }
    if (backend == BackendKind::chat_http) {
        if (endpoint.empty()) throw ValidationError(fmt::format("model {}: endpoint required", name));
        split_url(endpoint);
    }
}

std::string ModelConfig::api_key_env() const {
    std::string out;
    for (unsigned char c : name) out.push_back(std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_');
    return out + "_API_KEY";
}

std::string ModelConfig::fingerprint_text() const {
    return fmt::format("{}|{}|{}|{}|{}|{}|{}|{}", name, model_id, endpoint, temperature, max_tokens,
                       seed ? std::to_string(*seed) : "-", to_string(class_label),
                       backend == BackendKind::mock ? "mock" : "chat_http");
}

namespace {

std::string string_field(const json& j, const char* key, bool required) {
    if (!j.contains(key) || j[key].is_null()) {
        if (required) throw ValidationError(fmt::format("template set: missing '{}'", key));
        return {};
    }
    if (!j[key].is_string()) throw ValidationError(fmt::format("template set: '{}' must be a string", key));
    return j[key].get<std::string>();
}

}  // namespace

TemplateSet TemplateSet::parse(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("template set is not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) throw ValidationError("template set must be a JSON object");
    TemplateSet t;
    t.version = string_field(j, "version", true);
    t.system = string_field(j, "system", true);
    t.user_skeleton = string_field(j, "user_skeleton", true);
    for (const char* placeholder : {"{case}", "{context}", "{prediagnosis}"}) {
        if (t.user_skeleton.find(placeholder) == std::string::npos) {
            throw ValidationError(fmt::format("template set: user_skeleton lacks {}", placeholder));
        }
    }
    if (j.contains("few_shot")) {
        if (!j["few_shot"].is_array()) throw ValidationError("template set: 'few_shot' must be an array");
        for (const auto& ex : j["few_shot"]) {
            t.few_shot.push_back({string_field(ex, "input", true), string_field(ex, "output", true)});
        }
    }
    if (auto h = string_field(j, "context_header", false); !h.empty()) t.context_header = h;
    if (auto h = string_field(j, "prediagnosis_header", false); !h.empty()) t.prediagnosis_header = h;
    t.judge_claims = string_field(j, "judge_claims", false);
    t.judge_verdicts = string_field(j, "judge_verdicts", false);
    t.judge_gen_questions = string_field(j, "judge_gen_questions", false);
    return t;
}

TemplateSet TemplateSet::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read template set {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string to_string(FinishReason r) {
    switch (r) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::content_filter: return "content_filter";
        case FinishReason::other: break;
    }
    return "other";
}

FinishReason parse_finish_reason(std::string_view s) {
    if (s == "stop") return FinishReason::stop;
    if (s == "length") return FinishReason::length;
    if (s == "content_filter") return FinishReason::content_filter;
    return FinishReason::other;
}

std::string render_template(const std::string& skeleton, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(skeleton.size());
    std::size_t i = 0;
    while (i < skeleton.size()) {
        if (skeleton[i] == '{') {
            const std::size_t close = skeleton.find('}', i + 1);
            if (close != std::string::npos) {
                const auto it = values.find(skeleton.substr(i + 1, close - i - 1));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(skeleton[i++]);
    }
    return out;
}

std::string render_case_narrative(const PatientCase& patient) {
    return fmt::format("History: {}\nMedications: {}\nLaboratory values: {}\nCourse: {}",
                       text::trim(patient.history), text::trim(patient.medications), text::trim(patient.labs),
                       text::trim(patient.course));
}

Prompt build_prompt(const PatientCase& patient, const Condition& condition,
                    const std::optional<ContextBundle>& context, const TemplateSet& templates) {
    if (condition.rag_enabled != context.has_value()) {
        throw ValidationError(fmt::format("case {}: context must be present iff retrieval is enabled ({})",
                                          patient.case_id, condition.token()));
    }
    if (condition.prediagnosis_provided && !patient.pre_diagnosis) {
        throw ValidationError(fmt::format("case {}: condition {} needs a pre-diagnosis", patient.case_id,
                                          condition.token()));
    }

    std::string context_block;
    if (context) {
        context_block = templates.context_header + "\n";
        for (std::size_t i = 0; i < context->passages.size(); ++i) {
            context_block += fmt::format("[{}] {}\n\n", i + 1, text::trim(context->passages[i].text));
        }
    }
    std::string prediagnosis_block;
    if (condition.prediagnosis_provided) {
        prediagnosis_block = fmt::format("{} {}\n\n", templates.prediagnosis_header, text::trim(*patient.pre_diagnosis));
    }

    Prompt prompt;
    prompt.system = templates.system;
    for (std::size_t i = 0; i < templates.few_shot.size(); ++i) {
        prompt.system += fmt::format("\n\nExample {} input:\n{}\n\nExample {} output:\n{}", i + 1,
                                     templates.few_shot[i].input, i + 1, templates.few_shot[i].output);
    }
    prompt.user = render_template(templates.user_skeleton, {{"case", render_case_narrative(patient)},
                                                            {"context", context_block},
                                                            {"prediagnosis", prediagnosis_block}});
    prompt.few_shot_examples = templates.few_shot;
    Sha256 h;
    h.add_field(prompt.system).add_field(prompt.user);
    const Digest d = h.finish();
    prompt.content_hash = to_hex(d);
    prompt.case_id = patient.case_id;
    prompt.condition = condition;
    prompt.template_version = templates.version;
    return prompt;
}

HttpChatBackend::HttpChatBackend(std::shared_ptr<HttpTransport> transport, Sleeper sleeper)
    : transport_(transport ? std::move(transport) : default_transport()),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })) {}

std::string HttpChatBackend::request_body(const ModelConfig& config, const Prompt& prompt) {
    json body;
    body["model"] = config.model_id;
    body["temperature"] = config.temperature;
    body["max_tokens"] = config.max_tokens;
    if (config.seed) body["seed"] = *config.seed;
    body["messages"] = json::array({json{{"role", "system"}, {"content", prompt.system}},
                                    json{{"role", "user"}, {"content", prompt.user}}});
    return body.dump();
}

namespace {

std::pair<std::string, FinishReason> parse_chat_body(const std::string& body) {
    json parsed;
    try {
        parsed = json::parse(body);
    } catch (const json::parse_error&) {
        throw MalformedResponseError("chat response is not JSON");
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array() || parsed["choices"].empty()) {
        throw MalformedResponseError("chat response has no choices");
    }
    const json& choice = parsed["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string()) {
        throw MalformedResponseError("chat response choice lacks message.content");
    }
    std::string text = choice["message"]["content"].get<std::string>();
    if (text.empty()) throw MalformedResponseError("chat response content is empty");
    FinishReason reason = FinishReason::other;
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
        reason = parse_finish_reason(choice["finish_reason"].get<std::string>());
    }
    return {std::move(text), reason};
}

}  // namespace

ModelAnswer HttpChatBackend::complete(const ModelConfig& config, const Prompt& prompt) {
    const std::string body = request_body(config, prompt);
    HttpHeaders headers;
    if (const char* key = std::getenv(config.api_key_env().c_str())) {
        headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }

    const auto started = std::chrono::steady_clock::now();
    std::string last_error;
    int last_status = 0;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) sleeper_(config.backoff_base * (1LL << (attempt - 1)));

        const HttpResponse resp = transport_->post_json(config.endpoint, body, headers, config.timeout);
        if (!resp.transport_error.empty()) {
            last_error = resp.transport_error;
            last_status = 0;
            continue;
        }
        if (resp.status == 200) {
            auto [text, reason] = parse_chat_body(resp.body);
            ModelAnswer answer;
            answer.raw_text = std::move(text);
            answer.finish_reason = reason;
            answer.attempts = attempt + 1;
            answer.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started);
            return answer;
        }
        if (resp.status == 401 || resp.status == 403) {
            throw AuthError(fmt::format("model {}: authentication failed (HTTP {})", config.name, resp.status),
                            resp.status);
        }
        if (resp.status == 429 || resp.status >= 500) {
            last_error = fmt::format("HTTP {}", resp.status);
            last_status = resp.status;
            continue;
        }
        throw ProviderError(fmt::format("model {}: request rejected (HTTP {})", config.name, resp.status),
                            resp.status, false);
    }
    throw ProviderError(fmt::format("model {}: giving up after {} attempts (last: {})", config.name,
                                    config.max_retries + 1, last_error),
                        last_status, true);
}

std::string mock_key(const std::string& case_id, const std::string& model, const Condition& c) {
    return case_id + "|" + model + "|" + c.token();
}

MockBackend::MockBackend(std::map<std::string, std::string> script) : script_(std::move(script)) {}

std::shared_ptr<MockBackend> MockBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read mock script {}", path.string()));
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("mock script {} is not valid JSON: {}", path.string(), e.what()));
    }
    if (!j.is_object()) throw ValidationError("mock script must be a JSON object of key -> text");
    std::map<std::string, std::string> script;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string()) throw ValidationError(fmt::format("mock script entry '{}' is not a string", key));
        script.emplace(key, value.get<std::string>());
    }
    return std::make_shared<MockBackend>(std::move(script));
}

void MockBackend::set(const std::string& case_id, const std::string& model, const Condition& c, std::string text) {
    script_[mock_key(case_id, model, c)] = std::move(text);
}

void MockBackend::reset_counters() {
    calls_ = 0;
    max_in_flight_ = 0;
}

ModelAnswer MockBackend::complete(const ModelConfig& config, const Prompt& prompt) {
    ++calls_;
    const std::size_t now = ++in_flight_;
    std::size_t seen = max_in_flight_.load();
    while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
    }
    struct Leave {
        std::atomic<std::size_t>& counter;
        ~Leave() { --counter; }
    } leave{in_flight_};

    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    if (always_fail_) {
        throw ProviderError(fmt::format("model {}: mock endpoint is down", config.name), 503, true);
    }
    const std::string key = mock_key(prompt.case_id, config.name, prompt.condition);
    const auto it = script_.find(key);
    if (it == script_.end()) throw ValidationError(fmt::format("mock script has no entry for '{}'", key));
    ModelAnswer answer;
    answer.raw_text = it->second;
    answer.finish_reason = FinishReason::stop;
    answer.latency = delay_;
    return answer;
}

ModelAnswer complete(ChatBackend& backend, const ModelConfig& config, const Prompt& prompt) {
    ModelAnswer answer = backend.complete(config, prompt);
    answer.model = config.name;
    answer.case_id = prompt.case_id;
    answer.condition = prompt.condition;
    answer.prompt_hash = prompt.content_hash;
    return answer;
}

}  // namespace ragbench
