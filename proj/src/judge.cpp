#include "ragbench/judge.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include "ragbench/errors.hpp"
#include "ragbench/text.hpp"

namespace ragbench {

using nlohmann::json;

namespace {

constexpr std::string_view kJudgeSystem =
    "You are a strict evaluator of clinical answers. Reply with a single JSON array and nothing else.";

constexpr std::string_view kDiagnosisPrefix = "diagnosis: ";
constexpr std::string_view kTreatmentPrefix = "treatment: ";

std::string strip_claim_prefix(const std::string& claim) {
    for (auto prefix : {kDiagnosisPrefix, kTreatmentPrefix}) {
        if (claim.rfind(prefix, 0) == 0) return claim.substr(prefix.size());
    }
    return claim;
}

}  // namespace

std::string extract_json_array(const std::string& text) {
    const auto open = text.find('[');
    if (open == std::string::npos) throw MalformedResponseError("judge reply contains no JSON array");
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '[') ++depth;
        else if (c == ']' && --depth == 0) return text.substr(open, i - open + 1);
    }
    throw MalformedResponseError("judge reply has an unterminated JSON array");
}

ChatJudge::ChatJudge(std::shared_ptr<ChatBackend> backend, ModelConfig config, TemplateSet templates)
    : backend_(std::move(backend)), config_(std::move(config)), templates_(std::move(templates)) {
    if (!backend_) throw ValidationError("chat judge needs a backend");
    if (templates_.judge_claims.empty() || templates_.judge_verdicts.empty() ||
        templates_.judge_gen_questions.empty()) {
        throw ValidationError("template set lacks judge_claims / judge_verdicts / judge_gen_questions");
    }
}

std::string ChatJudge::ask(const std::string& user) {
    Prompt prompt;
    prompt.system = std::string(kJudgeSystem);
    prompt.user = user;
    prompt.case_id = "judge";
    prompt.template_version = templates_.version;
    return complete(*backend_, config_, prompt).raw_text;
}

std::vector<std::string> ChatJudge::extract_claims(const std::string& answer_text) {
    const std::string reply = ask(render_template(templates_.judge_claims, {{"answer", answer_text}}));
    json arr;
    try {
        arr = json::parse(extract_json_array(reply));
    } catch (const json::parse_error&) {
        throw MalformedResponseError("judge claims reply is not a JSON array");
    }
    std::vector<std::string> claims;
    for (const auto& item : arr) {
        if (!item.is_string()) throw MalformedResponseError("judge claim is not a string");
        std::string c = text::trim(item.get<std::string>());
        if (!c.empty()) claims.push_back(std::move(c));
    }
    return claims;
}

std::vector<bool> ChatJudge::verify_claims(std::span<const std::string> claims,
                                           std::span<const std::string> contexts) {
    std::string ctx;
    for (std::size_t i = 0; i < contexts.size(); ++i) ctx += fmt::format("[{}] {}\n\n", i + 1, contexts[i]);
    json claim_list = json::array();
    for (const auto& c : claims) claim_list.push_back(c);
    const std::string reply =
        ask(render_template(templates_.judge_verdicts, {{"contexts", ctx}, {"claims", claim_list.dump(2)}}));
    json arr;
    try {
        arr = json::parse(extract_json_array(reply));
    } catch (const json::parse_error&) {
        throw MalformedResponseError("judge verdict reply is not a JSON array");
    }
    std::vector<bool> verdicts;
    for (const auto& item : arr) {
        if (item.is_boolean()) {
            verdicts.push_back(item.get<bool>());
        } else if (item.is_string()) {
            const std::string v = text::to_lower_ascii(text::trim(item.get<std::string>()));
            verdicts.push_back(v == "supported" || v == "yes" || v == "true");
        } else {
            throw MalformedResponseError("judge verdict is neither boolean nor string");
        }
    }
    if (verdicts.size() != claims.size()) {
        throw MalformedResponseError(fmt::format("judge returned {} verdicts for {} claims", verdicts.size(),
                                                 claims.size()));
    }
    return verdicts;
}

std::vector<std::string> ChatJudge::generate_questions(const std::string& answer_text, int n) {
    const std::string reply = ask(render_template(templates_.judge_gen_questions,
                                                  {{"answer", answer_text}, {"n", std::to_string(n)}}));
    json arr;
    try {
        arr = json::parse(extract_json_array(reply));
    } catch (const json::parse_error&) {
        throw MalformedResponseError("judge questions reply is not a JSON array");
    }
    std::vector<std::string> questions;
    for (const auto& item : arr) {
        if (item.is_string()) questions.push_back(item.get<std::string>());
    }
    return questions;
}

ScriptedJudge::ScriptedJudge(std::vector<std::string> claims, std::vector<bool> verdicts,
                             std::vector<std::string> questions)
    : claims_(std::move(claims)), verdicts_(std::move(verdicts)), questions_(std::move(questions)) {}

std::vector<std::string> ScriptedJudge::extract_claims(const std::string&) { return claims_; }

std::vector<bool> ScriptedJudge::verify_claims(std::span<const std::string>, std::span<const std::string>) {
    return verdicts_;
}

std::vector<std::string> ScriptedJudge::generate_questions(const std::string&, int) { return questions_; }

RuleBasedJudge::RuleBasedJudge(SynonymTable synonyms) : synonyms_(std::move(synonyms)) {}

std::vector<std::string> RuleBasedJudge::extract_claims(const std::string& answer_text) {
    const auto parsed = extract_answer_blocks(answer_text, synonyms_);
    std::vector<std::string> claims;
    for (const auto& t : parsed.diagnoses) claims.push_back(std::string(kDiagnosisPrefix) + t);
    for (const auto& t : parsed.treatments) claims.push_back(std::string(kTreatmentPrefix) + t);
    return claims;
}

std::vector<bool> RuleBasedJudge::verify_claims(std::span<const std::string> claims,
                                                std::span<const std::string> contexts) {
    std::vector<std::string> lowered;
    lowered.reserve(contexts.size());
    for (const auto& c : contexts) lowered.push_back(text::collapse_whitespace(text::to_lower_ascii(c)));
    std::vector<bool> out;
    out.reserve(claims.size());
    for (const auto& claim : claims) {
        const std::string term = strip_claim_prefix(claim);
        bool found = false;
        for (const auto& c : lowered) {
            if (c.find(term) != std::string::npos) {
                found = true;
                break;
            }
        }
        out.push_back(found);
    }
    return out;
}

std::vector<std::string> RuleBasedJudge::generate_questions(const std::string& answer_text, int n) {
    const auto parsed = extract_answer_blocks(answer_text, synonyms_);
    std::vector<std::string> terms(parsed.diagnoses.begin(), parsed.diagnoses.end());
    terms.insert(terms.end(), parsed.treatments.begin(), parsed.treatments.end());
    std::vector<std::string> questions;
    if (terms.empty()) return questions;
    for (int i = 0; i < n; ++i) {
        questions.push_back(fmt::format("Which diagnosis and guideline-based treatment fit a patient presenting with {}?",
                                        terms[static_cast<std::size_t>(i) % terms.size()]));
    }
    return questions;
}

}  // namespace ragbench
