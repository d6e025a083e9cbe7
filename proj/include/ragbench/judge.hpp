#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ragbench/extraction.hpp"
#include "ragbench/metrics.hpp"
#include "ragbench/model_gateway.hpp"

namespace ragbench {

/// Judge backed by any chat backend. Each operation renders the matching
/// judge_* template and expects a JSON array in the reply.
class ChatJudge final : public JudgeBackend {
public:
    ChatJudge(std::shared_ptr<ChatBackend> backend, ModelConfig config, TemplateSet templates);

    std::vector<std::string> extract_claims(const std::string& answer_text) override;
    std::vector<bool> verify_claims(std::span<const std::string> claims,
                                    std::span<const std::string> contexts) override;
    std::vector<std::string> generate_questions(const std::string& answer_text, int n) override;
    std::string judge_id() const override { return config_.name + ":" + config_.model_id; }

private:
    std::string ask(const std::string& user);

    std::shared_ptr<ChatBackend> backend_;
    ModelConfig config_;
    TemplateSet templates_;
};

/// Returns fixed claims, verdicts and questions. For tests.
class ScriptedJudge final : public JudgeBackend {
public:
    ScriptedJudge(std::vector<std::string> claims, std::vector<bool> verdicts,
                  std::vector<std::string> questions = {});

    std::vector<std::string> extract_claims(const std::string& answer_text) override;
    std::vector<bool> verify_claims(std::span<const std::string> claims,
                                    std::span<const std::string> contexts) override;
    std::vector<std::string> generate_questions(const std::string& answer_text, int n) override;
    std::string judge_id() const override { return "scripted"; }

private:
    std::vector<std::string> claims_;
    std::vector<bool> verdicts_;
    std::vector<std::string> questions_;
};

/// Offline deterministic judge. Claims are the extracted diagnosis and
/// treatment terms; a claim is supported when some context mentions it
/// (case-insensitive); generated questions are templated from the claims.
class RuleBasedJudge final : public JudgeBackend {
public:
    explicit RuleBasedJudge(SynonymTable synonyms = {});

    std::vector<std::string> extract_claims(const std::string& answer_text) override;
    std::vector<bool> verify_claims(std::span<const std::string> claims,
                                    std::span<const std::string> contexts) override;
    std::vector<std::string> generate_questions(const std::string& answer_text, int n) override;
    std::string judge_id() const override { return "mock-rule-based"; }

private:
    SynonymTable synonyms_;
};

/// Pulls the first top-level JSON array out of free text.
/// Throws MalformedResponseError when there is none.
std::string extract_json_array(const std::string& text);

}  // namespace ragbench
