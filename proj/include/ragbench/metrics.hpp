#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ragbench/condition.hpp"
#include "ragbench/embedding.hpp"
#include "ragbench/extraction.hpp"
#include "ragbench/model_gateway.hpp"

namespace ragbench {

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const PRF&) const = default;
};

/// Set-based precision/recall/F1. Empty prediction scores (0, 0, 0).
PRF prf(const TermSet& predicted, const TermSet& gold);

struct ClaimVerdict {
    std::string claim;
    bool supported = false;

    bool operator==(const ClaimVerdict&) const = default;
};

struct RagasComponents {
    std::optional<double> faithfulness;
    std::optional<double> answer_relevance;
    std::optional<double> composite;
    std::vector<ClaimVerdict> judge_trace;

    bool operator==(const RagasComponents&) const = default;
};

/// Judge model operations used by the RAGAS-style metrics.
class JudgeBackend {
public:
    virtual ~JudgeBackend() = default;
    virtual std::vector<std::string> extract_claims(const std::string& answer_text) = 0;
    /// One verdict per claim.
    virtual std::vector<bool> verify_claims(std::span<const std::string> claims,
                                            std::span<const std::string> contexts) = 0;
    virtual std::vector<std::string> generate_questions(const std::string& answer_text,
                                                        int n) = 0;
    /// Recorded in reports so results can be attributed to a judge.
    virtual std::string judge_id() const = 0;
};

struct FaithfulnessResult {
    double score = 1.0;
    std::vector<ClaimVerdict> trace;
};

/// supported / total claims; 1.0 when the judge finds no claims.
FaithfulnessResult faithfulness(const std::string& answer_text,
                                std::span<const std::string> contexts, JudgeBackend& judge);

/// Fraction of true verdicts, with the zero-claim rule.
double faithfulness_from_verdicts(std::span<const bool> verdicts);

inline constexpr int kGeneratedQuestions = 3;

/// Mean cosine similarity between the question and judge-generated questions,
/// clamped to [0, 1]. 0 when the judge generates nothing.
double answer_relevance(const std::string& question, const std::string& answer_text,
                        JudgeBackend& judge, Embedder& embedder, int n = kGeneratedQuestions);

/// Cosine similarity of two embeddings (0 if either is the zero vector).
double cosine_similarity(std::span<const float> a, std::span<const float> b);

/// Arithmetic mean of the present components. Throws ValidationError if none.
double ragas_composite(std::optional<double> faithfulness, std::optional<double> answer_relevance);

enum class RecordStatus { ok, error };

std::string to_string(RecordStatus s);

struct ScoreRecord {
    std::string case_id;
    std::string model;
    ModelClass model_class = ModelClass::SLM;
    Condition condition;
    int trial = 0;
    RecordStatus status = RecordStatus::ok;
    std::string error;
    std::optional<PRF> f1_dx;
    std::optional<PRF> f1_tx;
    RagasComponents ragas;
    ParseStatus parse_status = ParseStatus::unparseable;
    std::string prompt_hash;
    std::string judge_id;

    bool operator==(const ScoreRecord&) const = default;
};

/// Mean scores for one (model, condition) cell. Metrics are absent when no
/// record in the cell carried them.
struct AggregateCell {
    std::string model;
    ModelClass model_class = ModelClass::SLM;
    Condition condition;
    std::size_t n_records = 0;
    std::size_t n_errors = 0;
    std::optional<double> f1_dx;
    std::optional<double> f1_tx;
    std::optional<double> faithfulness;
    std::optional<double> answer_relevance;
    std::optional<double> ragas;

    bool operator==(const AggregateCell&) const = default;
};

enum class Metric { f1_dx, f1_tx, ragas };

std::string to_string(Metric m);  // "F1-Dx", "F1-Tx", "RAGAS"
std::optional<double> metric_value(const AggregateCell& cell, Metric m);

struct TopScore {
    std::string model;
    Metric metric;
    Condition condition;
    double score = 0.0;
};

/// Macro-average: trials are averaged per case first, then cases are averaged.
/// Errored records count toward n_errors but contribute no scores.
/// Output is sorted by (model, condition assistance level).
std::vector<AggregateCell> aggregate(std::span<const ScoreRecord> records);

/// Best condition per (model, metric); ties go to the least-assisted condition.
std::vector<TopScore> top_scores(std::span<const AggregateCell> cells);

}  // namespace ragbench
