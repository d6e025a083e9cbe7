#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ragbench/condition.hpp"
#include "ragbench/corpus.hpp"
#include "ragbench/embedding.hpp"
#include "ragbench/http.hpp"
#include "ragbench/vector_index.hpp"

namespace ragbench {

struct RerankScore {
    std::string chunk_id;
    double score = 0.0;  // [0, 1]
    std::size_t original_rank = 0;
};

struct RerankCandidate {
    SearchHit hit;
    std::string text;
};

struct TraceEntry {
    std::string chunk_id;
    double l2_distance = 0.0;
    double rerank_score = 0.0;
    std::size_t final_rank = 0;
    bool included = false;

    bool operator==(const TraceEntry&) const = default;
};

struct Passage {
    std::string chunk_id;
    std::string text;

    bool operator==(const Passage&) const = default;
};

struct ContextBundle {
    std::string case_id;
    std::vector<Passage> passages;  // final-rank order
    std::size_t total_chars = 0;
    std::vector<TraceEntry> retrieval_trace;

    bool operator==(const ContextBundle&) const = default;
};

struct RetrievalParams {
    std::size_t k_retrieve = 8;
    std::size_t m_keep = 4;
    std::size_t char_budget = 6000;
};

/// Case narrative fields joined by newlines, plus the pre-diagnosis when the
/// condition provides it and the case has one.
std::string build_query(const PatientCase& patient, const Condition& condition);

/// Relevance scorer behind rerank(). Returns one score per passage.
class PassageScorer {
public:
    virtual ~PassageScorer() = default;
    virtual std::vector<double> score(const std::string& query,
                                      std::span<const std::string> passages) = 0;
};

/// |Q ∩ P| / |Q| over lowercased word sets.
class LexicalOverlapScorer final : public PassageScorer {
public:
    std::vector<double> score(const std::string& query,
                              std::span<const std::string> passages) override;
};

/// POST {"query", "passages"} -> {"scores"}; scores are clamped to [0, 1].
class HttpCrossEncoderScorer final : public PassageScorer {
public:
    HttpCrossEncoderScorer(std::string endpoint, std::chrono::milliseconds timeout,
                           std::shared_ptr<HttpTransport> transport = nullptr);
    std::vector<double> score(const std::string& query,
                              std::span<const std::string> passages) override;

private:
    std::string endpoint_;
    std::chrono::milliseconds timeout_;
    std::shared_ptr<HttpTransport> transport_;
};

/// Scores candidates and orders them by descending score, ties by original rank.
std::vector<RerankScore> rerank(const std::string& query, std::span<const RerankCandidate> candidates,
                                PassageScorer& scorer);
std::vector<RerankScore> rerank(const std::string& query, std::span<const RerankCandidate> candidates);

/// Resolves chunk ids to their text.
class ChunkStore {
public:
    ChunkStore() = default;
    explicit ChunkStore(std::vector<GuidelineChunk> chunks);

    const std::string& text(const std::string& chunk_id) const;
    std::size_t size() const noexcept { return chunks_.size(); }
    const std::vector<GuidelineChunk>& chunks() const noexcept { return chunks_; }

private:
    std::vector<GuidelineChunk> chunks_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Query embedding -> kNN -> rerank -> keep top m_keep -> greedy packing.
/// The first passage is always included whole, even over budget.
ContextBundle retrieve_for_query(const std::string& case_id, const std::string& query,
                                 const FlatIndex& index, const ChunkStore& chunks,
                                 Embedder& embedder, PassageScorer& scorer,
                                 const RetrievalParams& params);

/// retrieve_for_query() on build_query(patient, condition). Requires
/// condition.rag_enabled.
ContextBundle retrieve_context(const PatientCase& patient, const Condition& condition,
                               const FlatIndex& index, const ChunkStore& chunks,
                               Embedder& embedder, PassageScorer& scorer,
                               const RetrievalParams& params);

}  // namespace ragbench
