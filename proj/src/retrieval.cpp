#include "ragbench/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "ragbench/errors.hpp"
#include "ragbench/text.hpp"

namespace ragbench {

using nlohmann::json;

std::string build_query(const PatientCase& patient, const Condition& condition) {
    std::string query;
    for (const std::string* field : {&patient.history, &patient.medications, &patient.labs, &patient.course}) {
        const std::string t = text::trim(*field);
        if (t.empty()) continue;
        if (!query.empty()) query.push_back('\n');
        query += t;
    }
    if (condition.prediagnosis_provided && patient.pre_diagnosis) {
        const std::string t = text::trim(*patient.pre_diagnosis);
        if (!t.empty()) {
            if (!query.empty()) query.push_back('\n');
            query += t;
        }
    }
    return query;
}

std::vector<double> LexicalOverlapScorer::score(const std::string& query,
                                                std::span<const std::string> passages) {
    const auto q = text::word_set(query);
    std::vector<double> out;
    out.reserve(passages.size());
    for (const auto& passage : passages) {
        if (q.empty()) {
            out.push_back(0.0);
            continue;
        }
        const auto p = text::word_set(passage);
        std::size_t shared = 0;
        for (const auto& w : q) shared += p.count(w);
        out.push_back(static_cast<double>(shared) / static_cast<double>(q.size()));
    }
    return out;
}

HttpCrossEncoderScorer::HttpCrossEncoderScorer(std::string endpoint, std::chrono::milliseconds timeout,
                                               std::shared_ptr<HttpTransport> transport)
    : endpoint_(std::move(endpoint)),
      timeout_(timeout),
      transport_(transport ? std::move(transport) : default_transport()) {}

std::vector<double> HttpCrossEncoderScorer::score(const std::string& query,
                                                  std::span<const std::string> passages) {
    json body;
    body["query"] = query;
    body["passages"] = json::array();
    for (const auto& p : passages) body["passages"].push_back(p);

    const HttpResponse resp = transport_->post_json(endpoint_, body.dump(), {}, timeout_);
    if (!resp.transport_error.empty()) {
        throw ProviderError(fmt::format("re-ranker unreachable: {}", resp.transport_error), 0, true);
    }
    if (resp.status != 200) {
        throw ProviderError(fmt::format("re-ranker returned HTTP {}", resp.status), resp.status,
                            resp.status == 429 || resp.status >= 500);
    }
    json parsed;
    try {
        parsed = json::parse(resp.body);
    } catch (const json::parse_error&) {
        throw MalformedResponseError("re-ranker response is not JSON");
    }
    if (!parsed.contains("scores") || !parsed["scores"].is_array() || parsed["scores"].size() != passages.size()) {
        throw MalformedResponseError("re-ranker response must carry one score per passage");
    }
    std::vector<double> out;
    out.reserve(passages.size());
    for (const auto& s : parsed["scores"]) {
        if (!s.is_number()) throw MalformedResponseError("re-ranker score is not a number");
        const double v = s.get<double>();
        out.push_back(std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0));
    }
    return out;
}

std::vector<RerankScore> rerank(const std::string& query, std::span<const RerankCandidate> candidates,
                                PassageScorer& scorer) {
    if (candidates.empty()) throw ValidationError("rerank needs at least one candidate");
    std::vector<std::string> texts;
    texts.reserve(candidates.size());
    for (const auto& c : candidates) texts.push_back(c.text);
    const auto scores = scorer.score(query, texts);
    if (scores.size() != candidates.size()) {
        throw ValidationError("scorer returned the wrong number of scores");
    }
    std::vector<RerankScore> out;
    out.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double s = std::isnan(scores[i]) ? 0.0 : std::clamp(scores[i], 0.0, 1.0);
        out.push_back({candidates[i].hit.chunk_id, s, candidates[i].hit.rank});
    }
    std::stable_sort(out.begin(), out.end(), [](const RerankScore& a, const RerankScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.original_rank < b.original_rank;
    });
    return out;
}

std::vector<RerankScore> rerank(const std::string& query, std::span<const RerankCandidate> candidates) {
    LexicalOverlapScorer scorer;
    return rerank(query, candidates, scorer);
}

ChunkStore::ChunkStore(std::vector<GuidelineChunk> chunks) : chunks_(std::move(chunks)) {
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        if (!by_id_.emplace(chunks_[i].chunk_id, i).second) {
            throw ValidationError(fmt::format("duplicate chunk_id '{}'", chunks_[i].chunk_id));
        }
    }
}

const std::string& ChunkStore::text(const std::string& chunk_id) const {
    const auto it = by_id_.find(chunk_id);
    if (it == by_id_.end()) {
        throw ValidationError(fmt::format("chunk '{}' is in the index but not in the corpus", chunk_id));
    }
    return chunks_[it->second].text;
}

ContextBundle retrieve_for_query(const std::string& case_id, const std::string& query,
                                 const FlatIndex& index, const ChunkStore& chunks,
                                 Embedder& embedder, PassageScorer& scorer,
                                 const RetrievalParams& params) {
    if (index.empty()) throw ValidationError("retrieval against an empty index");
    if (params.k_retrieve == 0 || params.m_keep == 0) {
        throw ValidationError("k_retrieve and m_keep must be positive");
    }
    const EmbeddingVector query_vec = embedder.embed(query);
    const auto hits = index.search(query_vec, params.k_retrieve);

    std::vector<RerankCandidate> candidates;
    candidates.reserve(hits.size());
    for (const auto& h : hits) candidates.push_back({h, chunks.text(h.chunk_id)});
    const auto ranked = rerank(query, candidates, scorer);

    ContextBundle bundle;
    bundle.case_id = case_id;
    bool stopped = false;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& r = ranked[i];
        const auto& cand = candidates[r.original_rank - 1];
        TraceEntry entry{r.chunk_id, cand.hit.distance, r.score, i + 1, false};
        if (i < params.m_keep && !stopped) {
            const std::size_t len = text::utf8_length(cand.text);
            if (bundle.passages.empty() || bundle.total_chars + len <= params.char_budget) {
                bundle.passages.push_back({r.chunk_id, cand.text});
                bundle.total_chars += len;
                entry.included = true;
            } else {
                stopped = true;
            }
        }
        bundle.retrieval_trace.push_back(std::move(entry));
    }
    return bundle;
}

ContextBundle retrieve_context(const PatientCase& patient, const Condition& condition,
                               const FlatIndex& index, const ChunkStore& chunks,
                               Embedder& embedder, PassageScorer& scorer,
                               const RetrievalParams& params) {
    if (!condition.rag_enabled) {
        throw ValidationError("retrieve_context called for a condition without retrieval");
    }
    return retrieve_for_query(patient.case_id, build_query(patient, condition), index, chunks, embedder,
                              scorer, params);
}

}  // namespace ragbench
