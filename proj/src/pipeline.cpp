#include "ragbench/pipeline.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace ragbench {

Digest corpus_fingerprint(const std::vector<GuidelineDoc>& docs, const ChunkingParams& chunking,
                          const EmbeddingProviderConfig& embedding) {
    Sha256 h;
    h.add_field(fmt::format("chunk_size={};overlap={}", chunking.chunk_size, chunking.overlap));
    h.add_field(embedding.fingerprint_text());
    for (const auto& d : docs) h.add_field(d.doc_id).add_field(d.body);
    return h.finish();
}

std::vector<GuidelineChunk> chunk_corpus(const std::vector<GuidelineDoc>& docs, const ChunkingParams& chunking) {
    std::vector<GuidelineChunk> all;
    for (const auto& d : docs) {
        for (auto& c : chunk_document(d, chunking)) all.push_back(std::move(c));
    }
    return all;
}

CorpusIndex build_corpus_index(const std::vector<GuidelineDoc>& docs, const ChunkingParams& chunking,
                               const EmbeddingProviderConfig& embedding, Embedder& embedder) {
    auto chunks = chunk_corpus(docs, chunking);
    // Whitespace-only windows cannot be embedded; they stay out of the index.
    std::vector<const GuidelineChunk*> indexable;
    std::vector<std::string> texts;
    for (const auto& c : chunks) {
        if (c.text.find_first_not_of(" \t\r\n\f\v") == std::string::npos) continue;
        indexable.push_back(&c);
        texts.push_back(c.text);
    }

    FlatIndex index;
    const std::size_t batch = std::max<std::size_t>(1, embedding.batch_size);
    for (std::size_t start = 0; start < texts.size(); start += batch) {
        const std::size_t n = std::min(batch, texts.size() - start);
        const auto vectors = embedder.embed_batch(std::span<const std::string>(texts).subspan(start, n));
        for (std::size_t i = 0; i < n; ++i) index.add(indexable[start + i]->chunk_id, vectors[i]);
    }
    index.set_fingerprint(corpus_fingerprint(docs, chunking, embedding));
    return {std::move(index), ChunkStore(std::move(chunks))};
}

}  // namespace ragbench
