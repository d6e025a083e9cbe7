#pragma once

#include <vector>

#include "ragbench/corpus.hpp"
#include "ragbench/embedding.hpp"
#include "ragbench/hash.hpp"
#include "ragbench/retrieval.hpp"
#include "ragbench/vector_index.hpp"

namespace ragbench {

/// Hash of the documents, chunking parameters and embedding configuration.
/// Changes whenever any of them would change the index contents.
Digest corpus_fingerprint(const std::vector<GuidelineDoc>& docs, const ChunkingParams& chunking,
                          const EmbeddingProviderConfig& embedding);

std::vector<GuidelineChunk> chunk_corpus(const std::vector<GuidelineDoc>& docs, const ChunkingParams& chunking);

struct CorpusIndex {
    FlatIndex index;
    ChunkStore chunks;
};

/// Chunks every document, embeds the chunks in provider-sized batches and
/// loads them into a fingerprinted FlatIndex.
CorpusIndex build_corpus_index(const std::vector<GuidelineDoc>& docs, const ChunkingParams& chunking,
                               const EmbeddingProviderConfig& embedding, Embedder& embedder);

}  // namespace ragbench
