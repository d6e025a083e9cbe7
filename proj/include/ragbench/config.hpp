#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragbench/condition.hpp"
#include "ragbench/corpus.hpp"
#include "ragbench/embedding.hpp"
#include "ragbench/model_gateway.hpp"
#include "ragbench/report.hpp"
#include "ragbench/retrieval.hpp"

namespace ragbench {

enum class JudgeKind { mock, chat };
enum class RerankerKind { lexical, http };

struct HarnessConfig {
    std::filesystem::path corpus_dir;
    std::filesystem::path cases_file;
    std::filesystem::path synonyms_file;
    std::filesystem::path templates_file;
    std::filesystem::path index_file;
    std::filesystem::path out_dir = "out";
    std::filesystem::path cache_dir;
    std::filesystem::path mock_script;

    ChunkingParams chunking;
    RetrievalParams retrieval;
    EmbeddingProviderConfig embedding;
    RerankerKind reranker = RerankerKind::lexical;
    std::string reranker_endpoint;

    std::vector<ModelConfig> models;
    JudgeKind judge = JudgeKind::mock;
    std::optional<ModelConfig> judge_model;
    std::vector<Condition> conditions;

    std::size_t parallelism = 4;
    int trials = 1;
    ReportOptions report;

    /// Checks numeric ranges; paths are checked by the commands that use them.
    void validate() const;
};

/// Relative paths are resolved against `base_dir`.
HarnessConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
HarnessConfig load_config(const std::filesystem::path& path);

ModelConfig model_config_from_json(const nlohmann::json& j);
EmbeddingProviderConfig embedding_config_from_json(const nlohmann::json& j);

}  // namespace ragbench
