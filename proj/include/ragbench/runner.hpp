#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragbench/condition.hpp"
#include "ragbench/corpus.hpp"
#include "ragbench/embedding.hpp"
#include "ragbench/extraction.hpp"
#include "ragbench/metrics.hpp"
#include "ragbench/model_gateway.hpp"
#include "ragbench/retrieval.hpp"
#include "ragbench/vector_index.hpp"

namespace ragbench {

struct Task {
    std::size_t ordinal = 0;
    std::size_t case_index = 0;
    std::size_t model_index = 0;
    Condition condition;
    int trial = 0;
};

/// Ordered case, then model, then condition, then trial. Throws
/// ValidationError naming the first case without a pre-diagnosis when a
/// planned condition needs one.
std::vector<Task> plan(const std::vector<PatientCase>& cases, const std::vector<ModelConfig>& models,
                       const std::vector<Condition>& conditions, int trials = 1);

/// Everything that determines the results of a run.
struct RunInputs {
    std::vector<PatientCase> cases;
    std::vector<ModelConfig> models;
    std::vector<Condition> conditions;
    int trials = 1;
    TemplateSet templates;
    SynonymTable synonyms;
    RetrievalParams retrieval;
    EmbeddingProviderConfig embedding;
    std::string index_fingerprint;  // hex; empty when no index is used
    std::string judge_id;

    /// SHA-256 hex over a canonical rendering of every field.
    std::string fingerprint() const;
};

/// Live collaborators. Non-owning pointers must outlive the run.
struct RunResources {
    const FlatIndex* index = nullptr;
    const ChunkStore* chunks = nullptr;
    Embedder* embedder = nullptr;
    PassageScorer* scorer = nullptr;
    JudgeBackend* judge = nullptr;
    std::map<std::string, std::shared_ptr<ChatBackend>> backends;  // by model name
};

/// Directory of `<key>.json` files. Concurrent reads, serialized writes.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<ModelAnswer> get(const std::string& key) const;
    void put(const std::string& key, const ModelAnswer& answer);

    static std::string key(const std::string& case_id, const std::string& model,
                           const Condition& condition, const std::string& prompt_hash, int trial);

private:
    std::filesystem::path dir_;
    std::mutex write_mutex_;
};

struct ExecuteOptions {
    /// Worker count; each worker has at most one provider call in flight.
    std::size_t parallelism = 4;
    ResponseCache* cache = nullptr;
    /// Stop scheduling after this many tasks (simulated interrupt).
    std::optional<std::size_t> stop_after;
    /// Invoked from worker threads, serialized, as each record completes.
    std::function<void(const ScoreRecord&)> on_record;
};

/// Runs one task end to end. Failures become error records; never throws.
ScoreRecord execute_task(const Task& task, const RunInputs& inputs, RunResources& resources,
                         ResponseCache* cache);

/// Records in task order. Tasks skipped by stop_after are absent.
std::vector<ScoreRecord> execute(const std::vector<Task>& tasks, const RunInputs& inputs,
                                 RunResources& resources, const ExecuteOptions& options);

struct RunManifest {
    std::string run_id;
    std::string template_version;
    std::vector<std::string> models;
    std::vector<std::string> conditions;
    std::vector<std::string> case_ids;
    RetrievalParams retrieval;
    std::string embedding;
    std::string judge_id;
    int trials = 1;
    std::string started;
    std::string finished;  // empty while incomplete
    std::string fingerprint;
    std::size_t planned_tasks = 0;
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
RunManifest read_manifest(const std::filesystem::path& path);

struct RunOutcome {
    RunManifest manifest;
    std::vector<ScoreRecord> records;  // all records for the run, task order
    std::size_t executed = 0;          // tasks run in this invocation
    bool complete = false;
};

/// Layout under `run_dir`: manifest.json, records.ndjson.
std::filesystem::path manifest_path(const std::filesystem::path& run_dir);
std::filesystem::path records_path(const std::filesystem::path& run_dir);

/// Fresh run: writes the manifest, streams records, then rewrites the records
/// file in task order once every task has finished.
RunOutcome run_experiment(const std::string& run_id, const std::filesystem::path& run_dir,
                          const RunInputs& inputs, RunResources& resources,
                          const ExecuteOptions& options);

/// Completes only the tasks that have no record yet. Throws ValidationError
/// "fingerprint mismatch" when the inputs differ from the original run.
RunOutcome resume_experiment(const std::filesystem::path& run_dir, const RunInputs& inputs,
                             RunResources& resources, const ExecuteOptions& options);

}  // namespace ragbench
