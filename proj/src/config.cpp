#include "ragbench/config.hpp"

#include <fstream>

#include <fmt/format.h>

#include "ragbench/errors.hpp"

namespace ragbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const json& j, const char* key, const fs::path& fallback = {}) {
    if (!j.contains(key) || j[key].is_null()) return fallback.empty() ? fallback : base / fallback;
    const fs::path p = j[key].get<std::string>();
    return p.is_absolute() ? p : base / p;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return j[key].get<T>();
}

}  // namespace

ModelConfig model_config_from_json(const json& j) {
    ModelConfig m;
    try {
        m.name = j.at("name").get<std::string>();
        m.endpoint = get_or<std::string>(j, "endpoint", "");
        m.model_id = get_or<std::string>(j, "model_id", m.name);
        m.temperature = get_or(j, "temperature", m.temperature);
        m.max_tokens = get_or(j, "max_tokens", m.max_tokens);
        m.timeout = std::chrono::milliseconds(get_or<std::int64_t>(j, "timeout_ms", m.timeout.count()));
        m.max_retries = get_or(j, "max_retries", m.max_retries);
        m.backoff_base = std::chrono::milliseconds(get_or<std::int64_t>(j, "backoff_ms", m.backoff_base.count()));
        if (j.contains("seed")) {
            m.seed = j["seed"].is_null() ? std::nullopt : std::optional<std::int64_t>(j["seed"].get<std::int64_t>());
        }
        m.class_label = parse_model_class(get_or<std::string>(j, "class", "SLM"));
        const std::string backend = get_or<std::string>(j, "backend", "chat_http");
        if (backend == "mock") m.backend = BackendKind::mock;
        else if (backend == "chat_http") m.backend = BackendKind::chat_http;
        else throw ValidationError(fmt::format("model {}: unknown backend '{}'", m.name, backend));
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("malformed model config: {}", e.what()));
    }
    return m;
}

EmbeddingProviderConfig embedding_config_from_json(const json& j) {
    EmbeddingProviderConfig e;
    const std::string kind = get_or<std::string>(j, "kind", "deterministic_test");
    if (kind == "deterministic_test") e.kind = EmbeddingProviderKind::deterministic_test;
    else if (kind == "http_service") e.kind = EmbeddingProviderKind::http_service;
    else throw ValidationError(fmt::format("unknown embedding provider kind '{}'", kind));
    if (j.contains("endpoint") && !j["endpoint"].is_null()) e.endpoint = j["endpoint"].get<std::string>();
    if (j.contains("model_id") && !j["model_id"].is_null()) e.model_id = j["model_id"].get<std::string>();
    e.batch_size = get_or<std::size_t>(j, "batch_size", e.batch_size);
    e.timeout = std::chrono::milliseconds(get_or<std::int64_t>(j, "timeout_ms", e.timeout.count()));
    e.validate();
    return e;
}

void HarnessConfig::validate() const {
    if (chunking.overlap >= chunking.chunk_size) throw ValidationError("chunking: overlap must be < chunk_size");
    if (retrieval.k_retrieve == 0 || retrieval.k_retrieve > 1000) {
        throw ValidationError("retrieval.k_retrieve must be within [1, 1000]");
    }
    if (retrieval.m_keep == 0 || retrieval.m_keep > retrieval.k_retrieve) {
        throw ValidationError("retrieval.m_keep must be within [1, k_retrieve]");
    }
    if (retrieval.char_budget == 0) throw ValidationError("retrieval.char_budget must be positive");
    if (parallelism == 0 || parallelism > 256) throw ValidationError("parallelism must be within [1, 256]");
    if (trials < 1 || trials > 100) throw ValidationError("trials must be within [1, 100]");
    embedding.validate();
    for (const auto& m : models) m.validate();
    if (judge == JudgeKind::chat && !judge_model) throw ValidationError("chat judge needs judge.model");
    if (reranker == RerankerKind::http && reranker_endpoint.empty()) {
        throw ValidationError("http re-ranker needs an endpoint");
    }
}

HarnessConfig config_from_json(const json& j, const fs::path& base) {
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    HarnessConfig c;
    try {
        c.corpus_dir = resolve(base, j, "corpus_dir");
        c.cases_file = resolve(base, j, "cases");
        c.synonyms_file = resolve(base, j, "synonyms");
        c.templates_file = resolve(base, j, "templates");
        c.out_dir = resolve(base, j, "out_dir", "out");
        c.index_file = resolve(base, j, "index");
        if (c.index_file.empty()) c.index_file = c.out_dir / "index.rgix";
        c.cache_dir = resolve(base, j, "cache_dir");
        if (c.cache_dir.empty()) c.cache_dir = c.out_dir / "cache";
        c.mock_script = resolve(base, j, "mock_script");

        if (j.contains("retrieval")) {
            const json& r = j["retrieval"];
            c.retrieval.k_retrieve = get_or(r, "k_retrieve", c.retrieval.k_retrieve);
            c.retrieval.m_keep = get_or(r, "m_keep", c.retrieval.m_keep);
            c.retrieval.char_budget = get_or(r, "char_budget", c.retrieval.char_budget);
            c.chunking.chunk_size = get_or(r, "chunk_size", c.chunking.chunk_size);
            c.chunking.overlap = get_or(r, "overlap", c.chunking.overlap);
        }
        if (j.contains("embedding")) c.embedding = embedding_config_from_json(j["embedding"]);
        if (j.contains("reranker")) {
            const json& r = j["reranker"];
            const std::string kind = get_or<std::string>(r, "kind", "lexical");
            if (kind == "lexical") c.reranker = RerankerKind::lexical;
            else if (kind == "http") c.reranker = RerankerKind::http;
            else throw ValidationError(fmt::format("unknown re-ranker kind '{}'", kind));
            c.reranker_endpoint = get_or<std::string>(r, "endpoint", "");
        }
        if (j.contains("models")) {
            for (const auto& m : j["models"]) c.models.push_back(model_config_from_json(m));
        }
        if (j.contains("judge")) {
            const json& jj = j["judge"];
            const std::string kind = get_or<std::string>(jj, "kind", "mock");
            if (kind == "mock") c.judge = JudgeKind::mock;
            else if (kind == "chat") c.judge = JudgeKind::chat;
            else throw ValidationError(fmt::format("unknown judge kind '{}'", kind));
            if (jj.contains("model")) c.judge_model = model_config_from_json(jj["model"]);
        }
        if (j.contains("conditions")) {
            std::string csv;
            for (const auto& t : j["conditions"]) csv += t.get<std::string>() + ",";
            c.conditions = parse_condition_list(csv);
        } else {
            c.conditions = parse_condition_list("all");
        }
        c.parallelism = get_or(j, "parallelism", c.parallelism);
        c.trials = get_or(j, "trials", c.trials);
        if (j.contains("report")) c.report = report_options_from_json(j["report"]);
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("malformed config: {}", e.what()));
    }
    return c;
}

HarnessConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read config {}", path.string()));
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("config {} is not valid JSON: {}", path.string(), e.what()));
    }
    return config_from_json(j, path.parent_path());
}

}  // namespace ragbench
