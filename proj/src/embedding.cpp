#include "ragbench/embedding.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>
#include <json.hpp>

#include "ragbench/errors.hpp"
#include "ragbench/hash.hpp"
#include "ragbench/text.hpp"

namespace ragbench {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {
    if (values_.size() != kEmbeddingDim) {
        throw ValidationError(fmt::format("embedding has dimension {}, expected {}", values_.size(), kEmbeddingDim));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw ValidationError(fmt::format("embedding entry {} is not finite", i));
        }
    }
}

void EmbeddingProviderConfig::validate() const {
    if (batch_size == 0) throw ValidationError("embedding batch_size must be >= 1");
    if (kind == EmbeddingProviderKind::http_service && (!endpoint || endpoint->empty())) {
        throw ValidationError("http_service embedding provider requires an endpoint");
    }
}

std::string EmbeddingProviderConfig::fingerprint_text() const {
    if (kind == EmbeddingProviderKind::deterministic_test) {
        return fmt::format("deterministic_test/dim={}", kEmbeddingDim);
    }
    return fmt::format("http_service/model={}/dim={}", model_id.value_or(""), kEmbeddingDim);
}

EmbeddingVector deterministic_embed(std::string_view text) {
    if (text::trim(text).empty()) throw ValidationError("cannot embed empty text");
    const std::uint64_t seed = fnv1a64(text);
    std::vector<double> raw(kEmbeddingDim);
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < kEmbeddingDim; ++i) {
        const std::uint64_t bits = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i)));
        // Top 53 bits -> [0, 1) -> [-1, 1).
        const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
        raw[i] = 2.0 * u - 1.0;
        norm_sq += raw[i] * raw[i];
    }
    const double norm = std::sqrt(norm_sq);
    std::vector<float> values(kEmbeddingDim);
    for (std::size_t i = 0; i < kEmbeddingDim; ++i) {
        values[i] = static_cast<float>(raw[i] / norm);
    }
    return EmbeddingVector(std::move(values));
}

EmbeddingVector Embedder::embed(const std::string& text) {
    auto out = embed_batch(std::span<const std::string>(&text, 1));
    return std::move(out.front());
}

std::vector<EmbeddingVector> DeterministicEmbedder::embed_batch(std::span<const std::string> texts) {
    check_non_empty_texts(texts);
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(deterministic_embed(t));
    return out;
}

HttpEmbedder::HttpEmbedder(EmbeddingProviderConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(transport ? std::move(transport) : default_transport()) {
    config_.validate();
}

std::vector<EmbeddingVector> HttpEmbedder::embed_batch(std::span<const std::string> texts) {
    check_non_empty_texts(texts);
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += config_.batch_size) {
        const std::size_t n = std::min(config_.batch_size, texts.size() - start);
        auto part = embed_one_request(texts.subspan(start, n));
        for (auto& v : part) out.push_back(std::move(v));
    }
    return out;
}

std::vector<EmbeddingVector> HttpEmbedder::embed_one_request(std::span<const std::string> texts) {
    json body;
    body["model"] = config_.model_id.value_or("");
    body["input"] = json::array();
    for (const auto& t : texts) body["input"].push_back(t);

    HttpHeaders headers;
    if (const char* key = std::getenv("EMBEDDING_API_KEY")) {
        headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
    const HttpResponse resp = transport_->post_json(*config_.endpoint, body.dump(), headers, config_.timeout);
    if (!resp.transport_error.empty()) {
        throw ProviderError(fmt::format("embedding provider unreachable: {}", resp.transport_error), 0, true);
    }
    if (resp.status == 401 || resp.status == 403) {
        throw AuthError(fmt::format("embedding provider rejected credentials (HTTP {})", resp.status), resp.status);
    }
    if (resp.status != 200) {
        throw ProviderError(fmt::format("embedding provider returned HTTP {}", resp.status), resp.status,
                            resp.status == 429 || resp.status >= 500);
    }

    json parsed;
    try {
        parsed = json::parse(resp.body);
    } catch (const json::parse_error&) {
        throw MalformedResponseError("embedding response is not JSON");
    }
    if (!parsed.contains("data") || !parsed["data"].is_array()) {
        throw MalformedResponseError("embedding response lacks a 'data' array");
    }
    std::vector<std::optional<EmbeddingVector>> slots(texts.size());
    for (const auto& item : parsed["data"]) {
        if (!item.contains("index") || !item["index"].is_number_integer() || !item.contains("embedding") ||
            !item["embedding"].is_array()) {
            throw MalformedResponseError("embedding item lacks 'index' or 'embedding'");
        }
        const auto idx = item["index"].get<std::int64_t>();
        if (idx < 0 || static_cast<std::size_t>(idx) >= texts.size()) {
            throw MalformedResponseError(fmt::format("embedding index {} out of range", idx));
        }
        if (slots[idx]) throw MalformedResponseError(fmt::format("embedding index {} repeated", idx));
        std::vector<float> values;
        values.reserve(item["embedding"].size());
        for (const auto& x : item["embedding"]) {
            if (!x.is_number()) throw MalformedResponseError("embedding contains a non-number");
            values.push_back(x.get<float>());
        }
        if (values.size() != kEmbeddingDim) {
            throw ProviderError(fmt::format("embedding provider returned dimension {}, expected {}", values.size(),
                                            kEmbeddingDim),
                                resp.status, false);
        }
        slots[idx] = EmbeddingVector(std::move(values));
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i]) throw MalformedResponseError(fmt::format("embedding response missing index {}", i));
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbeddingProviderConfig& config,
                                        std::shared_ptr<HttpTransport> transport) {
    config.validate();
    if (config.kind == EmbeddingProviderKind::deterministic_test) {
        return std::make_unique<DeterministicEmbedder>();
    }
    return std::make_unique<HttpEmbedder>(config, std::move(transport));
}

std::vector<EmbeddingVector> embed_batch(const EmbeddingProviderConfig& config,
                                         std::span<const std::string> texts) {
    check_non_empty_texts(texts);
    return make_embedder(config)->embed_batch(texts);
}

void check_non_empty_texts(std::span<const std::string> texts) {
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (text::trim(texts[i]).empty()) {
            throw ValidationError(fmt::format("text at index {} is empty", i));
        }
    }
}

}  // namespace ragbench
