#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ragbench/http.hpp"

namespace ragbench {

inline constexpr std::size_t kEmbeddingDim = 768;

/// Dense embedding of exactly kEmbeddingDim finite floats.
class EmbeddingVector {
public:
    /// Throws ValidationError on wrong length or non-finite entries.
    explicit EmbeddingVector(std::vector<float> values);

    std::span<const float> values() const noexcept { return values_; }
    const float* data() const noexcept { return values_.data(); }
    std::size_t size() const noexcept { return values_.size(); }
    float operator[](std::size_t i) const { return values_[i]; }

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<float> values_;
};

enum class EmbeddingProviderKind { http_service, deterministic_test };

struct EmbeddingProviderConfig {
    EmbeddingProviderKind kind = EmbeddingProviderKind::deterministic_test;
    std::optional<std::string> endpoint;
    std::optional<std::string> model_id;
    std::size_t batch_size = 32;
    std::chrono::milliseconds timeout{30000};

    void validate() const;
    /// Stable description used in index and run fingerprints.
    std::string fingerprint_text() const;
};

/// Hash-seeded unit vector; bitwise stable across runs and platforms.
EmbeddingVector deterministic_embed(std::string_view text);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) = 0;

    EmbeddingVector embed(const std::string& text);
};

class DeterministicEmbedder final : public Embedder {
public:
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;
};

/// Speaks the `{"model", "input"}` -> `{"data": [{"index", "embedding"}]}` protocol.
class HttpEmbedder final : public Embedder {
public:
    HttpEmbedder(EmbeddingProviderConfig config, std::shared_ptr<HttpTransport> transport);
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

private:
    std::vector<EmbeddingVector> embed_one_request(std::span<const std::string> texts);

    EmbeddingProviderConfig config_;
    std::shared_ptr<HttpTransport> transport_;
};

std::unique_ptr<Embedder> make_embedder(const EmbeddingProviderConfig& config,
                                        std::shared_ptr<HttpTransport> transport = nullptr);

/// Validates inputs, then dispatches to the configured provider.
std::vector<EmbeddingVector> embed_batch(const EmbeddingProviderConfig& config,
                                         std::span<const std::string> texts);

/// Throws ValidationError naming the first index whose text is blank.
void check_non_empty_texts(std::span<const std::string> texts);

}  // namespace ragbench
