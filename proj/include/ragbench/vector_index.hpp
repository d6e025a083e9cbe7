#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ragbench/embedding.hpp"
#include "ragbench/hash.hpp"

namespace ragbench {

struct SearchHit {
    std::string chunk_id;
    double distance = 0.0;  // true L2 distance
    std::size_t rank = 0;   // 1-based

    bool operator==(const SearchHit&) const = default;
};

/// Exact brute-force L2 index. Entries keep insertion order, which is also the
/// tie-break order for equal distances.
class FlatIndex {
public:
    static constexpr std::uint32_t kFormatVersion = 1;

    explicit FlatIndex(std::size_t dim = kEmbeddingDim);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }

    const Digest& fingerprint() const noexcept { return fingerprint_; }
    void set_fingerprint(const Digest& fp) { fingerprint_ = fp; }

    /// Throws ValidationError on dimension mismatch or duplicate chunk_id.
    void add(const std::string& chunk_id, std::span<const float> vector);
    void add(const std::string& chunk_id, const EmbeddingVector& vector) {
        add(chunk_id, vector.values());
    }

    /// min(k, size()) hits in ascending distance. Throws on empty index,
    /// dimension mismatch, or k == 0.
    std::vector<SearchHit> search(std::span<const float> query, std::size_t k) const;
    std::vector<SearchHit> search(const EmbeddingVector& query, std::size_t k) const {
        return search(query.values(), k);
    }

    const std::string& id_at(std::size_t i) const { return ids_.at(i); }
    std::span<const float> vector_at(std::size_t i) const;
    bool contains(const std::string& chunk_id) const { return positions_.count(chunk_id) != 0; }

    /// Little-endian "RGIX" container with a trailing CRC32.
    void save(const std::filesystem::path& path) const;
    static FlatIndex load(const std::filesystem::path& path);

    std::vector<std::uint8_t> serialize() const;
    static FlatIndex deserialize(std::span<const std::uint8_t> bytes);

private:
    std::size_t dim_;
    Digest fingerprint_{};
    std::vector<std::string> ids_;
    std::vector<float> data_;
    std::unordered_map<std::string, std::size_t> positions_;
};

}  // namespace ragbench
