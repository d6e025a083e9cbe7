#include "ragbench/vector_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "ragbench/errors.hpp"
#include "ragbench/kernels.hpp"

namespace ragbench {

namespace {

constexpr char kMagic[4] = {'R', 'G', 'I', 'X'};

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    template <typename T>
    void le(T value) {
        static_assert(std::is_integral_v<T>);
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            out_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i)));
        }
    }
    void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
    std::vector<std::uint8_t>& buffer() { return out_; }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::span<const std::uint8_t> take(std::size_t n) {
        if (in_.size() - pos_ < n) throw IndexFormatError("truncated");
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    template <typename T>
    T le() {
        auto s = take(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(s[i]) << (8 * i);
        return static_cast<T>(v);
    }
    float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

}  // namespace

FlatIndex::FlatIndex(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw ValidationError("index dimension must be positive");
}

void FlatIndex::add(const std::string& chunk_id, std::span<const float> vector) {
    if (vector.size() != dim_) {
        throw ValidationError(fmt::format("dimension mismatch: vector has {}, index expects {}", vector.size(), dim_));
    }
    if (chunk_id.size() > 0xFFFF) throw ValidationError("chunk_id longer than 65535 bytes");
    if (positions_.count(chunk_id) != 0) {
        throw ValidationError(fmt::format("duplicate chunk_id '{}'", chunk_id));
    }
    positions_.emplace(chunk_id, ids_.size());
    ids_.push_back(chunk_id);
    data_.insert(data_.end(), vector.begin(), vector.end());
}

std::span<const float> FlatIndex::vector_at(std::size_t i) const {
    if (i >= ids_.size()) throw ValidationError("index entry out of range");
    return std::span<const float>(data_).subspan(i * dim_, dim_);
}

std::vector<SearchHit> FlatIndex::search(std::span<const float> query, std::size_t k) const {
    if (empty()) throw ValidationError("search on an empty index");
    if (query.size() != dim_) {
        throw ValidationError(fmt::format("dimension mismatch: query has {}, index expects {}", query.size(), dim_));
    }
    if (k == 0) throw ValidationError("k must be positive");

    std::vector<float> distances(size());
    kernels::l2_squared_batch(query, data_, distances);

    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t take = std::min(k, size());
    // Squared distance orders the same as distance; index breaks ties.
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (distances[a] != distances[b]) return distances[a] < distances[b];
                          return a < b;
                      });

    std::vector<SearchHit> hits;
    hits.reserve(take);
    for (std::size_t r = 0; r < take; ++r) {
        const std::size_t i = order[r];
        hits.push_back({ids_[i], std::sqrt(static_cast<double>(std::max(distances[i], 0.0f))), r + 1});
    }
    return hits;
}

std::vector<std::uint8_t> FlatIndex::serialize() const {
    Writer w;
    w.bytes(kMagic, 4);
    w.le<std::uint32_t>(kFormatVersion);
    w.le<std::uint32_t>(static_cast<std::uint32_t>(dim_));
    w.le<std::uint64_t>(ids_.size());
    w.bytes(fingerprint_.data(), fingerprint_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        w.le<std::uint16_t>(static_cast<std::uint16_t>(ids_[i].size()));
        w.bytes(ids_[i].data(), ids_[i].size());
        for (float v : vector_at(i)) w.f32(v);
    }
    const std::uint32_t crc = crc32(w.buffer());
    w.le<std::uint32_t>(crc);
    return std::move(w.buffer());
}

FlatIndex FlatIndex::deserialize(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const auto magic = r.take(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw IndexFormatError("bad magic");
    const auto version = r.le<std::uint32_t>();
    if (version != kFormatVersion) {
        throw IndexFormatError(fmt::format("unsupported version {}", version));
    }
    const auto dim = r.le<std::uint32_t>();
    if (dim == 0 || dim > 65536) {
        throw IndexFormatError(fmt::format("unsupported dimension {}", dim));
    }
    const auto count = r.le<std::uint64_t>();
    Digest fp{};
    const auto fp_bytes = r.take(fp.size());
    std::copy(fp_bytes.begin(), fp_bytes.end(), fp.begin());

    // Each entry needs at least a length prefix plus the vector.
    const std::size_t min_entry = 2 + std::size_t{dim} * 4;
    if (count > r.remaining() / min_entry) throw IndexFormatError("truncated");

    FlatIndex index(dim);
    index.fingerprint_ = fp;
    std::vector<float> vec(dim);
    for (std::uint64_t e = 0; e < count; ++e) {
        const auto id_len = r.le<std::uint16_t>();
        const auto id_bytes = r.take(id_len);
        std::string id(reinterpret_cast<const char*>(id_bytes.data()), id_bytes.size());
        for (auto& v : vec) v = r.f32();
        if (index.contains(id)) throw IndexFormatError(fmt::format("duplicate chunk_id '{}' in file", id));
        index.add(id, vec);
    }
    const std::size_t body_len = r.position();
    const auto stored_crc = r.le<std::uint32_t>();
    if (r.remaining() != 0) throw IndexFormatError("trailing bytes after checksum");
    if (crc32(bytes.first(body_len)) != stored_crc) throw IndexFormatError("checksum mismatch");
    return index;
}

void FlatIndex::save(const std::filesystem::path& path) const {
    const auto bytes = serialize();
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot write {}", tmp.string()));
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError(fmt::format("write failed: {}", tmp.string()));
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError(fmt::format("cannot move index into place at {}: {}", path.string(), ec.message()));
}

FlatIndex FlatIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read index file {}", path.string()));
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace ragbench
