#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ragbench/errors.hpp"
#include "ragbench/vector_index.hpp"
#include "support.hpp"

using namespace ragbench;

namespace {

std::vector<float> axis(std::size_t i, std::size_t dim = kEmbeddingDim) {
    std::vector<float> v(dim, 0.0f);
    v[i] = 1.0f;
    return v;
}

FlatIndex random_index(std::mt19937_64& rng, std::size_t n, std::size_t dim = kEmbeddingDim) {
    FlatIndex idx(dim);
    for (std::size_t i = 0; i < n; ++i) idx.add("c" + std::to_string(i), testsupport::random_vector(rng, dim));
    return idx;
}

// Brute-force reference: full sort by (double distance, insertion order).
std::vector<std::pair<std::size_t, double>> oracle(const FlatIndex& idx, const std::vector<float>& q, std::size_t k) {
    std::vector<std::pair<std::size_t, double>> all;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto v = idx.vector_at(i);
        double s = 0.0;
        for (std::size_t d = 0; d < q.size(); ++d) {
            const double diff = static_cast<double>(v[d]) - q[d];
            s += diff * diff;
        }
        all.emplace_back(i, std::sqrt(s));
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    all.resize(std::min(k, all.size()));
    return all;
}

}  // namespace

TEST_CASE("add enforces dimension and uniqueness") {
    FlatIndex idx;
    idx.add("a", axis(0));
    CHECK(idx.size() == 1);
    CHECK_THROWS_AS(idx.add("b", std::vector<float>(767, 0.0f)), ValidationError);
    CHECK_THROWS_AS(idx.add("a", axis(1)), ValidationError);
    CHECK(idx.size() == 1);
}

TEST_CASE("search on orthonormal axes") {
    FlatIndex idx;
    idx.add("e1", axis(0));
    idx.add("e2", axis(1));
    idx.add("e3", axis(2));
    const auto hits = idx.search(axis(0), 2);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0] == SearchHit{"e1", 0.0, 1});
    CHECK(hits[1].chunk_id == "e2");  // e2 and e3 tie at sqrt(2); insertion order decides
    CHECK(hits[1].distance == doctest::Approx(std::sqrt(2.0)));
    CHECK(hits[1].rank == 2);
}

TEST_CASE("search preconditions and k clamping") {
    FlatIndex empty;
    CHECK_THROWS_AS(empty.search(axis(0), 3), ValidationError);
    std::mt19937_64 rng(1);
    const auto idx = random_index(rng, 5);
    CHECK(idx.search(axis(0), 100).size() == 5);
    CHECK_THROWS_AS(idx.search(std::vector<float>(10, 0.0f), 3), ValidationError);
    CHECK_THROWS_AS(idx.search(axis(0), 0), ValidationError);
}

TEST_CASE("property: search equals the brute-force oracle, ranks are dense, distances monotone") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t dim = 1 + rng() % 64;
        const std::size_t n = 1 + rng() % 200;
        const std::size_t k = 1 + rng() % 20;
        auto idx = random_index(rng, n, dim);
        // Duplicate a vector now and then to exercise the tie rule.
        if (trial % 3 == 0) {
            const auto v = idx.vector_at(0);
            idx.add("dup", std::vector<float>(v.begin(), v.end()));
        }
        const auto q = testsupport::random_vector(rng, dim);
        const auto hits = idx.search(q, k);
        const auto want = oracle(idx, q, k);
        REQUIRE(hits.size() == want.size());
        for (std::size_t r = 0; r < hits.size(); ++r) {
            CHECK(hits[r].chunk_id == idx.id_at(want[r].first));
            CHECK(hits[r].rank == r + 1);
            CHECK(hits[r].distance == doctest::Approx(want[r].second).epsilon(1e-5));
            if (r > 0) CHECK(hits[r].distance >= hits[r - 1].distance);
        }
    }
}

TEST_CASE("property: every stored vector retrieves itself first") {
    std::mt19937_64 rng(3);
    const auto idx = random_index(rng, 100);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto v = idx.vector_at(i);
        const auto hits = idx.search(v, 1);
        CHECK(hits[0].chunk_id == idx.id_at(i));
        CHECK(hits[0].distance == 0.0);
    }
}

TEST_CASE("save/load roundtrip preserves every search result") {
    std::mt19937_64 rng(4);
    auto idx = random_index(rng, 100);
    Digest fp{};
    fp[0] = 0xAB;
    fp[31] = 0xCD;
    idx.set_fingerprint(fp);
    testsupport::TempDir dir;
    idx.save(dir / "x.rgix");
    const auto loaded = FlatIndex::load(dir / "x.rgix");
    CHECK(loaded.size() == idx.size());
    CHECK(loaded.fingerprint() == fp);
    for (int q = 0; q < 20; ++q) {
        const auto query = testsupport::random_vector(rng, kEmbeddingDim);
        CHECK(loaded.search(query, 10) == idx.search(query, 10));
    }
    CHECK(loaded.serialize() == idx.serialize());
}

TEST_CASE("file layout is little-endian RGIX with a trailing CRC32") {
    FlatIndex idx(2);
    idx.add("ab", std::vector<float>{1.0f, -2.0f});
    const auto bytes = idx.serialize();
    // magic 4 + version 4 + dim 4 + count 8 + fingerprint 32 + (2 + 2 + 2*4) + crc 4
    REQUIRE(bytes.size() == 4 + 4 + 4 + 8 + 32 + 12 + 4);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "RGIX");
    CHECK(bytes[4] == 1);
    CHECK(bytes[8] == 2);
    CHECK(bytes[12] == 1);
    CHECK(bytes[52] == 2);
    CHECK(bytes[53] == 0);
    CHECK(bytes[54] == 'a');
    // 1.0f = 0x3F800000 little-endian
    CHECK(bytes[56] == 0x00);
    CHECK(bytes[59] == 0x3F);
    const std::uint32_t crc = crc32(std::span<const std::uint8_t>(bytes.data(), bytes.size() - 4));
    CHECK(bytes[bytes.size() - 4] == (crc & 0xFF));
    CHECK(bytes[bytes.size() - 1] == (crc >> 24));
}

TEST_CASE("corrupted files fail with specific errors") {
    std::mt19937_64 rng(5);
    const auto idx = random_index(rng, 10);
    const auto good = idx.serialize();
    auto expect = [](std::vector<std::uint8_t> bytes, const std::string& msg) {
        CHECK_THROWS_WITH_AS(FlatIndex::deserialize(bytes), doctest::Contains(msg.c_str()), IndexFormatError);
    };
    auto bad_magic = good;
    bad_magic[0] = 'X';
    expect(bad_magic, "bad magic");
    auto bad_version = good;
    bad_version[4] = 9;
    expect(bad_version, "unsupported version");
    expect(std::vector<std::uint8_t>(good.begin(), good.begin() + good.size() / 2), "truncated");
    expect(std::vector<std::uint8_t>(good.begin(), good.begin() + 10), "truncated");
    auto flipped = good;
    flipped[good.size() / 2] ^= 0x01;
    expect(flipped, "checksum mismatch");
    auto extra = good;
    extra.push_back(0);
    expect(extra, "trailing bytes");
    testsupport::TempDir dir;
    CHECK_THROWS_AS(FlatIndex::load(dir / "missing.rgix"), IoError);
}
