#include "local_server.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <json.hpp>
#include <random>
#include <set>

#include "ragbench/embedding.hpp"
#include "ragbench/errors.hpp"
#include "support.hpp"

using namespace ragbench;
using nlohmann::json;

namespace {

std::vector<std::uint32_t> bit_pattern(const EmbeddingVector& v) {
    std::vector<std::uint32_t> bits(v.size());
    std::memcpy(bits.data(), v.data(), v.size() * sizeof(float));
    return bits;
}

}  // namespace

TEST_CASE("EmbeddingVector enforces its invariants") {
    CHECK_THROWS_AS(EmbeddingVector(std::vector<float>(767, 0.0f)), ValidationError);
    std::vector<float> v(kEmbeddingDim, 0.0f);
    v[3] = std::nanf("");
    CHECK_THROWS_AS(EmbeddingVector{v}, ValidationError);
    v[3] = INFINITY;
    CHECK_THROWS_AS(EmbeddingVector{v}, ValidationError);
}

TEST_CASE("deterministic_embed is stable and unit length") {
    const auto a = deterministic_embed("arthritis");
    CHECK(a.size() == kEmbeddingDim);
    CHECK(bit_pattern(a) == bit_pattern(deterministic_embed("arthritis")));
    double norm = 0.0;
    for (float x : a.values()) norm += static_cast<double>(x) * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(deterministic_embed(""), ValidationError);
}

TEST_CASE("deterministic_embed pins its output across platforms") {
    // Bit patterns computed by an independent Python rendering of the same
    // FNV-1a / splitmix64 recipe; any drift in seeding or mapping shows up here.
    const auto bits = bit_pattern(deterministic_embed("x"));
    CHECK(bits[0] == 0x3b10334bu);
    CHECK(bits[1] == 0xbd7b057du);
    CHECK(bits[2] == 0x3d2e3d14u);
    CHECK(bits[3] == 0x3cf88214u);
    CHECK(bits[767] == 0x3cc8c2f4u);
}

TEST_CASE("deterministic_embed separates a 1000-word vocabulary") {
    std::set<std::vector<std::uint32_t>> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(bit_pattern(deterministic_embed("word" + std::to_string(i))));
    CHECK(seen.size() == 1000);
}

TEST_CASE("embed_batch contract with the test provider") {
    EmbeddingProviderConfig cfg;
    const std::vector<std::string> one = {"arthritis"};
    CHECK(embed_batch(cfg, one).size() == 1);
    const std::vector<std::string> twins = {"a", "a"};
    const auto out = embed_batch(cfg, twins);
    CHECK(out[0] == out[1]);
    const std::vector<std::string> blank = {"ok", "  "};
    try {
        embed_batch(cfg, blank);
        FAIL("expected error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("index 1") != std::string::npos);
    }

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::string> texts(std::uniform_int_distribution<int>(1, 40)(rng));
        for (auto& t : texts) t = "t" + std::to_string(rng() % 50);
        const auto vs = embed_batch(cfg, texts);
        REQUIRE(vs.size() == texts.size());
        for (std::size_t i = 0; i < texts.size(); ++i) CHECK(vs[i] == deterministic_embed(texts[i]));
    }
}

TEST_CASE("provider config validation") {
    EmbeddingProviderConfig cfg;
    cfg.kind = EmbeddingProviderKind::http_service;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.endpoint = "http://localhost:1/embed";
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.batch_size = 4;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("http embedder speaks the wire protocol and matches by index") {
    testsupport::LocalServer srv;
    std::vector<json> requests;
    srv.server().Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        requests.push_back(body);
        json data = json::array();
        // Reply in reverse order; the client must reorder by "index".
        for (std::size_t i = body["input"].size(); i-- > 0;) {
            const auto v = deterministic_embed(body["input"][i].get<std::string>());
            data.push_back({{"index", i}, {"embedding", std::vector<float>(v.values().begin(), v.values().end())}});
        }
        res.set_content(json{{"data", data}}.dump(), "application/json");
    });

    EmbeddingProviderConfig cfg;
    cfg.kind = EmbeddingProviderKind::http_service;
    cfg.endpoint = srv.url("/v1/embeddings");
    cfg.model_id = "sbert-768";
    cfg.batch_size = 2;
    const std::vector<std::string> texts = {"alpha", "beta", "gamma"};
    const auto out = make_embedder(cfg)->embed_batch(texts);
    REQUIRE(out.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == deterministic_embed(texts[i]));
    REQUIRE(requests.size() == 2);
    CHECK(requests[0]["model"] == "sbert-768");
    CHECK(requests[0]["input"] == json::array({"alpha", "beta"}));
    CHECK(requests[1]["input"] == json::array({"gamma"}));
}

TEST_CASE("http embedder rejects wrong dimensions and dead endpoints") {
    testsupport::LocalServer srv;
    srv.server().Post("/short", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"data", {{{"index", 0}, {"embedding", std::vector<float>(10, 0.5f)}}}}}.dump(),
                        "application/json");
    });
    srv.server().Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json", "text/plain");
    });
    EmbeddingProviderConfig cfg;
    cfg.kind = EmbeddingProviderKind::http_service;
    const std::vector<std::string> texts = {"alpha"};

    cfg.endpoint = srv.url("/short");
    CHECK_THROWS_WITH_AS(make_embedder(cfg)->embed_batch(texts), doctest::Contains("dimension 10"), ProviderError);
    cfg.endpoint = srv.url("/garbage");
    CHECK_THROWS_AS(make_embedder(cfg)->embed_batch(texts), MalformedResponseError);
    cfg.endpoint = srv.url("/absent");
    CHECK_THROWS_AS(make_embedder(cfg)->embed_batch(texts), ProviderError);
    cfg.endpoint = "http://127.0.0.1:1/unreachable";
    cfg.timeout = std::chrono::milliseconds(500);
    CHECK_THROWS_AS(make_embedder(cfg)->embed_batch(texts), ProviderError);
}
