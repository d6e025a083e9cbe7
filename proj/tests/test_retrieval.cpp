#include "local_server.hpp"

#include <doctest.h>

#include <algorithm>
#include <json.hpp>
#include <random>

#include "ragbench/errors.hpp"
#include "ragbench/pipeline.hpp"
#include "ragbench/retrieval.hpp"
#include "support.hpp"

using namespace ragbench;
using nlohmann::json;

namespace {

std::vector<RerankCandidate> candidates_of(const std::vector<std::string>& texts) {
    std::vector<RerankCandidate> out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        out.push_back({SearchHit{"p" + std::to_string(i + 1), static_cast<double>(i), i + 1}, texts[i]});
    }
    return out;
}

PatientCase sample_case() {
    PatientCase c;
    c.case_id = "c1";
    c.history = "Swollen wrists.";
    c.medications = "Ibuprofen.";
    c.labs = "Anti-CCP positive.";
    c.course = "Ultrasound synovitis.";
    c.pre_diagnosis = "Rheumatoid arthritis";
    c.gold_diagnoses = {"rheumatoid arthritis"};
    return c;
}

struct SmallCorpus {
    SmallCorpus(std::size_t n_docs, std::size_t chunk_size) {
        std::mt19937_64 rng(21);
        static const std::vector<std::string> words = {"methotrexate", "gout", "arthritis", "urate",
                                                       "colchicine", "lupus", "biopsy", "prednisolone"};
        for (std::size_t d = 0; d < n_docs; ++d) {
            std::string body;
            while (body.size() < 900) body += words[rng() % words.size()] + " ";
            docs.push_back({"doc" + std::to_string(d), "T", "t", body});
        }
        built = build_corpus_index(docs, {chunk_size, chunk_size / 5}, {}, embedder);
    }
    std::vector<GuidelineDoc> docs;
    DeterministicEmbedder embedder;
    CorpusIndex built;
};

}  // namespace

TEST_CASE("build_query includes the pre-diagnosis only when provided") {
    const auto c = sample_case();
    const Condition without{true, false};
    const Condition with{true, true};
    CHECK(build_query(c, without).find("Rheumatoid") == std::string::npos);
    CHECK(build_query(c, with).find("Rheumatoid arthritis") != std::string::npos);
    CHECK(build_query(c, with) == build_query(c, with));
    CHECK(build_query(c, without) == "Swollen wrists.\nIbuprofen.\nAnti-CCP positive.\nUltrasound synovitis.");
}

TEST_CASE("lexical rerank scores") {
    const std::string q = "methotrexate dosing rheumatoid arthritis";
    auto cands = candidates_of({"Methotrexate dosing in Rheumatoid Arthritis, weekly.",
                                "arthritis and methotrexate", "nothing relevant"});
    const auto ranked = rerank(q, cands);
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].chunk_id == "p1");
    CHECK(ranked[0].score == 1.0);
    CHECK(ranked[1].score == 0.5);
    CHECK(ranked[2].score == 0.0);
    CHECK(rerank("", cands)[0].score == 0.0);
    CHECK_THROWS_AS(rerank(q, std::vector<RerankCandidate>{}), ValidationError);
}

TEST_CASE("rerank ties keep the original rank order") {
    std::vector<RerankCandidate> cands = {
        {SearchHit{"late", 2.0, 3}, "gout"},
        {SearchHit{"early", 1.0, 1}, "gout"},
    };
    const auto ranked = rerank("gout", cands);
    CHECK(ranked[0].chunk_id == "early");
    CHECK(ranked[1].chunk_id == "late");
}

TEST_CASE("property: rerank is a permutation with scores in [0,1]") {
    std::mt19937_64 rng(22);
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g"};
    auto words = [&](std::size_t n) {
        std::string s;
        for (std::size_t i = 0; i < n; ++i) s += vocab[rng() % vocab.size()] + " ";
        return s;
    };
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::string> texts(1 + rng() % 12);
        for (auto& t : texts) t = words(rng() % 6);
        const auto cands = candidates_of(texts);
        const auto ranked = rerank(words(rng() % 5), cands);
        REQUIRE(ranked.size() == cands.size());
        std::vector<std::string> ids;
        for (const auto& r : ranked) {
            CHECK(r.score >= 0.0);
            CHECK(r.score <= 1.0);
            ids.push_back(r.chunk_id);
        }
        std::sort(ids.begin(), ids.end());
        std::vector<std::string> want;
        for (const auto& c : cands) want.push_back(c.hit.chunk_id);
        std::sort(want.begin(), want.end());
        CHECK(ids == want);
        for (std::size_t i = 1; i < ranked.size(); ++i) {
            CHECK((ranked[i - 1].score > ranked[i].score ||
                   (ranked[i - 1].score == ranked[i].score && ranked[i - 1].original_rank < ranked[i].original_rank)));
        }
    }
}

TEST_CASE("retrieve_context honours k_retrieve, m_keep and the trace contract") {
    SmallCorpus corpus(6, 200);
    LexicalOverlapScorer scorer;
    const auto c = sample_case();
    const auto bundle = retrieve_context(c, {true, false}, corpus.built.index, corpus.built.chunks,
                                         corpus.embedder, scorer, {8, 4, 100000});
    CHECK(bundle.case_id == "c1");
    CHECK(bundle.passages.size() == 4);
    REQUIRE(bundle.retrieval_trace.size() == 8);
    std::size_t included = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(bundle.retrieval_trace[i].final_rank == i + 1);
        if (bundle.retrieval_trace[i].included) ++included;
    }
    CHECK(included == 4);
    CHECK_THROWS_AS(retrieve_context(c, {false, false}, corpus.built.index, corpus.built.chunks, corpus.embedder,
                                     scorer, {}),
                    ValidationError);
}

TEST_CASE("the first passage is always included whole") {
    SmallCorpus corpus(3, 300);
    LexicalOverlapScorer scorer;
    const auto bundle = retrieve_context(sample_case(), {true, true}, corpus.built.index, corpus.built.chunks,
                                         corpus.embedder, scorer, {8, 4, 10});
    REQUIRE(bundle.passages.size() == 1);
    CHECK(bundle.total_chars > 10);
    CHECK(bundle.passages[0].text == corpus.built.chunks.text(bundle.passages[0].chunk_id));
}

TEST_CASE("property: packing stays within budget and bundles are deterministic") {
    SmallCorpus corpus(5, 150);
    LexicalOverlapScorer scorer;
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 60; ++trial) {
        RetrievalParams p;
        p.k_retrieve = 1 + rng() % 12;
        p.m_keep = 1 + rng() % p.k_retrieve;
        p.char_budget = 1 + rng() % 700;
        const std::string query = "gout urate query " + std::to_string(trial);
        const auto a = retrieve_for_query("q", query, corpus.built.index, corpus.built.chunks, corpus.embedder,
                                          scorer, p);
        const auto b = retrieve_for_query("q", query, corpus.built.index, corpus.built.chunks, corpus.embedder,
                                          scorer, p);
        CHECK(a == b);
        CHECK(a.passages.size() >= 1);
        CHECK(a.passages.size() <= p.m_keep);
        if (a.passages.size() > 1) CHECK(a.total_chars <= p.char_budget);
        CHECK(a.retrieval_trace.size() == std::min(p.k_retrieve, corpus.built.index.size()));
    }
}

TEST_CASE("http cross-encoder scorer wire shape and clamping") {
    testsupport::LocalServer srv;
    json seen;
    srv.server().Post("/rerank", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        res.set_content(R"({"scores": [1.7, -0.2, 0.25]})", "application/json");
    });
    HttpCrossEncoderScorer scorer(srv.url("/rerank"), std::chrono::milliseconds(5000));
    const auto ranked = rerank("q", candidates_of({"x", "y", "z"}), scorer);
    CHECK(seen["query"] == "q");
    CHECK(seen["passages"] == json::array({"x", "y", "z"}));
    CHECK(ranked[0].chunk_id == "p1");
    CHECK(ranked[0].score == 1.0);
    CHECK(ranked[1].score == 0.25);
    CHECK(ranked[2].score == 0.0);

    srv.server().Post("/short", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"scores": [0.5]})", "application/json");
    });
    HttpCrossEncoderScorer bad(srv.url("/short"), std::chrono::milliseconds(5000));
    CHECK_THROWS_AS(rerank("q", candidates_of({"x", "y"}), bad), MalformedResponseError);
}
