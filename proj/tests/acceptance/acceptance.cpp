// Acceptance checks. Prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any fails. Every oracle here is written independently of the
// library code it checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "../cells_fixture.hpp"
#include "../fixture_run.hpp"
#include "../scripted_transport.hpp"
#include "../support.hpp"
#include "ragbench/errors.hpp"
#include "ragbench/metrics.hpp"
#include "ragbench/records.hpp"
#include "ragbench/report.hpp"
#include "ragbench/vector_index.hpp"

using namespace ragbench;
using Clock = std::chrono::steady_clock;

namespace {

struct Failure {
    std::string what;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failure{what};
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Brute-force nearest neighbours in double precision; ties by insertion order.
struct OracleHit {
    std::size_t index;
    double distance;
};

std::vector<OracleHit> brute_force(const std::vector<std::vector<float>>& data, const std::vector<float>& q,
                                   std::size_t k) {
    std::vector<OracleHit> all;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double sum = 0.0;
        for (std::size_t d = 0; d < q.size(); ++d) {
            const double diff = static_cast<double>(data[i][d]) - static_cast<double>(q[d]);
            sum += diff * diff;
        }
        all.push_back({i, std::sqrt(sum)});
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const OracleHit& a, const OracleHit& b) { return a.distance < b.distance; });
    all.resize(std::min(k, all.size()));
    return all;
}

bool close_relative(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(b), 1e-12);
}

void check_hits(const std::vector<SearchHit>& hits, const std::vector<OracleHit>& oracle,
                const std::vector<std::string>& ids, const std::string& label) {
    expect(hits.size() == oracle.size(), label + ": hit count");
    for (std::size_t r = 0; r < hits.size(); ++r) {
        expect(hits[r].chunk_id == ids[oracle[r].index], label + ": id at rank " + std::to_string(r + 1));
        expect(hits[r].rank == r + 1, label + ": rank numbering");
        expect(close_relative(hits[r].distance, oracle[r].distance, 1e-6), label + ": distance");
    }
}

void knn_oracle() {
    std::mt19937_64 rng(1001);
    std::vector<std::vector<float>> data;
    std::vector<std::string> ids;
    FlatIndex index(768);
    for (int i = 0; i < 1000; ++i) {
        data.push_back(testsupport::random_vector(rng, 768));
        ids.push_back("v" + std::to_string(i));
        index.add(ids.back(), data.back());
    }
    const auto t0 = Clock::now();
    for (int q = 0; q < 50; ++q) {
        const auto query = testsupport::random_vector(rng, 768);
        check_hits(index.search(query, 10), brute_force(data, query, 10), ids, "query " + std::to_string(q));
    }
    const double elapsed = seconds_since(t0);
    expect(elapsed < 5.0, "took " + std::to_string(elapsed) + " s");
}

// Direct formula on sorted vectors.
PRF prf_oracle(std::vector<std::string> pred, std::vector<std::string> gold) {
    std::sort(pred.begin(), pred.end());
    pred.erase(std::unique(pred.begin(), pred.end()), pred.end());
    std::sort(gold.begin(), gold.end());
    gold.erase(std::unique(gold.begin(), gold.end()), gold.end());
    std::vector<std::string> both;
    std::set_intersection(pred.begin(), pred.end(), gold.begin(), gold.end(), std::back_inserter(both));
    const double tp = static_cast<double>(both.size());
    PRF out;
    if (!pred.empty()) out.precision = tp / static_cast<double>(pred.size());
    if (!gold.empty()) out.recall = tp / static_cast<double>(gold.size());
    if (out.precision + out.recall > 0.0) out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

void f1_oracle() {
    std::mt19937_64 rng(2002);
    const std::vector<std::string> vocab = {"gout", "rheumatoid arthritis", "sle", "psoriatic arthritis",
                                            "methotrexate", "colchicine", "allopurinol", "prednisolone",
                                            "hydroxychloroquine", "gca", "pmr", "ankylosing spondylitis"};
    auto draw = [&](std::size_t max_size) {
        std::vector<std::string> v;
        const std::size_t n = rng() % (max_size + 1);
        for (std::size_t i = 0; i < n; ++i) v.push_back(vocab[rng() % vocab.size()]);
        return v;
    };
    int empty_pred = 0;
    int both_empty = 0;
    for (int i = 0; i < 10000; ++i) {
        auto pred = draw(6);
        auto gold = draw(5);
        if (i % 50 == 0) pred.clear();
        if (i % 500 == 0) gold.clear();
        empty_pred += pred.empty() ? 1 : 0;
        both_empty += pred.empty() && gold.empty() ? 1 : 0;
        TermSet p, g;
        for (const auto& t : pred) p.insert(t);
        for (const auto& t : gold) g.insert(t);
        const PRF got = prf(p, g);
        const PRF want = prf_oracle(pred, gold);
        expect(got == want, "pair " + std::to_string(i));
    }
    expect(empty_pred > 0 && both_empty > 0, "edge cases not exercised");
    expect(prf(TermSet{}, TermSet{"gout"}) == PRF{0.0, 0.0, 0.0}, "empty prediction rule");
    expect(prf(TermSet{}, TermSet{}) == PRF{0.0, 0.0, 0.0}, "both empty rule");
}

std::size_t count_code_points(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80 ? 1 : 0;
    return n;
}

// Drops the first n code points.
std::string drop_code_points(const std::string& s, std::size_t n) {
    std::size_t i = 0;
    while (n > 0 && i < s.size()) {
        ++i;
        while (i < s.size() && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80) ++i;
        --n;
    }
    return s.substr(i);
}

void chunker_property() {
    std::mt19937_64 rng(3003);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t chunk_size = 1 + rng() % 300;
        const std::size_t overlap = rng() % chunk_size;
        const std::size_t length = 1 + rng() % 2000;
        GuidelineDoc doc;
        doc.doc_id = "doc";
        doc.body = testsupport::random_text(rng, length);
        const auto chunks = chunk_document(doc, chunk_size, overlap);

        std::string rebuilt;
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            expect(count_code_points(chunks[i].text) <= chunk_size, "chunk too long");
            rebuilt += i == 0 ? chunks[i].text : drop_code_points(chunks[i].text, overlap);
        }
        const std::string label = "L=" + std::to_string(length) + " c=" + std::to_string(chunk_size) +
                                  " o=" + std::to_string(overlap);
        expect(rebuilt == doc.body, label + ": reconstruction");
        const std::size_t stride = chunk_size - overlap;
        const std::size_t expected = length <= overlap ? 1 : std::max<std::size_t>(1, (length - overlap + stride - 1) / stride);
        expect(chunks.size() == expected, label + ": count " + std::to_string(chunks.size()));
    }
}

template <typename Fn>
void expect_index_error(Fn&& fn, const std::string& message) {
    try {
        fn();
    } catch (const IndexFormatError& e) {
        expect(std::string(e.what()).find(message) != std::string::npos,
               "expected '" + message + "', got '" + e.what() + "'");
        return;
    }
    throw Failure{"no error for '" + message + "'"};
}

void persistence() {
    std::mt19937_64 rng(4004);
    FlatIndex index(768);
    for (int i = 0; i < 500; ++i) index.add("chunk-" + std::to_string(i), testsupport::random_vector(rng, 768));
    Digest fp{};
    fp[0] = 0xAB;
    index.set_fingerprint(fp);
    testsupport::TempDir dir;
    const auto path = dir / "index.rgix";
    index.save(path);
    const FlatIndex loaded = FlatIndex::load(path);
    expect(loaded.size() == 500 && loaded.fingerprint() == fp, "metadata");
    for (int q = 0; q < 20; ++q) {
        const auto query = testsupport::random_vector(rng, 768);
        expect(index.search(query, 10) == loaded.search(query, 10), "query " + std::to_string(q));
    }

    const std::string bytes = testsupport::read_file(path);
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    testsupport::write_file(dir / "magic.rgix", bad_magic);
    expect_index_error([&] { FlatIndex::load(dir / "magic.rgix"); }, "bad magic");

    // Cut inside the vector of the third entry.
    const std::size_t entry = 2 + 7 + 768 * 4;
    testsupport::write_file(dir / "short.rgix", bytes.substr(0, 52 + 2 * entry + 100));
    expect_index_error([&] { FlatIndex::load(dir / "short.rgix"); }, "truncated");

    std::string flipped = bytes;
    flipped[52 + 2 + 7 + 10] ^= 0x01;
    testsupport::write_file(dir / "crc.rgix", flipped);
    expect_index_error([&] { FlatIndex::load(dir / "crc.rgix"); }, "checksum mismatch");
}

void deterministic_e2e() {
    const auto t0 = Clock::now();
    testsupport::TempDir dir;
    std::vector<std::string> files;
    for (int run = 0; run < 2; ++run) {
        testsupport::FixtureRun fx;
        const auto run_dir = dir / ("run" + std::to_string(run));
        const auto outcome = run_experiment("e2e", run_dir, fx.inputs, fx.resources, {});
        expect(outcome.complete, "run incomplete");
        expect(outcome.records.size() == 200, "record count " + std::to_string(outcome.records.size()));
        for (const auto& r : outcome.records) expect(r.status == RecordStatus::ok, "errored record: " + r.error);
        files.push_back(testsupport::read_file(records_path(run_dir)));
    }
    expect(files[0] == files[1], "records differ between runs");
    expect(std::count(files[0].begin(), files[0].end(), '\n') == 200, "file line count");
    const double elapsed = seconds_since(t0);
    expect(elapsed < 60.0, "took " + std::to_string(elapsed) + " s");
}

void table_one() {
    const auto cells = testsupport::load_cells(testsupport::fixture("summary_cells.json"));
    const auto options = testsupport::load_report_options(testsupport::fixture("summary_report.json"));
    const auto table = summary_table(cells, options);
    expect(table.rows.size() == 7, "row count " + std::to_string(table.rows.size()));
    expect(render_summary_markdown(table) == testsupport::read_file(testsupport::fixture("summary_golden.md")),
           "golden file mismatch");
}

void nemotron_range() {
    const auto chart = ragas_chart_data(testsupport::load_cells(testsupport::fixture("nemotron_ragas_cells.json")));
    expect(chart.series.size() == 1 && chart.series[0].model == "Nemotron 70b instruct", "series");
    const auto& range = chart.series[0].range;
    expect(range.has_value(), "no range");
    expect(to_percent(range->first) == 51 && to_percent(range->second) == 67,
           "range (" + std::to_string(to_percent(range->first)) + ", " + std::to_string(to_percent(range->second)) + ")");
}

void ragas_properties() {
    std::mt19937_64 rng(8008);
    DeterministicEmbedder embedder;
    const std::vector<std::string> contexts = {"passage"};
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 12;
        std::vector<std::string> claims;
        std::vector<bool> verdicts;
        for (std::size_t i = 0; i < n; ++i) {
            claims.push_back("claim " + std::to_string(i));
            verdicts.push_back(rng() % 2 == 0);
        }
        const auto supported = static_cast<double>(std::count(verdicts.begin(), verdicts.end(), true));
        ScriptedJudge judge(claims, verdicts, {"what is the diagnosis", "which treatment"});
        const double f = faithfulness("answer", contexts, judge).score;
        expect(f == supported / static_cast<double>(n), "faithfulness trial " + std::to_string(trial));
        expect(f >= 0.0 && f <= 1.0, "faithfulness range");

        // Flipping one unsupported verdict to supported never lowers the score.
        auto it = std::find(verdicts.begin(), verdicts.end(), false);
        if (it != verdicts.end()) {
            *it = true;
            ScriptedJudge flipped(claims, verdicts);
            expect(faithfulness("answer", contexts, flipped).score > f, "monotonicity trial " + std::to_string(trial));
        }

        const double rel = answer_relevance("what is the diagnosis for this patient", "answer", judge, embedder);
        expect(rel >= 0.0 && rel <= 1.0, "relevance range");
        const double comp = ragas_composite(f, rel);
        expect(std::abs(comp - (f + rel) / 2.0) <= 1e-15, "composite mean");
        expect(comp >= 0.0 && comp <= 1.0, "composite range");
    }
}

void runner_resilience() {
    testsupport::TempDir dir;
    testsupport::FixtureRun fx;
    auto dead = MockBackend::from_file(fx.config.mock_script);
    dead->set_always_fail(true);
    fx.resources.backends["Nemotron 70b instruct"] = dead;

    const auto full = run_experiment("full", dir / "full", fx.inputs, fx.resources, {});
    const auto errors = std::count_if(full.records.begin(), full.records.end(),
                                      [](const ScoreRecord& r) { return r.status == RecordStatus::error; });
    expect(full.complete && full.records.size() == 200, "full run incomplete");
    expect(errors == 40, "errored records: " + std::to_string(errors));
    for (const auto& r : full.records) {
        expect((r.status == RecordStatus::error) == (r.model == "Nemotron 70b instruct"), "error on wrong model");
    }

    ExecuteOptions interrupted;
    interrupted.stop_after = 73;
    const auto partial = run_experiment("cut", dir / "cut", fx.inputs, fx.resources, interrupted);
    expect(!partial.complete && partial.executed == 73, "partial run");
    fx.mock->reset_counters();
    dead->reset_counters();
    const auto resumed = resume_experiment(dir / "cut", fx.inputs, fx.resources, {});
    expect(resumed.executed == 127, "resume executed " + std::to_string(resumed.executed));
    // Only the healthy models' share of the remaining tasks reaches the working backend.
    const auto tasks = plan(fx.inputs.cases, fx.inputs.models, fx.inputs.conditions);
    const auto healthy_remaining = std::count_if(tasks.begin() + 73, tasks.end(), [&](const Task& t) {
        return fx.inputs.models[t.model_index].name != "Nemotron 70b instruct";
    });
    expect(fx.mock->calls() == static_cast<std::size_t>(healthy_remaining),
           "provider calls " + std::to_string(fx.mock->calls()));
    expect(resumed.complete && resumed.records == full.records, "resumed records differ from a full run");
}

void retry_contract() {
    auto ok_after_two = std::make_shared<testsupport::ScriptedTransport>(std::vector<int>{429, 429, 200});
    std::vector<std::chrono::milliseconds> sleeps;
    HttpChatBackend backend(ok_after_two, [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
    ModelConfig m;
    m.name = "Scripted";
    m.endpoint = "http://scripted.invalid/v1/chat/completions";
    m.model_id = "scripted-1";
    m.max_retries = 3;
    m.backoff_base = std::chrono::milliseconds(250);
    const auto answer = backend.complete(m, Prompt{});
    expect(ok_after_two->attempts == 3, "attempts " + std::to_string(ok_after_two->attempts));
    expect(!answer.raw_text.empty(), "empty answer");
    expect(sleeps.size() == 2 && sleeps[0].count() == 250 && sleeps[1].count() == 500, "backoff schedule");

    auto unauthorized = std::make_shared<testsupport::ScriptedTransport>(std::vector<int>{401, 200});
    HttpChatBackend auth_backend(unauthorized, [](std::chrono::milliseconds) {});
    bool threw = false;
    try {
        auth_backend.complete(m, Prompt{});
    } catch (const AuthError&) {
        threw = true;
    }
    expect(threw, "401 did not raise an auth error");
    expect(unauthorized->attempts == 1, "401 attempts " + std::to_string(unauthorized->attempts));
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
        {"1 kNN matches brute-force oracle (1000x768, 50 queries, k=10, <5 s)", knn_oracle},
        {"2 prf matches direct-formula oracle on 10,000 pairs", f1_oracle},
        {"3 chunker reconstruction and count on 200 triples", chunker_property},
        {"4 index save/load fidelity and corruption errors", persistence},
        {"5 deterministic mock end-to-end run, 2 x 200 identical records, <60 s", deterministic_e2e},
        {"6 summary table matches the 7-row golden file", table_one},
        {"7 chart range for Nemotron is (51, 67)", nemotron_range},
        {"8 faithfulness, monotonicity and composite over 1,000 verdict vectors", ragas_properties},
        {"9 dead backend gives 40 errors / 160 scored; resume runs only the rest", runner_resilience},
        {"10 retry: 429,429,200 takes 3 attempts; 401 takes 1", retry_contract},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = Clock::now();
        std::string detail;
        bool ok = false;
        try {
            fn();
            ok = true;
        } catch (const Failure& f) {
            detail = f.what;
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        char timing[32];
        std::snprintf(timing, sizeof timing, "%.2fs", seconds_since(t0));
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << " (" << timing << ")";
        if (!ok) std::cout << ": " << detail;
        std::cout << "\n";
        failed += ok ? 0 : 1;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
