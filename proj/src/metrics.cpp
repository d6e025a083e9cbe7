#include "ragbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include <fmt/format.h>

#include "ragbench/errors.hpp"
#include "ragbench/kernels.hpp"

namespace ragbench {

PRF prf(const TermSet& predicted, const TermSet& gold) {
    std::size_t hits = 0;
    for (const auto& t : predicted) hits += gold.contains(t) ? 1 : 0;
    PRF out;
    out.precision = predicted.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(predicted.size());
    out.recall = gold.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(gold.size());
    const double sum = out.precision + out.recall;
    out.f1 = sum == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / sum;
    return out;
}

double faithfulness_from_verdicts(std::span<const bool> verdicts) {
    if (verdicts.empty()) return 1.0;
    const auto supported = std::count(verdicts.begin(), verdicts.end(), true);
    return static_cast<double>(supported) / static_cast<double>(verdicts.size());
}

FaithfulnessResult faithfulness(const std::string& answer_text, std::span<const std::string> contexts,
                                JudgeBackend& judge) {
    if (contexts.empty()) throw ValidationError("faithfulness needs at least one context passage");
    FaithfulnessResult out;
    const auto claims = judge.extract_claims(answer_text);
    if (claims.empty()) return out;
    const auto verdicts = judge.verify_claims(claims, contexts);
    if (verdicts.size() != claims.size()) {
        throw MalformedResponseError(fmt::format("judge returned {} verdicts for {} claims", verdicts.size(),
                                                 claims.size()));
    }
    std::vector<bool> flags(verdicts.begin(), verdicts.end());
    std::size_t supported = 0;
    for (std::size_t i = 0; i < claims.size(); ++i) {
        out.trace.push_back({claims[i], flags[i]});
        supported += flags[i] ? 1 : 0;
    }
    out.score = static_cast<double>(supported) / static_cast<double>(claims.size());
    return out;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    const double ab = kernels::dot(a, b);
    const double aa = kernels::dot(a, a);
    const double bb = kernels::dot(b, b);
    if (aa <= 0.0 || bb <= 0.0) return 0.0;
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

double answer_relevance(const std::string& question, const std::string& answer_text, JudgeBackend& judge,
                        Embedder& embedder, int n) {
    auto generated = judge.generate_questions(answer_text, n);
    std::erase_if(generated, [](const std::string& q) {
        return q.find_first_not_of(" \t\r\n") == std::string::npos;
    });
    if (generated.empty()) return 0.0;
    if (generated.size() > static_cast<std::size_t>(n)) generated.resize(static_cast<std::size_t>(n));

    std::vector<std::string> texts;
    texts.reserve(generated.size() + 1);
    texts.push_back(question);
    texts.insert(texts.end(), generated.begin(), generated.end());
    const auto vectors = embedder.embed_batch(texts);

    double total = 0.0;
    for (std::size_t i = 1; i < vectors.size(); ++i) {
        total += cosine_similarity(vectors[0].values(), vectors[i].values());
    }
    const double mean = total / static_cast<double>(generated.size());
    return std::clamp(mean, 0.0, 1.0);
}

double ragas_composite(std::optional<double> faithfulness, std::optional<double> answer_relevance) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : {faithfulness, answer_relevance}) {
        if (c) {
            sum += *c;
            ++n;
        }
    }
    if (n == 0) throw ValidationError("ragas_composite needs at least one component");
    return sum / n;
}

std::string to_string(RecordStatus s) { return s == RecordStatus::ok ? "ok" : "error"; }

std::string to_string(Metric m) {
    switch (m) {
        case Metric::f1_dx: return "F1-Dx";
        case Metric::f1_tx: return "F1-Tx";
        case Metric::ragas: break;
    }
    return "RAGAS";
}

std::optional<double> metric_value(const AggregateCell& cell, Metric m) {
    switch (m) {
        case Metric::f1_dx: return cell.f1_dx;
        case Metric::f1_tx: return cell.f1_tx;
        case Metric::ragas: break;
    }
    return cell.ragas;
}

namespace {

// Mean of per-case means; absent when no case carried the metric.
class MacroMean {
public:
    void add(const std::string& case_id, std::optional<double> v) {
        if (!v) return;
        auto& [sum, n] = per_case_[case_id];
        sum += *v;
        ++n;
    }
    std::optional<double> value() const {
        if (per_case_.empty()) return std::nullopt;
        double total = 0.0;
        for (const auto& [id, acc] : per_case_) total += acc.first / acc.second;
        return total / static_cast<double>(per_case_.size());
    }

private:
    std::map<std::string, std::pair<double, int>> per_case_;
};

struct CellAccumulator {
    AggregateCell cell;
    MacroMean f1_dx, f1_tx, faith, relevance, ragas;
};

}  // namespace

std::vector<AggregateCell> aggregate(std::span<const ScoreRecord> records) {
    using Key = std::tuple<std::string, int, bool, bool>;
    std::map<Key, CellAccumulator> cells;
    for (const auto& r : records) {
        const Key key{r.model, r.condition.assistance_level(), r.condition.rag_enabled, r.condition.prediagnosis_provided};
        auto& acc = cells[key];
        acc.cell.model = r.model;
        acc.cell.model_class = r.model_class;
        acc.cell.condition = r.condition;
        ++acc.cell.n_records;
        if (r.status == RecordStatus::error) {
            ++acc.cell.n_errors;
            continue;
        }
        acc.f1_dx.add(r.case_id, r.f1_dx ? std::optional<double>(r.f1_dx->f1) : std::nullopt);
        acc.f1_tx.add(r.case_id, r.f1_tx ? std::optional<double>(r.f1_tx->f1) : std::nullopt);
        acc.faith.add(r.case_id, r.ragas.faithfulness);
        acc.relevance.add(r.case_id, r.ragas.answer_relevance);
        acc.ragas.add(r.case_id, r.ragas.composite);
    }
    std::vector<AggregateCell> out;
    out.reserve(cells.size());
    for (auto& [key, acc] : cells) {
        acc.cell.f1_dx = acc.f1_dx.value();
        acc.cell.f1_tx = acc.f1_tx.value();
        acc.cell.faithfulness = acc.faith.value();
        acc.cell.answer_relevance = acc.relevance.value();
        acc.cell.ragas = acc.ragas.value();
        out.push_back(std::move(acc.cell));
    }
    return out;
}

std::vector<TopScore> top_scores(std::span<const AggregateCell> cells) {
    std::map<std::pair<std::string, int>, TopScore> best;
    for (const auto& cell : cells) {
        for (Metric m : {Metric::f1_dx, Metric::f1_tx, Metric::ragas}) {
            const auto v = metric_value(cell, m);
            if (!v) continue;
            const auto key = std::make_pair(cell.model, static_cast<int>(m));
            auto it = best.find(key);
            const bool better = it == best.end() || *v > it->second.score ||
                                (*v == it->second.score &&
                                 cell.condition.assistance_level() < it->second.condition.assistance_level());
            if (better) best[key] = TopScore{cell.model, m, cell.condition, *v};
        }
    }
    std::vector<TopScore> out;
    for (auto& [k, v] : best) out.push_back(v);
    return out;
}

}  // namespace ragbench
