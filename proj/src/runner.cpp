#include "ragbench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "ragbench/errors.hpp"
#include "ragbench/hash.hpp"
#include "ragbench/records.hpp"

namespace ragbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<Task> plan(const std::vector<PatientCase>& cases, const std::vector<ModelConfig>& models,
                       const std::vector<Condition>& conditions, int trials) {
    if (trials < 1) throw ValidationError("trials must be >= 1");
    const bool needs_prediag = std::any_of(conditions.begin(), conditions.end(),
                                           [](const Condition& c) { return c.prediagnosis_provided; });
    if (needs_prediag) {
        for (const auto& c : cases) {
            if (!c.pre_diagnosis) {
                throw ValidationError(fmt::format("case {} has no pre_diagnosis but a planned condition requires one",
                                                  c.case_id));
            }
        }
    }
    std::vector<Task> tasks;
    tasks.reserve(cases.size() * models.size() * conditions.size() * static_cast<std::size_t>(trials));
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        for (std::size_t mi = 0; mi < models.size(); ++mi) {
            for (const auto& cond : conditions) {
                for (int trial = 0; trial < trials; ++trial) {
                    tasks.push_back({tasks.size(), ci, mi, cond, trial});
                }
            }
        }
    }
    return tasks;
}

namespace {

json case_to_json(const PatientCase& c) {
    return json{{"case_id", c.case_id},
                {"history", c.history},
                {"medications", c.medications},
                {"labs", c.labs},
                {"course", c.course},
                {"pre_diagnosis", c.pre_diagnosis ? json(*c.pre_diagnosis) : json(nullptr)},
                {"gold_diagnoses", c.gold_diagnoses},
                {"gold_treatments", c.gold_treatments}};
}

json templates_to_json(const TemplateSet& t) {
    json shots = json::array();
    for (const auto& s : t.few_shot) shots.push_back({{"input", s.input}, {"output", s.output}});
    return json{{"version", t.version},
                {"system", t.system},
                {"user_skeleton", t.user_skeleton},
                {"few_shot", shots},
                {"context_header", t.context_header},
                {"prediagnosis_header", t.prediagnosis_header},
                {"judge_claims", t.judge_claims},
                {"judge_verdicts", t.judge_verdicts},
                {"judge_gen_questions", t.judge_gen_questions}};
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

using TaskKey = std::tuple<std::string, std::string, std::string, int>;

TaskKey key_of(const ScoreRecord& r) { return {r.case_id, r.model, r.condition.token(), r.trial}; }

TaskKey key_of(const Task& t, const RunInputs& inputs) {
    return {inputs.cases[t.case_index].case_id, inputs.models[t.model_index].name, t.condition.token(), t.trial};
}

TermSet to_term_set(const std::vector<std::string>& terms) {
    TermSet out;
    for (const auto& t : terms) out.insert(t);
    return out;
}

}  // namespace

std::string RunInputs::fingerprint() const {
    json cases_json = json::array();
    for (const auto& c : cases) cases_json.push_back(case_to_json(c));
    json models_json = json::array();
    for (const auto& m : models) models_json.push_back(m.fingerprint_text());
    json conditions_json = json::array();
    for (const auto& c : conditions) conditions_json.push_back(c.token());

    Sha256 h;
    h.add_field(cases_json.dump())
        .add_field(models_json.dump())
        .add_field(conditions_json.dump())
        .add_field(std::to_string(trials))
        .add_field(templates_to_json(templates).dump())
        .add_field(json(synonyms.entries()).dump())
        .add_field(fmt::format("{}/{}/{}", retrieval.k_retrieve, retrieval.m_keep, retrieval.char_budget))
        .add_field(embedding.fingerprint_text())
        .add_field(index_fingerprint)
        .add_field(judge_id);
    const Digest d = h.finish();
    return to_hex(d);
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError(fmt::format("cannot create cache directory {}: {}", dir_.string(), ec.message()));
}

std::string ResponseCache::key(const std::string& case_id, const std::string& model, const Condition& condition,
                               const std::string& prompt_hash, int trial) {
    Sha256 h;
    h.add_field(case_id).add_field(model).add_field(condition.token()).add_field(prompt_hash);
    // Repeated trials must not share a cached answer.
    if (trial > 0) h.add_field(fmt::format("trial={}", trial));
    const Digest d = h.finish();
    return to_hex(d);
}

std::optional<ModelAnswer> ResponseCache::get(const std::string& key) const {
    const fs::path path = dir_ / (key + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    try {
        const json j = json::parse(in);
        ModelAnswer a;
        a.raw_text = j.at("raw_text").get<std::string>();
        a.model = j.value("model", std::string());
        a.case_id = j.value("case_id", std::string());
        a.condition = Condition::parse(j.at("condition").get<std::string>());
        a.prompt_hash = j.value("prompt_hash", std::string());
        a.finish_reason = parse_finish_reason(j.value("finish_reason", std::string("stop")));
        a.latency = std::chrono::milliseconds(j.value("latency_ms", 0));
        a.attempts = j.value("attempts", 1);
        return a;
    } catch (const std::exception&) {
        return std::nullopt;  // unreadable entries count as misses
    }
}

void ResponseCache::put(const std::string& key, const ModelAnswer& a) {
    const json j{{"key", key},
                 {"raw_text", a.raw_text},
                 {"model", a.model},
                 {"case_id", a.case_id},
                 {"condition", a.condition.token()},
                 {"prompt_hash", a.prompt_hash},
                 {"finish_reason", to_string(a.finish_reason)},
                 {"latency_ms", a.latency.count()},
                 {"attempts", a.attempts}};
    std::lock_guard<std::mutex> lock(write_mutex_);
    const fs::path path = dir_ / (key + ".json");
    const fs::path tmp = dir_ / (key + ".json.tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot write cache entry {}", tmp.string()));
        out << j.dump(2) << '\n';
    }
    fs::rename(tmp, path);
}

ScoreRecord execute_task(const Task& task, const RunInputs& inputs, RunResources& res, ResponseCache* cache) {
    const PatientCase& patient = inputs.cases.at(task.case_index);
    const ModelConfig& model = inputs.models.at(task.model_index);

    ScoreRecord rec;
    rec.case_id = patient.case_id;
    rec.model = model.name;
    rec.model_class = model.class_label;
    rec.condition = task.condition;
    rec.trial = task.trial;
    rec.judge_id = res.judge ? res.judge->judge_id() : "";

    try {
        const auto backend_it = res.backends.find(model.name);
        if (backend_it == res.backends.end() || !backend_it->second) {
            throw ValidationError(fmt::format("no backend configured for model {}", model.name));
        }

        const std::string query = build_query(patient, task.condition);
        std::optional<ContextBundle> bundle;
        const bool have_retrieval = res.index && !res.index->empty() && res.chunks && res.embedder && res.scorer;
        if (have_retrieval) {
            // Also computed without retrieval: faithfulness is graded against these passages.
            bundle = retrieve_for_query(patient.case_id, query, *res.index, *res.chunks, *res.embedder, *res.scorer,
                                        inputs.retrieval);
        } else if (task.condition.rag_enabled) {
            throw ValidationError("condition needs retrieval but no index is loaded");
        }

        const Prompt prompt =
            build_prompt(patient, task.condition, task.condition.rag_enabled ? bundle : std::nullopt, inputs.templates);
        rec.prompt_hash = prompt.content_hash;

        const std::string cache_key =
            ResponseCache::key(patient.case_id, model.name, task.condition, prompt.content_hash, task.trial);
        std::optional<ModelAnswer> answer;
        if (cache) answer = cache->get(cache_key);
        if (!answer) {
            answer = complete(*backend_it->second, model, prompt);
            if (cache) cache->put(cache_key, *answer);
        }

        const ExtractedAnswer extracted = extract_answer_blocks(answer->raw_text, inputs.synonyms);
        rec.parse_status = extracted.status;
        rec.f1_dx = prf(extracted.diagnoses, to_term_set(patient.gold_diagnoses));
        if (!patient.gold_treatments.empty()) {
            rec.f1_tx = prf(extracted.treatments, to_term_set(patient.gold_treatments));
        }

        if (res.judge) {
            if (bundle && !bundle->passages.empty()) {
                std::vector<std::string> contexts;
                for (const auto& p : bundle->passages) contexts.push_back(p.text);
                auto faith = faithfulness(answer->raw_text, contexts, *res.judge);
                rec.ragas.faithfulness = faith.score;
                rec.ragas.judge_trace = std::move(faith.trace);
            }
            if (res.embedder) {
                rec.ragas.answer_relevance = answer_relevance(query, answer->raw_text, *res.judge, *res.embedder);
            }
            if (rec.ragas.faithfulness || rec.ragas.answer_relevance) {
                rec.ragas.composite = ragas_composite(rec.ragas.faithfulness, rec.ragas.answer_relevance);
            }
        }
    } catch (const std::exception& e) {
        rec.status = RecordStatus::error;
        rec.error = e.what();
        rec.f1_dx.reset();
        rec.f1_tx.reset();
        rec.ragas = RagasComponents{};
        rec.parse_status = ParseStatus::unparseable;
    }
    return rec;
}

std::vector<ScoreRecord> execute(const std::vector<Task>& tasks, const RunInputs& inputs, RunResources& resources,
                                 const ExecuteOptions& options) {
    const std::size_t limit = std::min(tasks.size(), options.stop_after.value_or(tasks.size()));
    std::vector<std::optional<ScoreRecord>> slots(limit);
    std::atomic<std::size_t> next{0};
    std::mutex callback_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= limit) return;
            ScoreRecord rec = execute_task(tasks[i], inputs, resources, options.cache);
            if (options.on_record) {
                std::lock_guard<std::mutex> lock(callback_mutex);
                options.on_record(rec);
            }
            slots[i] = std::move(rec);
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(options.parallelism, limit));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    std::vector<ScoreRecord> out;
    out.reserve(limit);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

json manifest_to_json(const RunManifest& m) {
    return json{{"run_id", m.run_id},
                {"template_version", m.template_version},
                {"models", m.models},
                {"conditions", m.conditions},
                {"case_ids", m.case_ids},
                {"retrieval",
                 {{"k_retrieve", m.retrieval.k_retrieve},
                  {"m_keep", m.retrieval.m_keep},
                  {"char_budget", m.retrieval.char_budget}}},
                {"embedding", m.embedding},
                {"judge_id", m.judge_id},
                {"trials", m.trials},
                {"started", m.started},
                {"finished", m.finished},
                {"fingerprint", m.fingerprint},
                {"planned_tasks", m.planned_tasks}};
}

RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    try {
        m.run_id = j.at("run_id").get<std::string>();
        m.template_version = j.value("template_version", std::string());
        m.models = j.value("models", std::vector<std::string>{});
        m.conditions = j.value("conditions", std::vector<std::string>{});
        m.case_ids = j.value("case_ids", std::vector<std::string>{});
        if (j.contains("retrieval")) {
            const json& r = j["retrieval"];
            m.retrieval.k_retrieve = r.value("k_retrieve", m.retrieval.k_retrieve);
            m.retrieval.m_keep = r.value("m_keep", m.retrieval.m_keep);
            m.retrieval.char_budget = r.value("char_budget", m.retrieval.char_budget);
        }
        m.embedding = j.value("embedding", std::string());
        m.judge_id = j.value("judge_id", std::string());
        m.trials = j.value("trials", 1);
        m.started = j.value("started", std::string());
        m.finished = j.value("finished", std::string());
        m.fingerprint = j.at("fingerprint").get<std::string>();
        m.planned_tasks = j.value("planned_tasks", std::size_t{0});
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("malformed manifest: {}", e.what()));
    }
    return m;
}

RunManifest read_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read manifest {}", path.string()));
    try {
        return manifest_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("manifest {} is not valid JSON: {}", path.string(), e.what()));
    }
}

fs::path manifest_path(const fs::path& run_dir) { return run_dir / "manifest.json"; }
fs::path records_path(const fs::path& run_dir) { return run_dir / "records.ndjson"; }

namespace {

void write_manifest(const fs::path& run_dir, const RunManifest& m) {
    const fs::path path = manifest_path(run_dir);
    const fs::path tmp = run_dir / "manifest.json.tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot write {}", tmp.string()));
        out << manifest_to_json(m).dump(2) << '\n';
    }
    fs::rename(tmp, path);
}

RunManifest make_manifest(const std::string& run_id, const RunInputs& inputs, std::size_t planned) {
    RunManifest m;
    m.run_id = run_id;
    m.template_version = inputs.templates.version;
    for (const auto& model : inputs.models) m.models.push_back(model.name);
    for (const auto& c : inputs.conditions) m.conditions.push_back(c.token());
    for (const auto& c : inputs.cases) m.case_ids.push_back(c.case_id);
    m.retrieval = inputs.retrieval;
    m.embedding = inputs.embedding.fingerprint_text();
    m.judge_id = inputs.judge_id;
    m.trials = inputs.trials;
    m.fingerprint = inputs.fingerprint();
    m.planned_tasks = planned;
    return m;
}

// Streams records to the results file and returns them once all are done.
RunOutcome drive(RunManifest manifest, const fs::path& run_dir, const std::vector<Task>& all_tasks,
                 std::vector<ScoreRecord> existing, const RunInputs& inputs, RunResources& resources,
                 const ExecuteOptions& options) {
    std::set<TaskKey> done;
    for (const auto& r : existing) done.insert(key_of(r));
    std::vector<Task> pending;
    for (const auto& t : all_tasks) {
        if (!done.count(key_of(t, inputs))) pending.push_back(t);
    }

    std::ofstream out(records_path(run_dir), std::ios::binary | std::ios::app);
    if (!out) throw IoError(fmt::format("cannot open {}", records_path(run_dir).string()));
    ExecuteOptions opts = options;
    opts.on_record = [&](const ScoreRecord& r) {
        out << record_to_line(r) << '\n';
        out.flush();
        if (options.on_record) options.on_record(r);
    };
    auto fresh = execute(pending, inputs, resources, opts);
    out.close();

    RunOutcome outcome;
    outcome.executed = fresh.size();

    std::map<TaskKey, std::size_t> order;
    for (const auto& t : all_tasks) order.emplace(key_of(t, inputs), t.ordinal);
    std::map<std::size_t, ScoreRecord> merged;
    for (auto* batch : {&existing, &fresh}) {
        for (auto& r : *batch) {
            const auto it = order.find(key_of(r));
            if (it != order.end()) merged.insert_or_assign(it->second, std::move(r));
        }
    }
    for (auto& [ordinal, r] : merged) outcome.records.push_back(std::move(r));

    outcome.complete = outcome.records.size() == all_tasks.size();
    if (outcome.complete) {
        write_records(records_path(run_dir), outcome.records);
        if (manifest.finished.empty()) manifest.finished = utc_now();
        write_manifest(run_dir, manifest);
    }
    outcome.manifest = std::move(manifest);
    return outcome;
}

}  // namespace

RunOutcome run_experiment(const std::string& run_id, const fs::path& run_dir, const RunInputs& inputs,
                          RunResources& resources, const ExecuteOptions& options) {
    const auto tasks = plan(inputs.cases, inputs.models, inputs.conditions, inputs.trials);
    std::error_code ec;
    fs::create_directories(run_dir, ec);
    if (ec) throw IoError(fmt::format("cannot create run directory {}: {}", run_dir.string(), ec.message()));

    RunManifest manifest = make_manifest(run_id, inputs, tasks.size());
    manifest.started = utc_now();
    write_manifest(run_dir, manifest);
    {
        std::ofstream truncate(records_path(run_dir), std::ios::binary | std::ios::trunc);
        if (!truncate) throw IoError(fmt::format("cannot create {}", records_path(run_dir).string()));
    }
    return drive(std::move(manifest), run_dir, tasks, {}, inputs, resources, options);
}

RunOutcome resume_experiment(const fs::path& run_dir, const RunInputs& inputs, RunResources& resources,
                             const ExecuteOptions& options) {
    RunManifest manifest = read_manifest(manifest_path(run_dir));
    if (manifest.fingerprint != inputs.fingerprint()) {
        throw ValidationError(fmt::format("fingerprint mismatch: inputs changed since run {} started", manifest.run_id));
    }
    const auto tasks = plan(inputs.cases, inputs.models, inputs.conditions, inputs.trials);
    std::vector<ScoreRecord> existing;
    if (fs::exists(records_path(run_dir))) {
        existing = read_records_lenient(records_path(run_dir));
        // Drop a torn final line left by a crash before appending more.
        write_records(records_path(run_dir), existing);
    }
    return drive(std::move(manifest), run_dir, tasks, std::move(existing), inputs, resources, options);
}

}  // namespace ragbench
