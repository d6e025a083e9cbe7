#include "ragbench/cli.hpp"

#include <CLI11.hpp>

#include <fmt/format.h>

#include "ragbench/config.hpp"
#include "ragbench/errors.hpp"
#include "ragbench/judge.hpp"
#include "ragbench/kernels.hpp"
#include "ragbench/pipeline.hpp"
#include "ragbench/records.hpp"
#include "ragbench/report.hpp"
#include "ragbench/runner.hpp"
#include "ragbench/text.hpp"

namespace ragbench::cli {

namespace fs = std::filesystem;

namespace {

struct Overrides {
    std::string config;
    std::string cases;
    std::string models;
    std::string conditions;
    std::optional<std::size_t> k;
    std::optional<std::size_t> parallelism;
    std::optional<int> trials;
    std::string out;
    bool mock = false;
};

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const auto comma = csv.find(',', start);
        std::string item = text::trim(std::string_view(csv).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!item.empty()) out.push_back(std::move(item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

HarnessConfig resolve_config(const Overrides& o) {
    HarnessConfig c;
    if (!o.config.empty()) {
        c = load_config(o.config);
    } else {
        c.conditions = parse_condition_list("all");
        c.index_file = c.out_dir / "index.rgix";
        c.cache_dir = c.out_dir / "cache";
    }
    if (!o.cases.empty()) c.cases_file = o.cases;
    if (!o.out.empty()) {
        const fs::path old_out = c.out_dir;
        c.out_dir = o.out;
        if (c.cache_dir == old_out / "cache") c.cache_dir = c.out_dir / "cache";
        if (c.index_file == old_out / "index.rgix") c.index_file = c.out_dir / "index.rgix";
    }
    if (o.k) c.retrieval.k_retrieve = *o.k;
    if (o.parallelism) c.parallelism = *o.parallelism;
    if (o.trials) c.trials = *o.trials;
    if (!o.conditions.empty()) c.conditions = parse_condition_list(o.conditions);

    bool force_mock = o.mock;
    if (!o.models.empty()) {
        auto names = split_csv(o.models);
        const bool has_model_named_mock = std::any_of(c.models.begin(), c.models.end(),
                                                      [](const ModelConfig& m) { return m.name == "mock"; });
        if (names.size() == 1 && names[0] == "mock" && !has_model_named_mock) {
            force_mock = true;  // "--models mock": every configured model, mocked
        } else {
            std::vector<ModelConfig> selected;
            for (const auto& n : names) {
                auto it = std::find_if(c.models.begin(), c.models.end(), [&](const ModelConfig& m) { return m.name == n; });
                if (it == c.models.end()) throw ValidationError(fmt::format("--models: unknown model '{}'", n));
                selected.push_back(*it);
            }
            c.models = std::move(selected);
        }
    }
    if (force_mock) {
        for (auto& m : c.models) m.backend = BackendKind::mock;
        c.judge = JudgeKind::mock;
    }
    c.validate();
    return c;
}

void require_file(const fs::path& p, const char* what) {
    if (p.empty()) throw ValidationError(fmt::format("no {} configured", what));
    if (!fs::is_regular_file(p)) throw IoError(fmt::format("{} not found: {}", what, p.string()));
}

struct LoadedIndex {
    FlatIndex index;
    ChunkStore chunks;
};

std::optional<LoadedIndex> load_index_if_present(const HarnessConfig& c, bool required) {
    if (!fs::is_regular_file(c.index_file)) {
        if (required) throw IoError(fmt::format("index file not found: {} (run `ragbench index` first)", c.index_file.string()));
        return std::nullopt;
    }
    FlatIndex index = FlatIndex::load(c.index_file);
    const auto docs = load_documents(c.corpus_dir);
    const Digest expected = corpus_fingerprint(docs, c.chunking, c.embedding);
    if (expected != index.fingerprint()) {
        throw ValidationError(fmt::format("index {} is stale: corpus, chunking or embedding config changed; rebuild it",
                                          c.index_file.string()));
    }
    return LoadedIndex{std::move(index), ChunkStore(chunk_corpus(docs, c.chunking))};
}

int cmd_index(const Overrides& o, std::ostream& out) {
    const HarnessConfig c = resolve_config(o);
    const auto docs = load_documents(c.corpus_dir);
    if (docs.empty()) throw ValidationError(fmt::format("empty corpus: no .txt/.md files in {}", c.corpus_dir.string()));
    auto embedder = make_embedder(c.embedding);
    CorpusIndex built = build_corpus_index(docs, c.chunking, c.embedding, *embedder);
    if (c.index_file.has_parent_path()) fs::create_directories(c.index_file.parent_path());
    built.index.save(c.index_file);
    out << fmt::format("documents: {}\nchunks: {}\nfingerprint: {}\nindex: {}\n", docs.size(), built.index.size(),
                       to_hex(built.index.fingerprint()), c.index_file.string());
    return 0;
}

int cmd_run(const Overrides& o, const std::string& run_id_flag, const std::string& resume_id,
            std::ostream& out) {
    const HarnessConfig c = resolve_config(o);
    require_file(c.cases_file, "case file");
    require_file(c.templates_file, "template set");

    RunInputs inputs;
    inputs.cases = load_cases(c.cases_file);
    inputs.models = c.models;
    inputs.conditions = c.conditions;
    inputs.trials = c.trials;
    inputs.templates = TemplateSet::load(c.templates_file);
    if (!c.synonyms_file.empty()) inputs.synonyms = SynonymTable::load(c.synonyms_file);
    inputs.retrieval = c.retrieval;
    inputs.embedding = c.embedding;
    if (inputs.models.empty()) throw ValidationError("no models configured");

    const bool needs_index = std::any_of(c.conditions.begin(), c.conditions.end(),
                                         [](const Condition& cond) { return cond.rag_enabled; });
    auto loaded = load_index_if_present(c, needs_index);
    if (loaded) inputs.index_fingerprint = to_hex(loaded->index.fingerprint());

    auto embedder = make_embedder(c.embedding);
    std::unique_ptr<PassageScorer> scorer;
    if (c.reranker == RerankerKind::http) {
        scorer = std::make_unique<HttpCrossEncoderScorer>(c.reranker_endpoint, std::chrono::milliseconds(30000));
    } else {
        scorer = std::make_unique<LexicalOverlapScorer>();
    }

    RunResources res;
    std::shared_ptr<MockBackend> mock;
    auto http = std::make_shared<HttpChatBackend>();
    for (const auto& m : inputs.models) {
        if (m.backend == BackendKind::mock) {
            if (!mock) {
                require_file(c.mock_script, "mock script");
                mock = MockBackend::from_file(c.mock_script);
            }
            res.backends[m.name] = mock;
        } else {
            res.backends[m.name] = http;
        }
    }
    std::unique_ptr<JudgeBackend> judge;
    if (c.judge == JudgeKind::chat) {
        judge = std::make_unique<ChatJudge>(http, *c.judge_model, inputs.templates);
    } else {
        judge = std::make_unique<RuleBasedJudge>(inputs.synonyms);
    }
    inputs.judge_id = judge->judge_id();

    if (loaded) {
        res.index = &loaded->index;
        res.chunks = &loaded->chunks;
    }
    res.embedder = embedder.get();
    res.scorer = scorer.get();
    res.judge = judge.get();

    ResponseCache cache(c.cache_dir);
    ExecuteOptions opts;
    opts.parallelism = c.parallelism;
    opts.cache = &cache;

    RunOutcome outcome;
    if (!resume_id.empty()) {
        outcome = resume_experiment(c.out_dir / resume_id, inputs, res, opts);
    } else {
        const std::string run_id = run_id_flag.empty() ? inputs.fingerprint().substr(0, 12) : run_id_flag;
        outcome = run_experiment(run_id, c.out_dir / run_id, inputs, res, opts);
    }
    const auto errors = std::count_if(outcome.records.begin(), outcome.records.end(),
                                      [](const ScoreRecord& r) { return r.status == RecordStatus::error; });
    const fs::path run_dir = c.out_dir / outcome.manifest.run_id;
    out << fmt::format("run: {}\nexecuted: {}\nrecords: {}\nerrored: {}\nresults: {}\nmanifest: {}\n",
                       outcome.manifest.run_id, outcome.executed, outcome.records.size(), errors,
                       records_path(run_dir).string(), manifest_path(run_dir).string());
    return outcome.complete ? 0 : 1;
}

int cmd_report(const Overrides& o, const std::string& results, const std::string& formats_csv, std::ostream& out) {
    HarnessConfig c;
    if (!o.config.empty()) c = load_config(o.config);
    if (!o.out.empty()) c.out_dir = o.out;
    const fs::path results_path = results;
    const auto records = read_records(results_path);
    if (records.empty()) throw ValidationError(fmt::format("no records in {}", results_path.string()));

    std::vector<ExportFormat> formats;
    for (const auto& f : split_csv(formats_csv)) formats.push_back(parse_export_format(f));

    ReportOptions options = c.report;
    if (options.model_order.empty()) {
        for (const auto& m : c.models) options.model_order.push_back(m.name);
    }
    const auto cells = aggregate(records);
    const SummaryTable summary = summary_table(cells, options);
    const ChartData chart = ragas_chart_data(cells, options);

    ExportInputs in;
    in.summary = &summary;
    in.chart = &chart;
    in.records_file = results_path;
    const fs::path manifest = results_path.parent_path() / "manifest.json";
    if (fs::is_regular_file(manifest)) in.manifest_file = manifest;
    const auto written = export_report(in, formats, c.out_dir);
    out << fmt::format("records: {}\nrows: {}\n", records.size(), summary.rows.size());
    for (const auto& p : written) out << "wrote " << p.string() << "\n";
    return 0;
}

int cmd_validate(const Overrides& o, std::ostream& out) {
    const HarnessConfig c = resolve_config(o);
    require_file(c.cases_file, "case file");
    require_file(c.templates_file, "template set");
    const auto cases = load_cases(c.cases_file);
    const auto templates = TemplateSet::load(c.templates_file);
    if (!c.synonyms_file.empty()) SynonymTable::load(c.synonyms_file);
    const auto tasks = plan(cases, c.models, c.conditions, c.trials);
    const bool needs_index = std::any_of(c.conditions.begin(), c.conditions.end(),
                                         [](const Condition& cond) { return cond.rag_enabled; });
    const auto loaded = load_index_if_present(c, needs_index);
    if (std::any_of(c.models.begin(), c.models.end(), [](const ModelConfig& m) { return m.backend == BackendKind::mock; })) {
        require_file(c.mock_script, "mock script");
    }
    out << fmt::format("cases: {}\nmodels: {}\nconditions: {}\ntasks: {}\ntemplate version: {}\nindex: {}\nkernels: {}\nok\n",
                       cases.size(), c.models.size(), c.conditions.size(), tasks.size(), templates.version,
                       loaded ? fmt::format("{} entries", loaded->index.size()) : std::string("none"),
                       kernels::isa_name(kernels::active_isa()));
    return 0;
}

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON config file");
    cmd->add_option("--cases", o.cases, "Case file (overrides config)");
    cmd->add_option("--models", o.models, "Comma-separated model names; 'mock' mocks every model");
    cmd->add_option("--conditions", o.conditions, "Comma-separated conditions, e.g. rag+prediag,norag+noprediag");
    cmd->add_option("--k", o.k, "Passages retrieved per query");
    cmd->add_option("--parallelism", o.parallelism, "Maximum provider calls in flight");
    cmd->add_option("--trials", o.trials, "Repetitions per task");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_flag("--mock", o.mock, "Use mock backends and the rule-based judge");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"ragbench: retrieval-augmented clinical decision support evaluation harness"};
    app.require_subcommand(1);

    Overrides o;
    std::string run_id;
    std::string resume_id;
    std::string results;
    std::string formats = "md,csv,json";

    auto* index = app.add_subcommand("index", "Chunk, embed and index the guideline corpus");
    add_common(index, o);
    auto* run_cmd = app.add_subcommand("run", "Execute the case x model x condition matrix");
    add_common(run_cmd, o);
    run_cmd->add_option("--run-id", run_id, "Run identifier (default: input fingerprint prefix)");
    run_cmd->add_option("--resume", resume_id, "Resume an interrupted run by id");
    auto* report = app.add_subcommand("report", "Aggregate a results file into summary tables");
    add_common(report, o);
    report->add_option("--results", results, "records.ndjson to summarize")->required();
    report->add_option("--formats", formats, "Comma-separated: md,csv,json");
    auto* validate = app.add_subcommand("validate", "Check config and inputs without running");
    add_common(validate, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*index) return cmd_index(o, out);
        if (*run_cmd) return cmd_run(o, run_id, resume_id, out);
        if (*report) return cmd_report(o, results, formats, out);
        if (*validate) return cmd_validate(o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace ragbench::cli
