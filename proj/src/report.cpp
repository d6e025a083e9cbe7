#include "ragbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "ragbench/errors.hpp"

namespace ragbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string>& conventions() {
    static const std::vector<std::string> notes = {
        "F1-Dx: F1 score for diagnosis; F1-Tx: F1 score for treatment recommendation.",
        "Scores are macro-averaged over cases; each row shows the best condition for that model and metric.",
        "A predicted term counts as correct only on an exact match with a gold term after normalization.",
        "RAGAS is the mean of faithfulness and answer relevance; without retrieval, faithfulness is graded "
        "against passages retrieved for the case after the fact.",
    };
    return notes;
}

struct ModelOrder {
    explicit ModelOrder(const std::vector<std::string>& order) {
        for (std::size_t i = 0; i < order.size(); ++i) rank.emplace(order[i], i);
    }
    bool less(const std::string& a, const std::string& b) const {
        const auto ra = rank.find(a);
        const auto rb = rank.find(b);
        const std::size_t ia = ra == rank.end() ? rank.size() : ra->second;
        const std::size_t ib = rb == rank.end() ? rank.size() : rb->second;
        if (ia != ib) return ia < ib;
        return a < b;
    }
    std::map<std::string, std::size_t> rank;
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    return out + "\"";
}

std::string md_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out.push_back(' ');
        else out.push_back(c);
    }
    return out;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    out << content;
    if (!out) throw IoError(fmt::format("write failed: {}", path.string()));
}

void copy_into(const fs::path& from, const fs::path& to) {
    std::error_code ec;
    if (fs::exists(to) && fs::equivalent(from, to, ec)) return;
    fs::copy_file(from, to, fs::copy_options::overwrite_existing, ec);
    if (ec) throw IoError(fmt::format("cannot copy {} to {}: {}", from.string(), to.string(), ec.message()));
}

}  // namespace

int to_percent(double score) {
    const double p = std::floor(100.0 * score + 0.5 + 1e-9);
    return static_cast<int>(std::clamp(p, 0.0, 100.0));
}

SummaryTable summary_table(std::span<const AggregateCell> cells, const ReportOptions& options) {
    std::map<std::string, ModelClass> classes;
    for (const auto& c : cells) classes.emplace(c.model, c.model_class);

    const auto tops = top_scores(cells);
    SummaryTable table;
    for (const auto& t : tops) {
        SummaryRow row;
        row.model = t.model;
        row.model_class = classes[t.model];
        row.condition = t.condition;
        row.metric = t.metric;
        row.score = t.score;
        row.percent = to_percent(t.score);
        table.rows.push_back(std::move(row));
    }

    // Default assessment: position of this model among all models for the metric.
    for (auto& row : table.rows) {
        const auto it = options.annotations.find(row.model + "|" + to_string(row.metric));
        if (it != options.annotations.end()) {
            row.assessment = it->second;
            continue;
        }
        std::size_t better = 0;
        std::size_t total = 0;
        for (const auto& other : table.rows) {
            if (other.metric != row.metric) continue;
            ++total;
            if (other.score > row.score) ++better;
        }
        row.assessment = better == 0 ? fmt::format("Best {} across models", to_string(row.metric))
                                     : fmt::format("Rank {} of {} for {}", better + 1, total, to_string(row.metric));
    }

    const ModelOrder order(options.model_order);
    std::stable_sort(table.rows.begin(), table.rows.end(), [&](const SummaryRow& a, const SummaryRow& b) {
        const int ga = a.metric == Metric::ragas ? 1 : 0;
        const int gb = b.metric == Metric::ragas ? 1 : 0;
        if (ga != gb) return ga < gb;
        if (a.model != b.model) return order.less(a.model, b.model);
        return static_cast<int>(a.metric) < static_cast<int>(b.metric);
    });
    return table;
}

ChartData ragas_chart_data(std::span<const AggregateCell> cells, const ReportOptions& options) {
    std::map<std::string, ChartSeries> by_model;
    const auto conds = all_conditions();
    for (const auto& cell : cells) {
        auto& series = by_model[cell.model];
        series.model = cell.model;
        const auto pos = std::find(conds.begin(), conds.end(), cell.condition) - conds.begin();
        if (cell.ragas) series.ragas[static_cast<std::size_t>(pos)] = cell.ragas;
    }
    ChartData chart;
    for (auto& [name, series] : by_model) {
        for (const auto& v : series.ragas) {
            if (!v) continue;
            if (!series.range) {
                series.range = std::make_pair(*v, *v);
            } else {
                series.range->first = std::min(series.range->first, *v);
                series.range->second = std::max(series.range->second, *v);
            }
        }
        chart.series.push_back(std::move(series));
    }
    const ModelOrder order(options.model_order);
    std::stable_sort(chart.series.begin(), chart.series.end(),
                     [&](const ChartSeries& a, const ChartSeries& b) { return order.less(a.model, b.model); });
    return chart;
}

std::string render_summary_markdown(const SummaryTable& table) {
    std::string out =
        "| Model | Model Size | Configuration | Metric | Top Score (%) | Evaluation Assessment |\n"
        "|---|---|---|---|---|---|\n";
    for (const auto& r : table.rows) {
        out += fmt::format("| {} | {} | {} | {} | {} | {} |\n", md_cell(r.model), to_string(r.model_class),
                           r.condition.label(), to_string(r.metric), r.percent, md_cell(r.assessment));
    }
    out += "\n";
    for (const auto& note : conventions()) out += note + "\n";
    return out;
}

std::string render_summary_csv(const SummaryTable& table) {
    std::string out = "model,model_size,configuration,condition,metric,score,top_score_percent,assessment\n";
    for (const auto& r : table.rows) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", csv_field(r.model), to_string(r.model_class),
                           csv_field(r.condition.label()), r.condition.token(), to_string(r.metric),
                           json(r.score).dump(), r.percent, csv_field(r.assessment));
    }
    return out;
}

json summary_to_json(const SummaryTable& table) {
    json rows = json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"model", r.model},
                        {"model_size", to_string(r.model_class)},
                        {"configuration", r.condition.label()},
                        {"condition", r.condition.token()},
                        {"metric", to_string(r.metric)},
                        {"score", r.score},
                        {"top_score_percent", r.percent},
                        {"assessment", r.assessment}});
    }
    return json{{"rows", rows}, {"conventions", conventions()}};
}

std::string render_chart_csv(const ChartData& chart) {
    std::string out = "model";
    for (const auto& c : all_conditions()) out += "," + c.token();
    out += ",range_min,range_max\n";
    for (const auto& s : chart.series) {
        out += csv_field(s.model);
        for (const auto& v : s.ragas) out += v ? fmt::format(",{}", to_percent(*v)) : std::string(",");
        if (s.range) out += fmt::format(",{},{}\n", to_percent(s.range->first), to_percent(s.range->second));
        else out += ",,\n";
    }
    return out;
}

json chart_to_json(const ChartData& chart) {
    json series = json::array();
    const auto conds = all_conditions();
    for (const auto& s : chart.series) {
        json bars = json::array();
        for (std::size_t i = 0; i < conds.size(); ++i) {
            bars.push_back({{"condition", conds[i].token()},
                            {"configuration", conds[i].label()},
                            {"ragas", s.ragas[i] ? json(*s.ragas[i]) : json(nullptr)},
                            {"percent", s.ragas[i] ? json(to_percent(*s.ragas[i])) : json(nullptr)}});
        }
        json range = nullptr;
        if (s.range) {
            range = {{"min", s.range->first},
                     {"max", s.range->second},
                     {"min_percent", to_percent(s.range->first)},
                     {"max_percent", to_percent(s.range->second)}};
        }
        series.push_back({{"model", s.model}, {"bars", bars}, {"range", range}});
    }
    return json{{"series", series}};
}

ExportFormat parse_export_format(std::string_view s) {
    if (s == "md" || s == "markdown") return ExportFormat::markdown;
    if (s == "csv") return ExportFormat::csv;
    if (s == "json") return ExportFormat::json;
    throw ValidationError(fmt::format("unknown export format '{}'", s));
}

std::vector<fs::path> export_report(const ExportInputs& inputs, std::span<const ExportFormat> formats,
                                    const fs::path& out_dir) {
    if (formats.empty()) throw ValidationError("no formats requested");
    if (!inputs.summary || !inputs.chart) throw ValidationError("export needs a summary and chart data");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));

    std::vector<fs::path> written;
    auto emit = [&](const char* name, const std::string& content) {
        const fs::path p = out_dir / name;
        write_text(p, content);
        written.push_back(p);
    };
    for (ExportFormat f : formats) {
        switch (f) {
            case ExportFormat::markdown:
                emit("summary.md", render_summary_markdown(*inputs.summary));
                break;
            case ExportFormat::csv:
                emit("summary.csv", render_summary_csv(*inputs.summary));
                emit("ragas_by_condition.csv", render_chart_csv(*inputs.chart));
                break;
            case ExportFormat::json:
                emit("summary.json", summary_to_json(*inputs.summary).dump(2) + "\n");
                emit("ragas_by_condition.json", chart_to_json(*inputs.chart).dump(2) + "\n");
                break;
        }
    }
    if (inputs.records_file) {
        copy_into(*inputs.records_file, out_dir / "records.ndjson");
        written.push_back(out_dir / "records.ndjson");
    }
    if (inputs.manifest_file) {
        copy_into(*inputs.manifest_file, out_dir / "manifest.json");
        written.push_back(out_dir / "manifest.json");
    }
    return written;
}

ReportOptions report_options_from_json(const json& j) {
    ReportOptions o;
    if (!j.is_object()) return o;
    if (j.contains("model_order")) o.model_order = j["model_order"].get<std::vector<std::string>>();
    if (j.contains("annotations")) o.annotations = j["annotations"].get<std::map<std::string, std::string>>();
    return o;
}

}  // namespace ragbench
