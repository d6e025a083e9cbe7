#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ragbench/metrics.hpp"

namespace ragbench {

struct ReportOptions {
    /// Display order of models; unlisted models follow alphabetically.
    std::vector<std::string> model_order;
    /// "model|metric" (metric as "F1-Dx", "F1-Tx", "RAGAS") -> assessment text.
    std::map<std::string, std::string> annotations;
};

struct SummaryRow {
    std::string model;
    ModelClass model_class = ModelClass::SLM;
    Condition condition;
    Metric metric = Metric::f1_dx;
    double score = 0.0;  // [0, 1]
    int percent = 0;     // round half up of 100 * score
    std::string assessment;

    bool operator==(const SummaryRow&) const = default;
};

struct SummaryTable {
    std::vector<SummaryRow> rows;
};

/// Half-up rounding of 100 * score, clamped to [0, 100].
int to_percent(double score);

/// One row per (model, metric) present in the aggregates, at the model's best
/// condition. F1 rows come first, then RAGAS; models follow options.model_order.
SummaryTable summary_table(std::span<const AggregateCell> cells, const ReportOptions& options = {});

struct ChartSeries {
    std::string model;
    std::array<std::optional<double>, 4> ragas;  // indexed like all_conditions()
    std::optional<std::pair<double, double>> range;
};

struct ChartData {
    std::vector<ChartSeries> series;
};

ChartData ragas_chart_data(std::span<const AggregateCell> cells, const ReportOptions& options = {});

std::string render_summary_markdown(const SummaryTable& table);
std::string render_summary_csv(const SummaryTable& table);
nlohmann::json summary_to_json(const SummaryTable& table);
std::string render_chart_csv(const ChartData& chart);
nlohmann::json chart_to_json(const ChartData& chart);

enum class ExportFormat { markdown, csv, json };

ExportFormat parse_export_format(std::string_view s);

struct ExportInputs {
    const SummaryTable* summary = nullptr;
    const ChartData* chart = nullptr;
    std::optional<std::filesystem::path> records_file;   // copied as records.ndjson
    std::optional<std::filesystem::path> manifest_file;  // copied as manifest.json
};

/// Writes the requested files into `out_dir` and returns their paths.
/// Throws ValidationError "no formats requested" on an empty list.
std::vector<std::filesystem::path> export_report(const ExportInputs& inputs,
                                                 std::span<const ExportFormat> formats,
                                                 const std::filesystem::path& out_dir);

/// Reads report options from JSON {"model_order": [...], "annotations": {...}}.
ReportOptions report_options_from_json(const nlohmann::json& j);

}  // namespace ragbench
