#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragbench/metrics.hpp"

namespace ragbench {

nlohmann::json record_to_json(const ScoreRecord& record);
/// Missing or null metric fields are read as absent.
ScoreRecord record_from_json(const nlohmann::json& j);

/// One compact JSON object per line.
std::string record_to_line(const ScoreRecord& record);

/// Strict reader: a malformed line throws ValidationError naming its 1-based
/// line number. Blank lines are skipped.
std::vector<ScoreRecord> read_records(const std::filesystem::path& path);

/// Lenient reader for crash recovery: stops at the first malformed line.
std::vector<ScoreRecord> read_records_lenient(const std::filesystem::path& path);

void write_records(const std::filesystem::path& path, const std::vector<ScoreRecord>& records);

}  // namespace ragbench
