#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ragbench {

struct GuidelineDoc {
    std::string doc_id;
    std::string source;
    std::string title;
    std::string body;
};

/// A window over a document body. Offsets and lengths count Unicode code points.
struct GuidelineChunk {
    std::string chunk_id;
    std::string doc_id;
    std::size_t start_offset = 0;
    std::string text;
    std::optional<std::string> section_hint;

    bool operator==(const GuidelineChunk&) const = default;
};

struct PatientCase {
    std::string case_id;
    std::string history;
    std::string medications;
    std::string labs;
    std::string course;
    std::optional<std::string> pre_diagnosis;
    std::vector<std::string> gold_diagnoses;   // canonical, sorted, unique
    std::vector<std::string> gold_treatments;  // canonical, sorted, unique
};

struct ChunkingParams {
    std::size_t chunk_size = 1200;
    std::size_t overlap = 200;
};

/// Reads every .txt/.md file in `dir`, sorted by doc_id. The first Markdown
/// `# ` heading (or the first non-empty line) becomes the title; a leading
/// `source: NAME` line, if present, sets the source label.
std::vector<GuidelineDoc> load_documents(const std::filesystem::path& dir);

/// Splits `doc.body` into windows of at most `chunk_size` code points that
/// start every `chunk_size - overlap` code points.
std::vector<GuidelineChunk> chunk_document(const GuidelineDoc& doc, std::size_t chunk_size,
                                           std::size_t overlap);

inline std::vector<GuidelineChunk> chunk_document(const GuidelineDoc& doc, const ChunkingParams& p) {
    return chunk_document(doc, p.chunk_size, p.overlap);
}

/// max(1, ceil((len - overlap) / (chunk_size - overlap))).
std::size_t expected_chunk_count(std::size_t length, std::size_t chunk_size, std::size_t overlap);

/// Loads and validates a JSON case file. Gold terms are normalized with an
/// empty synonym table; validation errors name the offending case.
std::vector<PatientCase> load_cases(const std::filesystem::path& path);
std::vector<PatientCase> parse_cases(const std::string& json_text);

}  // namespace ragbench
