#include "ragbench/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ragbench/errors.hpp"
#include "ragbench/extraction.hpp"
#include "ragbench/text.hpp"

namespace ragbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string heading_text(const std::string& line) {
    std::size_t i = 0;
    while (i < line.size() && line[i] == '#') ++i;
    return text::trim(std::string_view(line).substr(i));
}

bool is_heading(std::string_view line) {
    if (line.empty() || line.front() != '#') return false;
    std::size_t i = 0;
    while (i < line.size() && line[i] == '#') ++i;
    return i <= 6 && (i == line.size() || line[i] == ' ');
}

std::string derive_title(const std::string& body, const std::string& fallback) {
    std::string first_line;
    for (const auto& line : text::split_lines(body)) {
        if (is_heading(line)) return heading_text(line);
        if (first_line.empty()) first_line = text::trim(line);
    }
    return first_line.empty() ? fallback : first_line;
}

// "eular_ra" -> "EULAR"
std::string derive_source(const std::string& doc_id) {
    const std::string head = doc_id.substr(0, doc_id.find_first_of("_-"));
    std::string out = head;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

struct Heading {
    std::size_t offset;  // code points
    std::string text;
};

std::vector<Heading> find_headings(const std::string& body) {
    std::vector<Heading> out;
    std::size_t cp_offset = 0;
    for (const auto& line : text::split_lines(body)) {
        if (is_heading(line)) out.push_back({cp_offset, heading_text(line)});
        cp_offset += text::utf8_length(line) + 1;
    }
    return out;
}

std::string required_string(const json& obj, const char* key, const std::string& case_label) {
    if (!obj.contains(key) || !obj[key].is_string()) {
        throw ValidationError(fmt::format("case {}: field '{}' missing or not a string", case_label, key));
    }
    return obj[key].get<std::string>();
}

std::vector<std::string> gold_terms(const json& obj, const char* key, const std::string& case_id) {
    if (!obj.contains(key) || !obj[key].is_array()) {
        throw ValidationError(fmt::format("case {}: field '{}' missing or not an array", case_id, key));
    }
    std::set<std::string> terms;
    for (const auto& item : obj[key]) {
        if (!item.is_string()) {
            throw ValidationError(fmt::format("case {}: '{}' entries must be strings", case_id, key));
        }
        const std::string term = item.get<std::string>();
        std::string canonical;
        try {
            canonical = normalize_term(term);
        } catch (const ValidationError&) {
            throw ValidationError(fmt::format("case {}: empty term in '{}'", case_id, key));
        }
        if (canonical != term) {
            throw ValidationError(fmt::format("case {}: term \"{}\" in '{}' is not canonical (expected \"{}\")",
                                              case_id, term, key, canonical));
        }
        terms.insert(term);
    }
    return {terms.begin(), terms.end()};
}

}  // namespace

std::vector<GuidelineDoc> load_documents(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        throw IoError(fmt::format("corpus directory not readable: {}", dir.string()));
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext == ".txt" || ext == ".md") files.push_back(entry.path());
    }
    if (ec) throw IoError(fmt::format("cannot list {}: {}", dir.string(), ec.message()));

    std::vector<GuidelineDoc> docs;
    std::set<std::string> seen;
    for (const auto& path : files) {
        GuidelineDoc doc;
        doc.doc_id = path.stem().string();
        if (!seen.insert(doc.doc_id).second) {
            throw ValidationError(fmt::format("duplicate doc_id '{}' ({})", doc.doc_id, path.filename().string()));
        }
        doc.body = read_file(path);
        if (!text::is_valid_utf8(doc.body)) {
            throw IoError(fmt::format("file is not valid UTF-8: {}", path.filename().string()));
        }
        if (text::trim(doc.body).empty()) {
            throw ValidationError(fmt::format("document is empty: {}", path.filename().string()));
        }
        doc.title = derive_title(doc.body, doc.doc_id);
        doc.source = derive_source(doc.doc_id);
        if (const auto lines = text::split_lines(doc.body); !lines.empty() && lines.front().rfind("source:", 0) == 0) {
            if (auto label = text::trim(std::string_view(lines.front()).substr(7)); !label.empty()) doc.source = label;
        }
        docs.push_back(std::move(doc));
    }
    std::sort(docs.begin(), docs.end(),
              [](const GuidelineDoc& a, const GuidelineDoc& b) { return a.doc_id < b.doc_id; });
    return docs;
}

std::size_t expected_chunk_count(std::size_t length, std::size_t chunk_size, std::size_t overlap) {
    if (overlap >= chunk_size) throw ValidationError("overlap must be smaller than chunk_size");
    if (length <= overlap) return 1;
    const std::size_t stride = chunk_size - overlap;
    return std::max<std::size_t>(1, (length - overlap + stride - 1) / stride);
}

std::vector<GuidelineChunk> chunk_document(const GuidelineDoc& doc, std::size_t chunk_size,
                                           std::size_t overlap) {
    if (chunk_size == 0 || overlap >= chunk_size) {
        throw ValidationError(fmt::format("invalid chunking: chunk_size={} overlap={} (need 0 <= overlap < chunk_size)",
                                          chunk_size, overlap));
    }
    const std::vector<std::size_t> bounds = text::utf8_boundaries(doc.body);
    const std::size_t length = bounds.size() - 1;
    const std::size_t stride = chunk_size - overlap;
    const std::vector<Heading> headings = find_headings(doc.body);

    std::vector<GuidelineChunk> chunks;
    for (std::size_t start = 0;; start += stride) {
        const std::size_t end = std::min(start + chunk_size, length);
        GuidelineChunk chunk;
        chunk.chunk_id = fmt::format("{}#{}", doc.doc_id, chunks.size());
        chunk.doc_id = doc.doc_id;
        chunk.start_offset = start;
        chunk.text = doc.body.substr(bounds[start], bounds[end] - bounds[start]);

        // First heading inside the window, else the nearest one before it.
        for (const auto& h : headings) {
            if (h.offset >= end) break;
            if (h.offset >= start) {
                chunk.section_hint = h.text;
                break;
            }
            chunk.section_hint = h.text;
        }
        chunks.push_back(std::move(chunk));
        if (end >= length) break;
    }
    return chunks;
}

std::vector<PatientCase> parse_cases(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("case file is not valid JSON: {}", e.what()));
    }
    if (!root.is_array()) throw ValidationError("case file must be a JSON array of case objects");

    std::vector<PatientCase> cases;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const json& obj = root[i];
        const std::string fallback_label = fmt::format("#{}", i);
        if (!obj.is_object()) throw ValidationError(fmt::format("case {}: not an object", fallback_label));

        PatientCase c;
        c.case_id = required_string(obj, "case_id", fallback_label);
        if (text::trim(c.case_id).empty()) {
            throw ValidationError(fmt::format("case {}: empty case_id", fallback_label));
        }
        if (!ids.insert(c.case_id).second) {
            throw ValidationError(fmt::format("case {}: duplicate case_id", c.case_id));
        }
        c.history = required_string(obj, "history", c.case_id);
        c.medications = required_string(obj, "medications", c.case_id);
        c.labs = required_string(obj, "labs", c.case_id);
        c.course = required_string(obj, "course", c.case_id);
        if (obj.contains("pre_diagnosis") && !obj["pre_diagnosis"].is_null()) {
            if (!obj["pre_diagnosis"].is_string()) {
                throw ValidationError(fmt::format("case {}: pre_diagnosis must be a string or null", c.case_id));
            }
            c.pre_diagnosis = obj["pre_diagnosis"].get<std::string>();
        }
        c.gold_diagnoses = gold_terms(obj, "gold_diagnoses", c.case_id);
        if (c.gold_diagnoses.empty()) {
            throw ValidationError(fmt::format("case {}: gold_diagnoses is empty", c.case_id));
        }
        c.gold_treatments = gold_terms(obj, "gold_treatments", c.case_id);
        cases.push_back(std::move(c));
    }
    return cases;
}

std::vector<PatientCase> load_cases(const fs::path& path) {
    return parse_cases(read_file(path));
}

}  // namespace ragbench
