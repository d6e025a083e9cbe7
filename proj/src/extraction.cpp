#include "ragbench/extraction.hpp"

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ragbench/errors.hpp"
#include "ragbench/text.hpp"

namespace ragbench {

using nlohmann::json;

TermSet::TermSet(std::initializer_list<std::string> terms) {
    for (const auto& t : terms) insert(t);
}

void TermSet::insert(std::string term) {
    if (term.empty()) throw ValidationError("TermSet cannot hold an empty term");
    terms_.insert(std::move(term));
}

namespace {

bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

// Lowercase, collapse whitespace, strip surrounding punctuation. No synonyms.
std::string basic_normalize(std::string_view raw) {
    std::string s = text::collapse_whitespace(text::to_lower_ascii(raw));
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (is_ascii_punct(s[b]) || s[b] == ' ')) ++b;
    while (e > b && (is_ascii_punct(s[e - 1]) || s[e - 1] == ' ')) --e;
    return s.substr(b, e - b);
}

}  // namespace

void SynonymTable::add(std::string_view surface, std::string_view canonical) {
    const std::string s = basic_normalize(surface);
    const std::string c = basic_normalize(canonical);
    if (s.empty() || c.empty()) throw ValidationError("synonym entries must be non-empty");

    auto bind = [this](const std::string& from, const std::string& to) {
        const auto [it, inserted] = map_.emplace(from, to);
        if (!inserted && it->second != to) {
            throw ValidationError(fmt::format("synonym '{}' maps to both '{}' and '{}'", from, it->second, to));
        }
    };
    bind(c, c);
    bind(s, c);
}

const std::string& SynonymTable::lookup(const std::string& normalized) const {
    const auto it = map_.find(normalized);
    return it == map_.end() ? normalized : it->second;
}

SynonymTable SynonymTable::parse(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("synonym table is not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) throw ValidationError("synonym table must be a JSON object");
    SynonymTable table;
    // Canonical self-bindings first so that entry order never matters.
    for (const auto& [surface, canonical] : j.items()) {
        if (!canonical.is_string()) {
            throw ValidationError(fmt::format("synonym '{}' must map to a string", surface));
        }
        table.add(canonical.get<std::string>(), canonical.get<std::string>());
    }
    for (const auto& [surface, canonical] : j.items()) {
        table.add(surface, canonical.get<std::string>());
    }
    return table;
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read synonym table {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string normalize_term(std::string_view raw, const SynonymTable& table) {
    std::string n = basic_normalize(raw);
    if (n.empty()) throw ValidationError(fmt::format("term '{}' is empty after normalization", raw));
    return table.lookup(n);
}

std::string normalize_term(std::string_view raw) {
    static const SynonymTable empty;
    return normalize_term(raw, empty);
}

std::string to_string(ParseStatus s) {
    switch (s) {
        case ParseStatus::ok: return "ok";
        case ParseStatus::fallback: return "fallback";
        case ParseStatus::unparseable: break;
    }
    return "unparseable";
}

ParseStatus parse_parse_status(std::string_view s) {
    if (s == "ok") return ParseStatus::ok;
    if (s == "fallback") return ParseStatus::fallback;
    if (s == "unparseable") return ParseStatus::unparseable;
    throw ValidationError(fmt::format("unknown parse_status '{}'", s));
}

namespace {

enum class Header { none, diagnoses, treatments };

Header classify_header(const std::string& line) {
    std::string t = text::trim(line);
    std::size_t b = 0;
    while (b < t.size() && (t[b] == '#' || t[b] == '*' || t[b] == '_' || t[b] == ' ')) ++b;
    std::size_t e = t.size();
    while (e > b && (t[e - 1] == '*' || t[e - 1] == '_' || t[e - 1] == ' ')) --e;
    std::string core = t.substr(b, e - b);
    for (char& c : core) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (core == "DIAGNOSES:") return Header::diagnoses;
    if (core == "TREATMENTS:") return Header::treatments;
    return Header::none;
}

// Bullet content for "- x" / "* x" (and numbered items when `numbered`), else nullopt.
std::optional<std::string> bullet_content(const std::string& line, bool numbered) {
    std::string t = text::trim(line);
    if (t.size() >= 2 && (t[0] == '-' || t[0] == '*' || t[0] == '+') && t[1] == ' ') return t.substr(2);
    if (numbered) {
        std::size_t i = 0;
        while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
        if (i > 0 && i + 1 < t.size() && (t[i] == '.' || t[i] == ')') && t[i + 1] == ' ') return t.substr(i + 2);
    }
    return std::nullopt;
}

void add_terms(TermSet& into, const std::vector<std::string>& items, const SynonymTable& table) {
    for (const auto& item : items) {
        try {
            into.insert(normalize_term(item, table));
        } catch (const ValidationError&) {
            // Bullets with no usable text are dropped.
        }
    }
}

// Bullets following `header_line`, skipping blank lines, up to the first other line.
std::vector<std::string> block_items(const std::vector<std::string>& lines, std::size_t header_line) {
    std::vector<std::string> items;
    for (std::size_t i = header_line + 1; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        auto content = bullet_content(lines[i], false);
        if (!content) break;
        items.push_back(std::move(*content));
    }
    return items;
}

}  // namespace

ExtractedAnswer extract_answer_blocks(std::string_view raw_text, const SynonymTable& table) {
    ExtractedAnswer out;
    try {
        const auto lines = text::split_lines(raw_text);
        std::optional<std::size_t> dx_line;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (classify_header(lines[i]) == Header::diagnoses) dx_line = i;
        }
        if (dx_line) {
            add_terms(out.diagnoses, block_items(lines, *dx_line), table);
            for (std::size_t i = *dx_line + 1; i < lines.size(); ++i) {
                if (classify_header(lines[i]) == Header::treatments) {
                    add_terms(out.treatments, block_items(lines, i), table);
                    break;
                }
            }
            out.status = ParseStatus::ok;
            return out;
        }

        // Fallback: the last Markdown list anywhere in the text.
        std::vector<std::string> last_list;
        std::vector<std::string> current;
        for (const auto& line : lines) {
            if (auto content = bullet_content(line, true)) {
                current.push_back(std::move(*content));
            } else if (!current.empty()) {
                last_list = std::move(current);
                current.clear();
            }
        }
        if (!current.empty()) last_list = std::move(current);
        add_terms(out.diagnoses, last_list, table);
        out.status = out.diagnoses.empty() ? ParseStatus::unparseable : ParseStatus::fallback;
    } catch (...) {
        out = ExtractedAnswer{};
    }
    return out;
}

std::string render_answer_block(const TermSet& diagnoses, const TermSet& treatments) {
    std::string out = "DIAGNOSES:\n";
    for (const auto& t : diagnoses) out += "- " + t + "\n";
    out += "TREATMENTS:\n";
    for (const auto& t : treatments) out += "- " + t + "\n";
    return out;
}

}  // namespace ragbench
