#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ragbench {

/// Set of canonical terms: lowercase, trimmed, single-spaced, non-empty.
class TermSet {
public:
    TermSet() = default;
    /// Inserts as-is; callers pass canonical strings.
    TermSet(std::initializer_list<std::string> terms);

    void insert(std::string term);
    bool contains(const std::string& term) const { return terms_.count(term) != 0; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }
    const std::set<std::string>& terms() const noexcept { return terms_; }

    auto begin() const { return terms_.begin(); }
    auto end() const { return terms_.end(); }

    bool operator==(const TermSet&) const = default;

private:
    std::set<std::string> terms_;
};

/// Surface form (matched case-insensitively after normalization) -> canonical term.
class SynonymTable {
public:
    SynonymTable() = default;

    /// Throws ValidationError when the mapping is not functional.
    void add(std::string_view surface, std::string_view canonical);
    /// Canonical form for an already-normalized surface, or the input itself.
    const std::string& lookup(const std::string& normalized) const;
    std::size_t size() const noexcept { return map_.size(); }
    const std::map<std::string, std::string>& entries() const noexcept { return map_; }

    static SynonymTable parse(const std::string& json_text);
    static SynonymTable load(const std::filesystem::path& path);

private:
    std::map<std::string, std::string> map_;
};

/// Lowercase, collapse whitespace, strip surrounding punctuation, map synonyms.
/// Throws ValidationError when nothing is left.
std::string normalize_term(std::string_view raw, const SynonymTable& table);
std::string normalize_term(std::string_view raw);

enum class ParseStatus { ok, fallback, unparseable };

std::string to_string(ParseStatus s);
ParseStatus parse_parse_status(std::string_view s);

struct ExtractedAnswer {
    TermSet diagnoses;
    TermSet treatments;
    ParseStatus status = ParseStatus::unparseable;
};

/// Reads the `DIAGNOSES:` / `TREATMENTS:` bullet blocks. Without them, the last
/// Markdown list in the text is taken as the diagnoses (status "fallback").
/// Never throws.
ExtractedAnswer extract_answer_blocks(std::string_view raw_text, const SynonymTable& table);

/// Inverse of extract_answer_blocks for a well-formed answer.
std::string render_answer_block(const TermSet& diagnoses, const TermSet& treatments);

}  // namespace ragbench
