#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace ragbench {

/// One cell of the retrieval x pre-diagnosis experiment matrix.
struct Condition {
    bool rag_enabled = false;
    bool prediagnosis_provided = false;

    bool operator==(const Condition&) const = default;

    /// "rag+prediag", "norag+noprediag", ...
    std::string token() const;
    /// "RAG, With Pre-Diagnosis", "No RAG, No Pre-Diagnosis", ...
    std::string label() const;
    /// 0 = no assistance ... 3 = retrieval and pre-diagnosis. Used for ordering and ties.
    int assistance_level() const;

    /// Accepts "rag+prediag" style tokens, in either order.
    static Condition parse(std::string_view token);
};

/// All four conditions ordered by assistance_level().
std::array<Condition, 4> all_conditions();

/// Comma-separated condition tokens; "all" expands to all_conditions().
std::vector<Condition> parse_condition_list(std::string_view csv);

}  // namespace ragbench
