#include "ragbench/condition.hpp"

#include <algorithm>
#include <optional>

#include <fmt/format.h>

#include "ragbench/errors.hpp"
#include "ragbench/text.hpp"

namespace ragbench {

std::string Condition::token() const {
    return fmt::format("{}+{}", rag_enabled ? "rag" : "norag", prediagnosis_provided ? "prediag" : "noprediag");
}

std::string Condition::label() const {
    return fmt::format("{}, {}", rag_enabled ? "RAG" : "No RAG",
                       prediagnosis_provided ? "With Pre-Diagnosis" : "No Pre-Diagnosis");
}

int Condition::assistance_level() const {
    // Pre-diagnosis is treated as stronger assistance than retrieval.
    return (prediagnosis_provided ? 2 : 0) + (rag_enabled ? 1 : 0);
}

Condition Condition::parse(std::string_view token) {
    const std::string t = text::to_lower_ascii(text::trim(token));
    std::optional<bool> rag;
    std::optional<bool> prediag;
    std::size_t start = 0;
    while (start <= t.size()) {
        const std::size_t plus = t.find('+', start);
        const std::string part = t.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
        auto set = [&](std::optional<bool>& slot, bool value) {
            if (slot) throw ValidationError(fmt::format("condition '{}' sets '{}' twice", t, part));
            slot = value;
        };
        if (part == "rag") set(rag, true);
        else if (part == "norag") set(rag, false);
        else if (part == "prediag") set(prediag, true);
        else if (part == "noprediag") set(prediag, false);
        else throw ValidationError(fmt::format("unknown condition token '{}' in '{}'", part, t));
        if (plus == std::string::npos) break;
        start = plus + 1;
    }
    if (!rag || !prediag) {
        throw ValidationError(fmt::format("condition '{}' must name both rag/norag and prediag/noprediag", t));
    }
    return {*rag, *prediag};
}

std::array<Condition, 4> all_conditions() {
    return {Condition{false, false}, Condition{true, false}, Condition{false, true}, Condition{true, true}};
}

std::vector<Condition> parse_condition_list(std::string_view csv) {
    std::vector<Condition> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t comma = csv.find(',', start);
        const std::string item = text::trim(csv.substr(start, comma == std::string_view::npos ? csv.size() - start : comma - start));
        if (text::to_lower_ascii(item) == "all") {
            for (const auto& c : all_conditions()) out.push_back(c);
        } else if (!item.empty()) {
            out.push_back(Condition::parse(item));
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    std::vector<Condition> unique;
    for (const auto& c : out) {
        if (std::find(unique.begin(), unique.end(), c) == unique.end()) unique.push_back(c);
    }
    if (unique.empty()) throw ValidationError("no conditions selected");
    return unique;
}

}  // namespace ragbench
