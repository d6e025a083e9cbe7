#include "ragbench/records.hpp"

#include <fstream>

#include <fmt/format.h>

#include "ragbench/errors.hpp"

namespace ragbench {

using nlohmann::json;

namespace {

json prf_to_json(const std::optional<PRF>& p) {
    if (!p) return nullptr;
    return json{{"precision", p->precision}, {"recall", p->recall}, {"f1", p->f1}};
}

std::optional<PRF> prf_from_json(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    const json& p = j[key];
    if (p.is_number()) {
        // Shorthand used by hand-written fixtures: just the F1 value.
        return PRF{0.0, 0.0, p.get<double>()};
    }
    return PRF{p.at("precision").get<double>(), p.at("recall").get<double>(), p.at("f1").get<double>()};
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

}  // namespace

json record_to_json(const ScoreRecord& r) {
    json trace = json::array();
    for (const auto& v : r.ragas.judge_trace) trace.push_back({{"claim", v.claim}, {"supported", v.supported}});
    return json{
        {"case_id", r.case_id},
        {"model", r.model},
        {"model_class", to_string(r.model_class)},
        {"condition", r.condition.token()},
        {"trial", r.trial},
        {"status", to_string(r.status)},
        {"error", r.error},
        {"f1_dx", prf_to_json(r.f1_dx)},
        {"f1_tx", prf_to_json(r.f1_tx)},
        {"ragas",
         {{"faithfulness", opt(r.ragas.faithfulness)},
          {"answer_relevance", opt(r.ragas.answer_relevance)},
          {"composite", opt(r.ragas.composite)},
          {"judge_trace", trace}}},
        {"parse_status", to_string(r.parse_status)},
        {"prompt_hash", r.prompt_hash},
        {"judge_id", r.judge_id},
    };
}

ScoreRecord record_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("record is not a JSON object");
    ScoreRecord r;
    try {
        r.case_id = j.at("case_id").get<std::string>();
        r.model = j.at("model").get<std::string>();
        r.model_class = parse_model_class(j.value("model_class", std::string("SLM")));
        r.condition = Condition::parse(j.at("condition").get<std::string>());
        r.trial = j.value("trial", 0);
        r.status = j.value("status", std::string("ok")) == "error" ? RecordStatus::error : RecordStatus::ok;
        r.error = j.value("error", std::string());
        r.f1_dx = prf_from_json(j, "f1_dx");
        r.f1_tx = prf_from_json(j, "f1_tx");
        if (j.contains("ragas") && j["ragas"].is_object()) {
            const json& g = j["ragas"];
            r.ragas.faithfulness = opt_from(g, "faithfulness");
            r.ragas.answer_relevance = opt_from(g, "answer_relevance");
            r.ragas.composite = opt_from(g, "composite");
            if (g.contains("judge_trace") && g["judge_trace"].is_array()) {
                for (const auto& t : g["judge_trace"]) {
                    r.ragas.judge_trace.push_back({t.at("claim").get<std::string>(), t.at("supported").get<bool>()});
                }
            }
        }
        r.parse_status = parse_parse_status(j.value("parse_status", std::string("ok")));
        r.prompt_hash = j.value("prompt_hash", std::string());
        r.judge_id = j.value("judge_id", std::string());
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("malformed record: {}", e.what()));
    }
    return r;
}

std::string record_to_line(const ScoreRecord& record) { return record_to_json(record).dump(); }

namespace {

std::vector<ScoreRecord> read_impl(const std::filesystem::path& path, bool lenient) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read records file {}", path.string()));
    std::vector<ScoreRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            if (lenient) break;
            throw ValidationError(fmt::format("{}: line {}: malformed record: {}", path.string(), line_no, e.what()));
        }
    }
    return out;
}

}  // namespace

std::vector<ScoreRecord> read_records(const std::filesystem::path& path) { return read_impl(path, false); }

std::vector<ScoreRecord> read_records_lenient(const std::filesystem::path& path) { return read_impl(path, true); }

void write_records(const std::filesystem::path& path, const std::vector<ScoreRecord>& records) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot write {}", tmp.string()));
        for (const auto& r : records) out << record_to_line(r) << '\n';
        if (!out) throw IoError(fmt::format("write failed: {}", tmp.string()));
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError(fmt::format("cannot move {} into place: {}", path.string(), ec.message()));
}

}  // namespace ragbench
