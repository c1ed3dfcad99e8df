#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cotforge/errors.hpp"
#include "cotforge/icd10.hpp"
#include "cotforge/text.hpp"

namespace cotforge {

using ordered_json = nlohmann::ordered_json;

struct DiagnosisLabel {
    std::string icd10;
    std::string name;

    bool operator==(const DiagnosisLabel&) const = default;
};

inline void validate_diagnosis(const DiagnosisLabel& d) {
    if (!is_valid_icd10(d.icd10)) {
        throw ValidationError("invalid ICD-10 code \"" + d.icd10 + "\"");
    }
    if (d.name.empty()) {
        throw ValidationError("diagnosis name is empty for code \"" + d.icd10 + "\"");
    }
}

/// One anonymized clinical case.
struct ClinicalRecord {
    std::string id;
    Department department = Department::Respiratory;
    std::string history;
    std::string findings;  // may be empty
    DiagnosisLabel reference_diagnosis;
    Language language = Language::en;

    bool operator==(const ClinicalRecord&) const = default;
};

inline void validate_record(const ClinicalRecord& r) {
    if (r.id.empty()) throw ValidationError("record id is empty");
    if (r.history.empty()) {
        throw ValidationError("record \"" + r.id + "\" has empty history");
    }
    validate_diagnosis(r.reference_diagnosis);
}

struct SynthesisProvenance {
    std::string record_id;
    std::string generator_id;
    int attempts_used = 1;
    bool guided = false;
    std::vector<std::string> strategies_applied;

    bool operator==(const SynthesisProvenance&) const = default;
};

/// SFT triple: question, thinking (long CoT), response (long response).
struct CoTSample {
    std::string question;
    std::string thinking;
    std::string response;
    SynthesisProvenance provenance;

    bool operator==(const CoTSample&) const = default;
};

inline void validate_sample(const CoTSample& s, int max_attempts = 3) {
    if (s.question.empty()) throw ValidationError("sample question is empty");
    if (s.thinking.empty()) throw ValidationError("sample thinking is empty");
    if (s.response.empty()) throw ValidationError("sample response is empty");
    if (s.provenance.attempts_used < 1) {
        throw ValidationError("sample attempts_used must be >= 1");
    }
    if (!s.provenance.guided && s.provenance.attempts_used > max_attempts) {
        throw ValidationError("unguided sample used " +
                              std::to_string(s.provenance.attempts_used) +
                              " attempts, limit is " + std::to_string(max_attempts));
    }
    if (s.provenance.guided && s.provenance.attempts_used != max_attempts + 1) {
        throw ValidationError("guided sample must record attempts_used = " +
                              std::to_string(max_attempts + 1));
    }
}

// ---------------------------------------------------------------------------
// JSON mapping. Field ordering in output files is fixed: `thinking` always
// precedes `response`.
// ---------------------------------------------------------------------------

inline ordered_json to_json(const ClinicalRecord& r) {
    return ordered_json{
        {"id", r.id},
        {"department", to_string(r.department)},
        {"history", r.history},
        {"findings", r.findings},
        {"reference_diagnosis",
         ordered_json{{"icd10", r.reference_diagnosis.icd10}, {"name", r.reference_diagnosis.name}}},
        {"language", to_string(r.language)},
    };
}

inline ClinicalRecord record_from_json(const ordered_json& j) {
    ClinicalRecord r;
    r.id = j.at("id").get<std::string>();
    r.department = department_from_string(j.at("department").get<std::string>());
    r.history = j.at("history").get<std::string>();
    r.findings = j.value("findings", std::string{});
    const auto& d = j.at("reference_diagnosis");
    r.reference_diagnosis.icd10 = d.at("icd10").get<std::string>();
    r.reference_diagnosis.name = d.at("name").get<std::string>();
    r.language = language_from_string(j.at("language").get<std::string>());
    validate_record(r);
    return r;
}

inline ordered_json to_json(const CoTSample& s) {
    return ordered_json{
        {"question", s.question},
        {"thinking", s.thinking},
        {"response", s.response},
        {"provenance",
         ordered_json{{"record_id", s.provenance.record_id},
                      {"generator_id", s.provenance.generator_id},
                      {"attempts_used", s.provenance.attempts_used},
                      {"guided", s.provenance.guided},
                      {"strategies_applied", s.provenance.strategies_applied}}},
    };
}

inline CoTSample sample_from_json(const ordered_json& j, int max_attempts = 3) {
    CoTSample s;
    s.question = j.at("question").get<std::string>();
    s.thinking = j.at("thinking").get<std::string>();
    s.response = j.at("response").get<std::string>();
    const auto& p = j.at("provenance");
    s.provenance.record_id = p.value("record_id", std::string{});
    s.provenance.generator_id = p.value("generator_id", std::string{});
    s.provenance.attempts_used = p.at("attempts_used").get<int>();
    s.provenance.guided = p.at("guided").get<bool>();
    s.provenance.strategies_applied =
        p.value("strategies_applied", std::vector<std::string>{});
    validate_sample(s, max_attempts);
    return s;
}

// ---------------------------------------------------------------------------
// JSON-Lines I/O
// ---------------------------------------------------------------------------

/// Parses one JSONL file, calling `fn(json, line_number)` per line.
/// Every line either parses or raises a LineError; nothing is skipped.
template <typename Fn>
void for_each_jsonl_line(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw LineError("malformed JSON in " + path + ": " + e.what(), lineno);
        }
        try {
            fn(j, lineno);
        } catch (const LineError&) {
            throw;
        } catch (const ValidationError& e) {
            throw LineError(std::string(e.what()) + " in " + path, lineno);
        }
    }
}

inline std::vector<ClinicalRecord> load_records(const std::string& path) {
    std::vector<ClinicalRecord> records;
    std::set<std::string> ids;
    for_each_jsonl_line(path, [&](const ordered_json& j, std::size_t) {
        ClinicalRecord r = record_from_json(j);
        if (!ids.insert(r.id).second) {
            throw ValidationError("duplicate record id \"" + r.id + "\"");
        }
        records.push_back(std::move(r));
    });
    return records;
}

inline void write_records(const std::vector<ClinicalRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& r : records) {
        validate_record(r);
        out << to_json(r).dump() << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

inline std::vector<CoTSample> load_samples(const std::string& path, int max_attempts = 3) {
    std::vector<CoTSample> samples;
    for_each_jsonl_line(path, [&](const ordered_json& j, std::size_t) {
        samples.push_back(sample_from_json(j, max_attempts));
    });
    return samples;
}

/// Validates and writes samples as JSON-Lines; returns the number written.
inline std::size_t write_samples(const std::vector<CoTSample>& samples, const std::string& path,
                                 int max_attempts = 3) {
    for (const auto& s : samples) validate_sample(s, max_attempts);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& s : samples) {
        out << to_json(s).dump() << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
    return samples.size();
}

// ---------------------------------------------------------------------------
// Taxonomy file: JSON tree {"code", "description", "department"?, "children"?}
// ---------------------------------------------------------------------------

inline TaxonomyNode taxonomy_node_from_json(const ordered_json& j) {
    TaxonomyNode n;
    n.code = j.at("code").get<std::string>();
    n.description = j.value("description", std::string{});
    if (j.contains("department") && !j.at("department").is_null()) {
        n.department = department_from_string(j.at("department").get<std::string>());
    }
    if (j.contains("children")) {
        for (const auto& c : j.at("children")) {
            n.children.push_back(taxonomy_node_from_json(c));
        }
    }
    return n;
}

inline IcdTaxonomy load_taxonomy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed taxonomy file " + path + ": " + e.what());
    }
    std::vector<TaxonomyNode> roots;
    if (j.is_array()) {
        for (const auto& n : j) roots.push_back(taxonomy_node_from_json(n));
    } else {
        roots.push_back(taxonomy_node_from_json(j));
    }
    return IcdTaxonomy(std::move(roots));
}

}  // namespace cotforge
