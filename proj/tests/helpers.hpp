#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "cotforge/icd10_subset.hpp"
#include "cotforge/mock_backend.hpp"
#include "cotforge/record.hpp"

namespace testutil {

using namespace cotforge;

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("cotforge-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string dir() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline ClinicalRecord make_record(const std::string& id, Department dept,
                                  const std::string& icd10, const std::string& name) {
    ClinicalRecord r;
    r.id = id;
    r.department = dept;
    r.history = "A patient presents with symptoms consistent with " + name + ".";
    r.findings = "Findings support " + name + ".";
    r.reference_diagnosis = DiagnosisLabel{icd10, name};
    r.language = Language::en;
    return r;
}

inline ClinicalRecord sample_record(const std::string& id = "r1") {
    return make_record(id, Department::Endocrinology, "E11.9", "Type 2 diabetes mellitus");
}

/// Synthetic record pool: `per_dept` records per department, cycling over
/// `distinct_codes` generated full codes per department.
inline std::vector<ClinicalRecord> synthetic_pool(std::size_t per_dept,
                                                  std::size_t distinct_codes) {
    static const char chapter[7] = {'J', 'K', 'N', 'I', 'D', 'G', 'E'};
    std::vector<ClinicalRecord> pool;
    for (std::size_t d = 0; d < kDepartments.size(); ++d) {
        for (std::size_t i = 0; i < per_dept; ++i) {
            std::size_t code_index = i % distinct_codes;
            char code[16];
            std::snprintf(code, sizeof(code), "%c%02zu.%zu", chapter[d], code_index / 10 % 100,
                          code_index % 10);
            std::string name = "synthetic condition " + std::string(1, chapter[d]) + "-" +
                               std::to_string(code_index);
            char id[32];
            std::snprintf(id, sizeof(id), "%c-%04zu", chapter[d], i);
            pool.push_back(make_record(id, kDepartments[d], code, name));
        }
    }
    return pool;
}

/// Generator script for an immediately-successful synthesis of `record`:
/// one search reply, one reformat reply, one response reply.
inline std::vector<ScriptEntry> success_script(const ClinicalRecord& r) {
    const std::string& name = r.reference_diagnosis.name;
    return {
        ScriptEntry::reply("The presentation points toward " + name + ".\nANSWER: " + name),
        ScriptEntry::reply("hmm, the presentation points toward " + name + "."),
        ScriptEntry::reply("Symptom analysis complete. Final diagnosis: " + name + "."),
    };
}

}  // namespace testutil
