#pragma once

#include <deque>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cotforge/errors.hpp"
#include "cotforge/icd10.hpp"
#include "cotforge/record.hpp"

namespace cotforge {

struct BenchmarkSpec {
    std::size_t quota_per_department = 500;
    std::size_t per_code_cap = 3;
    std::uint64_t seed = 0;

    void validate() const {
        if (quota_per_department < 1) throw ValidationError("quota must be >= 1");
        if (per_code_cap < 1) throw ValidationError("per-code cap must be >= 1");
    }
};

struct BenchmarkCase {
    ClinicalRecord record;
    std::string stratum;  // 3-character ICD-10 category, prefix of the record's code

    bool operator==(const BenchmarkCase&) const = default;
};

inline ordered_json to_json(const BenchmarkCase& c) {
    return ordered_json{{"record", to_json(c.record)}, {"stratum", c.stratum}};
}

inline BenchmarkCase case_from_json(const ordered_json& j) {
    BenchmarkCase c;
    c.record = record_from_json(j.at("record"));
    c.stratum = j.at("stratum").get<std::string>();
    if (!starts_with(c.record.reference_diagnosis.icd10, c.stratum)) {
        throw ValidationError("stratum \"" + c.stratum + "\" is not a prefix of code \"" +
                              c.record.reference_diagnosis.icd10 + "\"");
    }
    return c;
}

inline std::vector<BenchmarkCase> load_benchmark(const std::string& path) {
    std::vector<BenchmarkCase> cases;
    for_each_jsonl_line(path, [&](const ordered_json& j, std::size_t) {
        cases.push_back(case_from_json(j));
    });
    return cases;
}

inline void write_benchmark(const std::vector<BenchmarkCase>& cases, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& c : cases) out << to_json(c).dump() << '\n';
    if (!out) throw IoError("write failed for " + path);
}

namespace detail {

// Portable Fisher-Yates; std::shuffle draws are not pinned across standard
// libraries, this is.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(items[i - 1], items[j]);
    }
}

inline std::mt19937_64 stratum_rng(std::uint64_t seed, std::size_t dept_index,
                                   const std::string& stratum) {
    std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffffu),
                      static_cast<unsigned>(seed >> 32),
                      static_cast<unsigned>(dept_index),
                      static_cast<unsigned>(stratum.size() >= 1 ? stratum[0] : 0),
                      static_cast<unsigned>(stratum.size() >= 2 ? stratum[1] : 0),
                      static_cast<unsigned>(stratum.size() >= 3 ? stratum[2] : 0)};
    return std::mt19937_64(seq);
}

}  // namespace detail

/// Builds a stratified benchmark: within each department, 3-character ICD-10
/// categories are filled round-robin (one case per stratum per round, seeded
/// shuffle within each stratum) until the quota is met, and no full code
/// contributes more than per_code_cap cases.
inline std::vector<BenchmarkCase> build_benchmark(const std::vector<ClinicalRecord>& pool,
                                                  const BenchmarkSpec& spec) {
    spec.validate();

    std::map<Department, std::vector<const ClinicalRecord*>> by_department;
    for (const auto& r : pool) {
        validate_record(r);
        by_department[r.department].push_back(&r);
    }

    std::vector<BenchmarkCase> cases;
    for (std::size_t d = 0; d < kDepartments.size(); ++d) {
        Department dept = kDepartments[d];
        auto it = by_department.find(dept);
        std::size_t pool_size = it == by_department.end() ? 0 : it->second.size();
        if (pool_size < spec.quota_per_department) {
            throw InsufficientPoolError(to_string(dept), pool_size, spec.quota_per_department);
        }

        // group into strata, preserving pool order before the seeded shuffle
        std::map<std::string, std::vector<const ClinicalRecord*>> strata;
        std::map<std::string, std::size_t> code_totals;
        for (const auto* r : it->second) {
            strata[icd10_category(r->reference_diagnosis.icd10)].push_back(r);
            ++code_totals[r->reference_diagnosis.icd10];
        }

        std::size_t achievable = 0;
        for (const auto& [code, count] : code_totals) {
            achievable += std::min(count, spec.per_code_cap);
        }
        if (achievable < spec.quota_per_department) {
            throw InfeasibleSpecError(to_string(dept), achievable, spec.quota_per_department);
        }

        std::vector<std::string> stratum_order;
        std::map<std::string, std::deque<const ClinicalRecord*>> queues;
        for (auto& [category, records] : strata) {
            stratum_order.push_back(category);
            auto rng = detail::stratum_rng(spec.seed, d, category);
            detail::deterministic_shuffle(records, rng);
            queues.emplace(category, std::deque<const ClinicalRecord*>(records.begin(),
                                                                       records.end()));
        }

        std::map<std::string, std::size_t> code_used;
        std::size_t selected = 0;
        while (selected < spec.quota_per_department) {
            std::size_t at_round_start = selected;
            for (const auto& category : stratum_order) {
                if (selected >= spec.quota_per_department) break;
                auto& queue = queues[category];
                const ClinicalRecord* pick = nullptr;
                while (!queue.empty()) {
                    const ClinicalRecord* candidate = queue.front();
                    queue.pop_front();
                    if (code_used[candidate->reference_diagnosis.icd10] < spec.per_code_cap) {
                        pick = candidate;
                        break;
                    }
                }
                if (!pick) continue;
                ++code_used[pick->reference_diagnosis.icd10];
                cases.push_back(BenchmarkCase{*pick, category});
                ++selected;
            }
            if (selected == at_round_start) {
                throw InfeasibleSpecError(to_string(dept), selected, spec.quota_per_department);
            }
        }
    }
    return cases;
}

// ---------------------------------------------------------------------------
// Coverage report
// ---------------------------------------------------------------------------

struct DepartmentCoverage {
    std::size_t cases = 0;
    std::size_t distinct_categories = 0;
    std::size_t distinct_codes = 0;
    std::size_t max_code_multiplicity = 0;
};

struct CoverageReport {
    std::map<Department, DepartmentCoverage> departments;
    std::size_t total_cases = 0;
};

inline CoverageReport coverage_report(const std::vector<BenchmarkCase>& cases) {
    CoverageReport report;
    std::map<Department, std::set<std::string>> categories;
    std::map<Department, std::map<std::string, std::size_t>> codes;
    for (const auto& c : cases) {
        Department d = c.record.department;
        ++report.departments[d].cases;
        categories[d].insert(c.stratum);
        ++codes[d][c.record.reference_diagnosis.icd10];
        ++report.total_cases;
    }
    for (auto& [dept, cov] : report.departments) {
        cov.distinct_categories = categories[dept].size();
        cov.distinct_codes = codes[dept].size();
        for (const auto& [code, count] : codes[dept]) {
            cov.max_code_multiplicity = std::max(cov.max_code_multiplicity, count);
        }
    }
    return report;
}

inline ordered_json to_json(const CoverageReport& report) {
    ordered_json departments = ordered_json::object();
    for (const auto& [dept, cov] : report.departments) {
        departments[to_string(dept)] =
            ordered_json{{"cases", cov.cases},
                         {"distinct_categories", cov.distinct_categories},
                         {"distinct_codes", cov.distinct_codes},
                         {"max_code_multiplicity", cov.max_code_multiplicity}};
    }
    return ordered_json{{"total_cases", report.total_cases},
                        {"departments", std::move(departments)}};
}

}  // namespace cotforge
