#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "cotforge/bench.hpp"
#include "helpers.hpp"

using namespace cotforge;
using testutil::TempDir;

namespace {

BenchmarkSpec spec_of(std::size_t quota, std::size_t cap, std::uint64_t seed = 0) {
    BenchmarkSpec s;
    s.quota_per_department = quota;
    s.per_code_cap = cap;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("round-robin fills strata A,B,A,A on the derived 4-record pool") {
    // strata sizes {A01: 3 records sharing one code, B02: 1}, quota 4, cap 3
    std::vector<ClinicalRecord> pool = {
        testutil::make_record("p1", Department::Respiratory, "A01.1", "condition alpha"),
        testutil::make_record("p2", Department::Respiratory, "A01.1", "condition alpha"),
        testutil::make_record("p3", Department::Respiratory, "A01.1", "condition alpha"),
        testutil::make_record("p4", Department::Respiratory, "B02.2", "condition beta"),
    };
    // pad other departments so only Respiratory is exercised
    BenchmarkSpec spec = spec_of(4, 3);
    std::vector<ClinicalRecord> full = pool;
    for (std::size_t d = 1; d < kDepartments.size(); ++d) {
        for (int i = 0; i < 4; ++i) {
            auto r = testutil::make_record(
                "pad-" + std::to_string(d) + "-" + std::to_string(i), kDepartments[d],
                "C0" + std::to_string(d) + "." + std::to_string(i), "padding condition");
            full.push_back(r);
        }
    }

    auto cases = build_benchmark(full, spec);
    std::vector<BenchmarkCase> resp;
    for (const auto& c : cases) {
        if (c.record.department == Department::Respiratory) resp.push_back(c);
    }
    REQUIRE(resp.size() == 4);
    std::vector<std::string> strata;
    for (const auto& c : resp) strata.push_back(c.stratum);
    CHECK(strata == std::vector<std::string>{"A01", "B02", "A01", "A01"});

    std::set<std::string> ids;
    for (const auto& c : resp) ids.insert(c.record.id);
    CHECK(ids.count("p4") == 1);  // all of B selected
    CHECK(ids.size() == 4);

    auto coverage = coverage_report(resp);
    const auto& cov = coverage.departments.at(Department::Respiratory);
    CHECK(cov.distinct_categories == 2);
    CHECK(cov.max_code_multiplicity == 3);
}

TEST_CASE("quota exactness across all departments") {
    auto pool = testutil::synthetic_pool(30, 12);
    auto cases = build_benchmark(pool, spec_of(20, 3));
    CHECK(cases.size() == 20 * 7);
    std::map<Department, std::size_t> per_dept;
    for (const auto& c : cases) ++per_dept[c.record.department];
    for (Department d : kDepartments) CHECK(per_dept[d] == 20);
}

TEST_CASE("stratum is a prefix of the selected record's code") {
    auto pool = testutil::synthetic_pool(25, 10);
    for (const auto& c : build_benchmark(pool, spec_of(15, 3))) {
        CHECK(starts_with(c.record.reference_diagnosis.icd10, c.stratum));
        CHECK(c.stratum.size() == 3);
    }
}

TEST_CASE("insufficient pool names the department") {
    auto pool = testutil::synthetic_pool(10, 10);
    std::erase_if(pool, [](const ClinicalRecord& r) {
        return r.department == Department::Urology && r.id != "N-0000";
    });
    try {
        build_benchmark(pool, spec_of(5, 3));
        FAIL("expected InsufficientPoolError");
    } catch (const InsufficientPoolError& e) {
        CHECK(e.department() == "Urology");
    }
}

TEST_CASE("caps that make the quota unreachable report the achievable maximum") {
    // 12 records per department but only 2 distinct codes: cap 3 yields at most 6
    auto pool = testutil::synthetic_pool(12, 2);
    try {
        build_benchmark(pool, spec_of(10, 3));
        FAIL("expected InfeasibleSpecError");
    } catch (const InfeasibleSpecError& e) {
        CHECK(e.achievable() == 6);
    }
}

TEST_CASE("per-code multiplicity never exceeds the cap") {
    auto pool = testutil::synthetic_pool(40, 8);
    for (std::size_t cap : {1ul, 2ul, 3ul}) {
        if (8 * cap < 16) continue;  // infeasible combinations are tested elsewhere
        auto cases = build_benchmark(pool, spec_of(16, cap));
        auto coverage = coverage_report(cases);
        for (const auto& [dept, cov] : coverage.departments) {
            CHECK(cov.max_code_multiplicity <= cap);
        }
    }
}

TEST_CASE("diversity: distinct strata used is min(quota, strata available)") {
    auto pool = testutil::synthetic_pool(30, 12);  // codes spread over ceil(12/10)+... strata
    auto cases = build_benchmark(pool, spec_of(5, 3));
    auto coverage = coverage_report(cases);
    std::map<Department, std::set<std::string>> available;
    for (const auto& r : pool) {
        available[r.department].insert(icd10_category(r.reference_diagnosis.icd10));
    }
    for (const auto& [dept, cov] : coverage.departments) {
        CHECK(cov.distinct_categories ==
              std::min<std::size_t>(5, available[dept].size()));
    }
}

TEST_CASE("same pool and spec build an identical benchmark, case order included") {
    auto pool = testutil::synthetic_pool(30, 12);
    auto a = build_benchmark(pool, spec_of(20, 3, 99));
    auto b = build_benchmark(pool, spec_of(20, 3, 99));
    CHECK(a == b);
    auto c = build_benchmark(pool, spec_of(20, 3, 100));
    CHECK(a != c);  // a different seed reshuffles within strata
}

TEST_CASE("coverage report of empty input is all zeros") {
    auto coverage = coverage_report({});
    CHECK(coverage.total_cases == 0);
    CHECK(coverage.departments.empty());
}

TEST_CASE("benchmark JSONL round-trip") {
    TempDir tmp("bench");
    auto pool = testutil::synthetic_pool(10, 5);
    auto cases = build_benchmark(pool, spec_of(6, 3));
    auto path = tmp.file("bench.jsonl");
    write_benchmark(cases, path);
    auto loaded = load_benchmark(path);
    CHECK(loaded == cases);
}

TEST_CASE("benchmark spec invariants") {
    CHECK_THROWS_AS(spec_of(0, 3).validate(), ValidationError);
    CHECK_THROWS_AS(spec_of(5, 0).validate(), ValidationError);
}
