#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "cotforge/backend.hpp"
#include "cotforge/bench.hpp"
#include "cotforge/errors.hpp"
#include "cotforge/prompts.hpp"
#include "cotforge/verify.hpp"

namespace cotforge {

enum class PromptStyle { cot, direct };

inline PromptStyle prompt_style_from_string(std::string_view s) {
    if (s == "cot") return PromptStyle::cot;
    if (s == "direct") return PromptStyle::direct;
    throw ValidationError("unknown prompt style \"" + std::string(s) + "\"");
}

struct DepartmentResult {
    std::size_t n = 0;
    std::size_t correct = 0;

    double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(correct) / n; }
};

struct EvalReport {
    std::map<Department, DepartmentResult> departments;
    std::size_t total_n = 0;
    std::size_t total_correct = 0;
    std::vector<std::string> failure_ids;  // cases with no extractable answer

    double overall_accuracy() const {
        return total_n == 0 ? 0.0 : static_cast<double>(total_correct) / total_n;
    }
};

inline constexpr const char* kFinalDiagnosisPrefix = "FINAL DIAGNOSIS:";

/// Extracts the mandated final line "FINAL DIAGNOSIS: <text>" (last match wins).
inline std::optional<std::string> extract_final_diagnosis(const std::string& reply) {
    std::optional<std::string> found;
    for (const auto& raw : split_lines(reply)) {
        std::string line = trim(raw);
        if (starts_with(line, kFinalDiagnosisPrefix)) {
            std::string rest = trim(line.substr(std::string(kFinalDiagnosisPrefix).size()));
            if (!rest.empty()) found = rest;
        }
    }
    return found;
}

inline MessageList eval_messages(const BenchmarkCase& c, PromptStyle style,
                                 const PromptLibrary& lib) {
    std::string preamble = style == PromptStyle::cot ? lib.eval_cot_preamble : "";
    return MessageList{
        {"user", preamble + compose_question(c.record) + lib.eval_answer_instruction}};
}

/// Runs one model call per case (plus at most one reprompt when the final
/// line is missing), scores answers with the verifier, and aggregates
/// per-department accuracy. Unanswered cases count as incorrect.
inline EvalReport evaluate(const std::vector<BenchmarkCase>& bench, Backend& model,
                           PromptStyle style, const VerifierConfig& verifier,
                           const PromptLibrary& lib = {}, int parallel = 1) {
    if (bench.empty()) throw ValidationError("benchmark is empty");
    if (parallel < 1) throw ValidationError("parallel must be >= 1");

    struct CaseResult {
        std::string id;
        Department department = Department::Respiratory;
        bool answered = false;
        bool correct = false;
    };
    std::vector<CaseResult> results(bench.size());
    std::vector<std::exception_ptr> errors(bench.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= bench.size()) return;
            const auto& c = bench[i];
            CaseResult& r = results[i];
            r.id = c.record.id;
            r.department = c.record.department;
            try {
                MessageList messages = eval_messages(c, style, lib);
                Completion reply = model.complete(messages);
                auto answer = extract_final_diagnosis(reply.text);
                if (!answer) {
                    messages.push_back({"assistant", reply.text});
                    messages.push_back({"user", lib.eval_reprompt});
                    reply = model.complete(messages);
                    answer = extract_final_diagnosis(reply.text);
                }
                if (answer) {
                    r.answered = true;
                    r.correct = verify(*answer, c.record.reference_diagnosis, verifier).correct;
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    if (parallel == 1 || bench.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        int n = std::min<int>(parallel, static_cast<int>(bench.size()));
        for (int t = 0; t < n; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::sort(results.begin(), results.end(),
              [](const CaseResult& a, const CaseResult& b) { return a.id < b.id; });

    EvalReport report;
    for (const auto& r : results) {
        auto& dept = report.departments[r.department];
        ++dept.n;
        ++report.total_n;
        if (r.correct) {
            ++dept.correct;
            ++report.total_correct;
        }
        if (!r.answered) report.failure_ids.push_back(r.id);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

inline ordered_json to_json(const EvalReport& report) {
    ordered_json departments = ordered_json::object();
    for (const auto& [dept, res] : report.departments) {
        departments[to_string(dept)] = ordered_json{
            {"n", res.n}, {"correct", res.correct}, {"accuracy", res.accuracy()}};
    }
    return ordered_json{{"departments", std::move(departments)},
                        {"overall", ordered_json{{"n", report.total_n},
                                                 {"correct", report.total_correct},
                                                 {"accuracy", report.overall_accuracy()}}},
                        {"failure_ids", report.failure_ids}};
}

inline EvalReport report_from_json(const ordered_json& j) {
    EvalReport report;
    for (const auto& [name, res] : j.at("departments").items()) {
        DepartmentResult r;
        r.n = res.at("n").get<std::size_t>();
        r.correct = res.at("correct").get<std::size_t>();
        report.departments.emplace(department_from_string(name), r);
    }
    report.total_n = j.at("overall").at("n").get<std::size_t>();
    report.total_correct = j.at("overall").at("correct").get<std::size_t>();
    report.failure_ids = j.at("failure_ids").get<std::vector<std::string>>();
    return report;
}

struct RenderedReport {
    std::string csv_path;
    std::string json_path;
};

/// Writes report.csv (one row per present department plus an overall row)
/// and plot-ready report.json under out_dir.
inline RenderedReport report_render(const EvalReport& report, const std::string& out_dir) {
    std::string csv_path = out_dir + "/report.csv";
    std::string json_path = out_dir + "/report.json";

    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot write " + csv_path);
    csv << "department,n,correct,accuracy\n";
    char buf[160];
    for (const auto& [dept, res] : report.departments) {
        std::snprintf(buf, sizeof(buf), "%s,%zu,%zu,%.6f", to_string(dept).c_str(), res.n,
                      res.correct, res.accuracy());
        csv << buf << '\n';
    }
    std::snprintf(buf, sizeof(buf), "overall,%zu,%zu,%.6f", report.total_n,
                  report.total_correct, report.overall_accuracy());
    csv << buf << '\n';
    if (!csv) throw IoError("write failed for " + csv_path);

    std::ofstream json_out(json_path);
    if (!json_out) throw IoError("cannot write " + json_path);
    json_out << to_json(report).dump(2) << '\n';
    if (!json_out) throw IoError("write failed for " + json_path);

    return RenderedReport{csv_path, json_path};
}

}  // namespace cotforge
