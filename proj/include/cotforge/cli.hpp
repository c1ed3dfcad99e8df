#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cotforge/backend.hpp"
#include "cotforge/bench.hpp"
#include "cotforge/errors.hpp"
#include "cotforge/eval.hpp"
#include "cotforge/http_backend.hpp"
#include "cotforge/manifest.hpp"
#include "cotforge/mock_backend.hpp"
#include "cotforge/pack.hpp"
#include "cotforge/record.hpp"
#include "cotforge/rl.hpp"
#include "cotforge/synthesis.hpp"
#include "cotforge/verify.hpp"
#include "cotforge/version.hpp"

namespace cotforge {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

inline LogLevel& log_level() {
    static LogLevel level = LogLevel::info;
    return level;
}

inline void log(LogLevel lvl, const std::string& msg) {
    static const char* names[] = {"debug", "info", "warn", "error"};
    if (static_cast<int>(lvl) >= static_cast<int>(log_level())) {
        std::cerr << '[' << names[static_cast<int>(lvl)] << "] " << msg << '\n';
    }
}

// ---------------------------------------------------------------------------
// Backend / verifier config files
// ---------------------------------------------------------------------------

inline ordered_json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        ordered_json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed JSON in " + path + ": " + e.what());
    }
}

inline ScriptEntry script_entry_from_json(const ordered_json& j) {
    if (j.is_string()) return ScriptEntry::reply(j.get<std::string>());
    if (j.contains("text")) return ScriptEntry::reply(j.at("text").get<std::string>());
    if (j.contains("truncated")) return ScriptEntry::truncated(j.at("truncated").get<std::string>());
    if (j.contains("status")) return ScriptEntry::http(j.at("status").get<int>());
    if (j.contains("fail")) {
        std::string kind = j.at("fail").get<std::string>();
        if (kind == "network") return ScriptEntry::network();
        if (kind == "timeout") return ScriptEntry::timeout();
        throw ValidationError("unknown script failure kind \"" + kind + "\"");
    }
    throw ValidationError("unrecognized mock script entry: " + j.dump());
}

inline BackendConfig backend_config_from_json(const ordered_json& j) {
    BackendConfig cfg;
    cfg.endpoint = j.value("endpoint", std::string{});
    cfg.model = j.value("model", std::string{"mock"});
    cfg.timeout_s = j.value("timeout_s", 60.0);
    cfg.max_retries = j.value("max_retries", 2);
    cfg.max_concurrent = j.value("max_concurrent", 4);
    cfg.temperature = j.value("temperature", 0.0);
    cfg.validate();
    return cfg;
}

/// Builds a backend from a config document:
///   {"type":"http","endpoint":...,"model":...,...}
///   {"type":"mock","seed":0,"script":[...],"keyed":{"key":[...]}}
inline std::shared_ptr<Backend> make_backend(const ordered_json& j) {
    std::string type = j.value("type", std::string{"http"});
    if (type == "http") {
        auto cfg = backend_config_from_json(j);
        if (cfg.endpoint.empty()) {
            throw ValidationError("http backend config requires an endpoint");
        }
        return std::make_shared<HttpBackend>(cfg);
    }
    if (type == "mock") {
        BackendConfig cfg = backend_config_from_json(j);
        if (cfg.endpoint.empty()) cfg.endpoint = "mock://scripted";
        std::uint64_t seed = j.value("seed", 0ull);
        std::vector<ScriptEntry> script;
        if (j.contains("script")) {
            for (const auto& e : j.at("script")) script.push_back(script_entry_from_json(e));
        }
        auto backend = std::make_shared<ScriptedBackend>(cfg, std::move(script), seed);
        bool has_keyed = false;
        if (j.contains("keyed")) {
            for (const auto& [key, entries] : j.at("keyed").items()) {
                std::vector<ScriptEntry> keyed;
                for (const auto& e : entries) keyed.push_back(script_entry_from_json(e));
                backend->add_keyed_script(key, std::move(keyed));
                has_keyed = true;
            }
        }
        if (!j.contains("script") && !has_keyed) {
            throw ValidationError("mock backend config requires script or keyed entries");
        }
        return backend;
    }
    throw ValidationError("unknown backend type \"" + type + "\"");
}

inline std::shared_ptr<Backend> load_backend(const std::string& path) {
    return make_backend(load_json_file(path));
}

/// Verifier config: {"icd_granularity":"category"|"exact","judge":null|{...}|"path"}
inline VerifierConfig load_verifier_config(const std::string& path) {
    ordered_json j = load_json_file(path);
    VerifierConfig cfg;
    std::string gran = j.value("icd_granularity", std::string{"category"});
    if (gran == "category") {
        cfg.icd_granularity = IcdGranularity::category;
    } else if (gran == "exact") {
        cfg.icd_granularity = IcdGranularity::exact;
    } else {
        throw ValidationError("unknown icd_granularity \"" + gran + "\"");
    }
    if (j.contains("judge") && !j.at("judge").is_null()) {
        const auto& judge = j.at("judge");
        cfg.judge = judge.is_string() ? load_backend(judge.get<std::string>())
                                      : make_backend(judge);
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Option resolution: CLI flag > config file > default
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void apply_config(const CLI::App& cmd, const ordered_json& cfg, const std::string& flag,
                  T& var) {
    const auto* opt = cmd.get_option_no_throw("--" + flag);
    if (opt != nullptr && opt->count() > 0) return;  // explicit flag wins
    if (cfg.contains(flag)) {
        try {
            var = cfg.at(flag).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("config key \"" + flag + "\": " + e.what());
        }
    }
}

inline void require(const std::string& value, const std::string& flag) {
    if (value.empty()) {
        throw ValidationError("missing required option --" + flag +
                              " (flag or config file key \"" + flag + "\")");
    }
}

inline void ensure_parent_dir(const std::string& path) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

/// Parses argv and runs one subcommand. Exit codes: 0 success, 1 validation
/// or usage error, 2 transport error.
inline int dispatch(std::vector<std::string> args) {
    CLI::App app{"cot-forge: diagnostic chain-of-thought data pipeline toolkit"};
    app.set_version_flag("--version", kVersion);
    app.fallthrough();
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string log_level_name = "info";
    std::uint64_t seed = 0;
    int parallel = 1;
    app.add_option("--config", config_path, "JSON config file (flags override it)");
    app.add_option("--log-level", log_level_name, "debug|info|warn|error")
        ->check(CLI::IsMember({"debug", "info", "warn", "error"}));
    app.add_option("--seed", seed, "master seed");
    app.add_option("--parallel", parallel, "worker threads");

    // --- synthesize ---
    auto* synth = app.add_subcommand("synthesize", "search-synthesize long-CoT samples");
    std::string synth_records, synth_out, synth_generator, synth_verifier;
    int synth_max_iterations = 4, synth_attempts = 3;
    synth->add_option("--records", synth_records, "clinical records JSONL");
    synth->add_option("--out", synth_out, "output samples JSONL");
    synth->add_option("--generator", synth_generator, "generator backend config JSON");
    synth->add_option("--verifier", synth_verifier, "verifier config JSON");
    synth->add_option("--max-iterations", synth_max_iterations, "iterations per attempt");
    synth->add_option("--attempts", synth_attempts, "search attempts before the guided one");

    // --- build-bench ---
    auto* bench_cmd = app.add_subcommand("build-bench", "stratified benchmark construction");
    std::string bench_pool, bench_out, bench_exclude;
    std::size_t bench_quota = 500, bench_cap = 3;
    bench_cmd->add_option("--pool", bench_pool, "candidate records JSONL");
    bench_cmd->add_option("--quota", bench_quota, "cases per department");
    bench_cmd->add_option("--cap", bench_cap, "max cases per full ICD-10 code");
    bench_cmd->add_option("--exclude", bench_exclude, "file of record ids to exclude");
    bench_cmd->add_option("--out", bench_out, "output benchmark JSONL");

    // --- pack ---
    auto* pack_cmd = app.add_subcommand("pack", "pack samples into training sequences");
    std::string pack_samples_path, pack_out;
    std::size_t pack_max_len = 4096;
    bool pack_pad = false;
    pack_cmd->add_option("--samples", pack_samples_path, "samples JSONL");
    pack_cmd->add_option("--max-len", pack_max_len, "max tokens per sequence");
    pack_cmd->add_flag("--pad", pack_pad, "right-pad sequences to max-len");
    pack_cmd->add_option("--out", pack_out, "output packed JSONL");

    // --- reward ---
    auto* reward_cmd = app.add_subcommand("reward", "score predictions with outcome rewards");
    std::string reward_pred, reward_ref, reward_judge, reward_out;
    reward_cmd->add_option("--pred", reward_pred, "predictions JSONL");
    reward_cmd->add_option("--ref", reward_ref, "reference records JSONL");
    reward_cmd->add_option("--judge", reward_judge, "judge backend config JSON");
    reward_cmd->add_option("--out", reward_out, "output rewards JSONL (default stdout)");

    // --- rl-toy ---
    auto* rl_cmd = app.add_subcommand("rl-toy", "PPO on the toy diagnosis environment");
    std::string rl_out = "curve.csv";
    int rl_steps = 2000, rl_k = 3;
    double rl_lr = 0.05;
    rl_cmd->add_option("--steps", rl_steps, "training steps");
    rl_cmd->add_option("--k", rl_k, "number of diagnoses");
    rl_cmd->add_option("--lr", rl_lr, "toy-scale learning rate");
    rl_cmd->add_option("--out", rl_out, "learning-curve CSV path");

    // --- evaluate ---
    auto* eval_cmd = app.add_subcommand("evaluate", "run a model over a benchmark");
    std::string eval_bench, eval_model, eval_verifier, eval_out, eval_style = "cot";
    eval_cmd->add_option("--bench", eval_bench, "benchmark JSONL");
    eval_cmd->add_option("--model", eval_model, "model backend config JSON");
    eval_cmd->add_option("--style", eval_style, "cot|direct")
        ->check(CLI::IsMember({"cot", "direct"}));
    eval_cmd->add_option("--verifier", eval_verifier, "verifier config JSON");
    eval_cmd->add_option("--out", eval_out, "report output directory");

    // --- emit-config ---
    auto* emit_cmd = app.add_subcommand("emit-config", "emit training hyperparameter docs");
    std::string emit_stage, emit_out;
    emit_cmd->add_option("--stage", emit_stage, "sft|rl")->check(CLI::IsMember({"sft", "rl"}));
    emit_cmd->add_option("--out", emit_out, "output JSON path");

    // --- report ---
    auto* report_cmd = app.add_subcommand("report", "render coverage or evaluation reports");
    std::string report_bench, report_eval, report_out;
    report_cmd->add_option("--bench", report_bench, "benchmark JSONL for a coverage report");
    report_cmd->add_option("--eval", report_eval, "evaluation report.json to re-render");
    report_cmd->add_option("--out", report_out, "output directory");

    std::vector<const char*> argv;
    argv.push_back("cot-forge");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        std::cout << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    auto started = std::chrono::steady_clock::now();
    auto elapsed_s = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    };

    try {
        ordered_json cfg = ordered_json::object();
        if (!config_path.empty()) cfg = load_json_file(config_path);
        detail::apply_config(app, cfg, "log-level", log_level_name);
        detail::apply_config(app, cfg, "seed", seed);
        detail::apply_config(app, cfg, "parallel", parallel);
        if (log_level_name == "debug") log_level() = LogLevel::debug;
        else if (log_level_name == "info") log_level() = LogLevel::info;
        else if (log_level_name == "warn") log_level() = LogLevel::warn;
        else log_level() = LogLevel::error;

        if (synth->parsed()) {
            detail::apply_config(*synth, cfg, "records", synth_records);
            detail::apply_config(*synth, cfg, "out", synth_out);
            detail::apply_config(*synth, cfg, "generator", synth_generator);
            detail::apply_config(*synth, cfg, "verifier", synth_verifier);
            detail::apply_config(*synth, cfg, "max-iterations", synth_max_iterations);
            detail::apply_config(*synth, cfg, "attempts", synth_attempts);
            detail::require(synth_records, "records");
            detail::require(synth_out, "out");
            detail::require(synth_generator, "generator");

            auto records = load_records(synth_records);
            auto generator = load_backend(synth_generator);
            VerifierConfig verifier;
            if (!synth_verifier.empty()) verifier = load_verifier_config(synth_verifier);
            SearchConfig search;
            search.max_iterations_per_attempt = synth_max_iterations;
            search.max_attempts = synth_attempts;
            search.seed = seed;
            log(LogLevel::info, "synthesizing " + std::to_string(records.size()) + " records");
            auto result = run_synthesis(records, *generator, verifier, search, parallel);

            detail::ensure_parent_dir(synth_out);
            write_samples(result.samples, synth_out, search.max_attempts);
            std::string failures_path = synth_out + ".failures.jsonl";
            {
                std::ofstream out(failures_path);
                if (!out) throw IoError("cannot write " + failures_path);
                for (const auto& f : result.failures) out << to_json(f).dump() << '\n';
            }
            log(LogLevel::info, "wrote " + std::to_string(result.samples.size()) +
                                    " samples, " + std::to_string(result.failures.size()) +
                                    " failures");

            RunManifest m;
            m.subcommand = "synthesize";
            m.seed = seed;
            m.config = ordered_json{{"records", synth_records},
                                    {"out", synth_out},
                                    {"generator", synth_generator},
                                    {"verifier", synth_verifier},
                                    {"max-iterations", synth_max_iterations},
                                    {"attempts", synth_attempts},
                                    {"parallel", parallel}};
            m.add_input(synth_records);
            m.add_input(synth_generator);
            if (!synth_verifier.empty()) m.add_input(synth_verifier);
            m.add_output(synth_out);
            m.add_output(failures_path);
            m.wall_clock_s = elapsed_s();
            write_manifest(m, manifest_path_for(synth_out));
            return 0;
        }

        if (bench_cmd->parsed()) {
            detail::apply_config(*bench_cmd, cfg, "pool", bench_pool);
            detail::apply_config(*bench_cmd, cfg, "out", bench_out);
            detail::apply_config(*bench_cmd, cfg, "quota", bench_quota);
            detail::apply_config(*bench_cmd, cfg, "cap", bench_cap);
            detail::apply_config(*bench_cmd, cfg, "exclude", bench_exclude);
            detail::require(bench_pool, "pool");
            detail::require(bench_out, "out");

            auto pool = load_records(bench_pool);
            if (!bench_exclude.empty()) {
                std::ifstream in(bench_exclude);
                if (!in) throw IoError("cannot open " + bench_exclude);
                std::set<std::string> excluded;
                std::string line;
                while (std::getline(in, line)) {
                    line = trim(line);
                    if (!line.empty()) excluded.insert(line);
                }
                std::erase_if(pool, [&](const ClinicalRecord& r) {
                    return excluded.count(r.id) > 0;
                });
            }
            BenchmarkSpec spec;
            spec.quota_per_department = bench_quota;
            spec.per_code_cap = bench_cap;
            spec.seed = seed;
            auto cases = build_benchmark(pool, spec);
            detail::ensure_parent_dir(bench_out);
            write_benchmark(cases, bench_out);
            log(LogLevel::info, "wrote " + std::to_string(cases.size()) + " cases");

            RunManifest m;
            m.subcommand = "build-bench";
            m.seed = seed;
            m.config = ordered_json{{"pool", bench_pool},
                                    {"quota", bench_quota},
                                    {"cap", bench_cap},
                                    {"exclude", bench_exclude},
                                    {"out", bench_out}};
            m.add_input(bench_pool);
            m.add_output(bench_out);
            m.wall_clock_s = elapsed_s();
            write_manifest(m, manifest_path_for(bench_out));
            return 0;
        }

        if (pack_cmd->parsed()) {
            detail::apply_config(*pack_cmd, cfg, "samples", pack_samples_path);
            detail::apply_config(*pack_cmd, cfg, "out", pack_out);
            detail::apply_config(*pack_cmd, cfg, "max-len", pack_max_len);
            detail::require(pack_samples_path, "samples");
            detail::require(pack_out, "out");

            auto samples = load_samples(pack_samples_path, 1 << 20);
            WhitespaceTokenizer tokenizer;
            auto sequences = pack_samples(samples, pack_max_len, tokenizer, pack_pad);
            detail::ensure_parent_dir(pack_out);
            std::ofstream out(pack_out);
            if (!out) throw IoError("cannot write " + pack_out);
            for (const auto& seq : sequences) out << to_json(seq).dump() << '\n';
            if (!out) throw IoError("write failed for " + pack_out);
            log(LogLevel::info, "packed " + std::to_string(samples.size()) + " samples into " +
                                    std::to_string(sequences.size()) + " sequences");

            RunManifest m;
            m.subcommand = "pack";
            m.seed = seed;
            m.config = ordered_json{{"samples", pack_samples_path},
                                    {"max-len", pack_max_len},
                                    {"pad", pack_pad},
                                    {"out", pack_out}};
            m.add_input(pack_samples_path);
            m.add_output(pack_out);
            m.wall_clock_s = elapsed_s();
            write_manifest(m, manifest_path_for(pack_out));
            return 0;
        }

        if (reward_cmd->parsed()) {
            detail::apply_config(*reward_cmd, cfg, "pred", reward_pred);
            detail::apply_config(*reward_cmd, cfg, "ref", reward_ref);
            detail::apply_config(*reward_cmd, cfg, "judge", reward_judge);
            detail::apply_config(*reward_cmd, cfg, "out", reward_out);
            detail::require(reward_pred, "pred");
            detail::require(reward_ref, "ref");

            auto refs = load_records(reward_ref);
            std::map<std::string, const ClinicalRecord*> by_id;
            for (const auto& r : refs) by_id.emplace(r.id, &r);

            VerifierConfig verifier;
            if (!reward_judge.empty()) verifier.judge = load_backend(reward_judge);

            std::vector<ordered_json> lines;
            for_each_jsonl_line(reward_pred, [&](const ordered_json& j, std::size_t) {
                std::string id;
                std::optional<std::string> answer, thinking;
                if (j.contains("provenance")) {  // CoTSample schema
                    id = j.at("provenance").value("record_id", std::string{});
                    answer = j.at("response").get<std::string>();
                    thinking = j.at("thinking").get<std::string>();
                } else {
                    id = j.at("id").get<std::string>();
                    if (j.contains("answer") && !j.at("answer").is_null()) {
                        answer = j.at("answer").get<std::string>();
                    }
                    if (j.contains("thinking") && !j.at("thinking").is_null()) {
                        thinking = j.at("thinking").get<std::string>();
                    }
                }
                auto it = by_id.find(id);
                if (it == by_id.end()) {
                    throw ValidationError("prediction id \"" + id +
                                          "\" has no reference record");
                }
                RewardSignal r =
                    reward(answer, thinking, it->second->reference_diagnosis, verifier);
                ordered_json verdict;
                if (r.verdict) {
                    verdict = ordered_json{{"correct", r.verdict->correct},
                                           {"method", to_string(r.verdict->method)},
                                           {"rationale", r.verdict->rationale}};
                }
                lines.push_back(ordered_json{{"id", id},
                                             {"value", r.value},
                                             {"answered", r.answered},
                                             {"thought", r.thought},
                                             {"verdict", std::move(verdict)}});
            });

            if (reward_out.empty()) {
                for (const auto& l : lines) std::cout << l.dump() << '\n';
            } else {
                detail::ensure_parent_dir(reward_out);
                std::ofstream out(reward_out);
                if (!out) throw IoError("cannot write " + reward_out);
                for (const auto& l : lines) out << l.dump() << '\n';
                if (!out) throw IoError("write failed for " + reward_out);

                RunManifest m;
                m.subcommand = "reward";
                m.seed = seed;
                m.config = ordered_json{{"pred", reward_pred},
                                        {"ref", reward_ref},
                                        {"judge", reward_judge},
                                        {"out", reward_out}};
                m.add_input(reward_pred);
                m.add_input(reward_ref);
                m.add_output(reward_out);
                m.wall_clock_s = elapsed_s();
                write_manifest(m, manifest_path_for(reward_out));
            }
            return 0;
        }

        if (rl_cmd->parsed()) {
            detail::apply_config(*rl_cmd, cfg, "steps", rl_steps);
            detail::apply_config(*rl_cmd, cfg, "k", rl_k);
            detail::apply_config(*rl_cmd, cfg, "lr", rl_lr);
            detail::apply_config(*rl_cmd, cfg, "out", rl_out);

            ToyDiagnosisEnv env(rl_k);
            PPOConfig ppo;
            ppo.learning_rate = rl_lr;
            auto result = train_toy(env, ppo, seed, rl_steps);
            detail::ensure_parent_dir(rl_out);
            write_curve_csv(result.curve, rl_out);
            const auto& last = result.curve.back();
            char line[96];
            std::snprintf(line, sizeof(line), "final mean_reward=%.4f p_think_correct=%.4f",
                          last.mean_reward, last.p_think_correct);
            std::cout << line << '\n';

            RunManifest m;
            m.subcommand = "rl-toy";
            m.seed = seed;
            m.config = ordered_json{
                {"steps", rl_steps},         {"k", rl_k},
                {"lr", rl_lr},               {"epochs", ppo.epochs},
                {"discount", ppo.discount},  {"value_coefficient", ppo.value_coefficient},
                {"clip_range", ppo.clip_range}, {"kl_coefficient", ppo.kl_coefficient},
                {"batch_size", ppo.batch_size}, {"out", rl_out}};
            m.add_output(rl_out);
            m.wall_clock_s = elapsed_s();
            write_manifest(m, manifest_path_for(rl_out));
            return 0;
        }

        if (eval_cmd->parsed()) {
            detail::apply_config(*eval_cmd, cfg, "bench", eval_bench);
            detail::apply_config(*eval_cmd, cfg, "model", eval_model);
            detail::apply_config(*eval_cmd, cfg, "style", eval_style);
            detail::apply_config(*eval_cmd, cfg, "verifier", eval_verifier);
            detail::apply_config(*eval_cmd, cfg, "out", eval_out);
            detail::require(eval_bench, "bench");
            detail::require(eval_model, "model");
            detail::require(eval_out, "out");

            auto bench = load_benchmark(eval_bench);
            auto model = load_backend(eval_model);
            VerifierConfig verifier;
            if (!eval_verifier.empty()) verifier = load_verifier_config(eval_verifier);
            PromptLibrary lib;
            auto report = evaluate(bench, *model, prompt_style_from_string(eval_style),
                                   verifier, lib, parallel);
            std::filesystem::create_directories(eval_out);
            auto rendered = report_render(report, eval_out);
            log(LogLevel::info,
                "overall accuracy " + std::to_string(report.overall_accuracy()));

            RunManifest m;
            m.subcommand = "evaluate";
            m.seed = seed;
            m.config = ordered_json{{"bench", eval_bench},
                                    {"model", eval_model},
                                    {"style", eval_style},
                                    {"verifier", eval_verifier},
                                    {"out", eval_out},
                                    {"parallel", parallel}};
            m.add_input(eval_bench);
            m.add_input(eval_model);
            m.add_output(rendered.csv_path);
            m.add_output(rendered.json_path);
            m.wall_clock_s = elapsed_s();
            write_manifest(m, manifest_path_for(eval_out, /*is_directory=*/true));
            return 0;
        }

        if (emit_cmd->parsed()) {
            detail::apply_config(*emit_cmd, cfg, "stage", emit_stage);
            detail::apply_config(*emit_cmd, cfg, "out", emit_out);
            detail::require(emit_stage, "stage");
            detail::require(emit_out, "out");

            auto doc = emit_training_config(stage_from_string(emit_stage));
            detail::ensure_parent_dir(emit_out);
            std::ofstream out(emit_out);
            if (!out) throw IoError("cannot write " + emit_out);
            out << doc.dump(2) << '\n';
            if (!out) throw IoError("write failed for " + emit_out);

            RunManifest m;
            m.subcommand = "emit-config";
            m.seed = seed;
            m.config = ordered_json{{"stage", emit_stage}, {"out", emit_out}};
            m.add_output(emit_out);
            m.wall_clock_s = elapsed_s();
            write_manifest(m, manifest_path_for(emit_out));
            return 0;
        }

        if (report_cmd->parsed()) {
            detail::apply_config(*report_cmd, cfg, "bench", report_bench);
            detail::apply_config(*report_cmd, cfg, "eval", report_eval);
            detail::apply_config(*report_cmd, cfg, "out", report_out);
            detail::require(report_out, "out");
            if (report_bench.empty() == report_eval.empty()) {
                throw ValidationError("report requires exactly one of --bench or --eval");
            }
            std::filesystem::create_directories(report_out);

            RunManifest m;
            m.subcommand = "report";
            m.seed = seed;
            if (!report_bench.empty()) {
                auto cases = load_benchmark(report_bench);
                auto coverage = coverage_report(cases);
                std::string json_path = report_out + "/coverage.json";
                std::string csv_path = report_out + "/coverage.csv";
                std::ofstream jout(json_path);
                if (!jout) throw IoError("cannot write " + json_path);
                jout << to_json(coverage).dump(2) << '\n';
                std::ofstream cout_(csv_path);
                if (!cout_) throw IoError("cannot write " + csv_path);
                cout_ << "department,cases,distinct_categories,distinct_codes,"
                         "max_code_multiplicity\n";
                for (const auto& [dept, cov] : coverage.departments) {
                    cout_ << to_string(dept) << ',' << cov.cases << ',' <<
                        cov.distinct_categories << ',' << cov.distinct_codes << ',' <<
                        cov.max_code_multiplicity << '\n';
                }
                m.config = ordered_json{{"bench", report_bench}, {"out", report_out}};
                m.add_input(report_bench);
                m.add_output(json_path);
                m.add_output(csv_path);
            } else {
                auto report = report_from_json(load_json_file(report_eval));
                auto rendered = report_render(report, report_out);
                m.config = ordered_json{{"eval", report_eval}, {"out", report_out}};
                m.add_input(report_eval);
                m.add_output(rendered.csv_path);
                m.add_output(rendered.json_path);
            }
            m.wall_clock_s = elapsed_s();
            write_manifest(m, manifest_path_for(report_out, /*is_directory=*/true));
            return 0;
        }

        std::cerr << app.help();
        return 1;
    } catch (const TransportError& e) {
        log(LogLevel::error, e.what());
        return 2;
    } catch (const Error& e) {
        log(LogLevel::error, e.what());
        return 1;
    } catch (const std::exception& e) {
        log(LogLevel::error, e.what());
        return 1;
    }
}

inline int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(std::move(args));
}

}  // namespace cotforge
