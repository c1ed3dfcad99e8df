#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "cotforge/backend.hpp"
#include "cotforge/errors.hpp"
#include "cotforge/prompts.hpp"
#include "cotforge/record.hpp"
#include "cotforge/text.hpp"
#include "cotforge/verify.hpp"

namespace cotforge {

enum class StrategyPolicy { cycle, scripted };

struct SearchConfig {
    int max_iterations_per_attempt = 4;
    int max_attempts = 3;
    StrategyPolicy strategy_policy = StrategyPolicy::cycle;
    std::vector<Strategy> scripted_strategies;
    std::uint64_t seed = 0;
    PromptLibrary prompts;

    void validate() const {
        if (max_iterations_per_attempt < 1) {
            throw ValidationError("max_iterations_per_attempt must be >= 1");
        }
        if (max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
        if (strategy_policy == StrategyPolicy::scripted && scripted_strategies.empty()) {
            throw ValidationError("scripted strategy policy requires a strategy list");
        }
    }
};

struct TraceStep {
    std::string text;
    std::string origin;  // "initial", a strategy name, or "guided"
};

struct ReasoningTrace {
    std::vector<TraceStep> steps;
    int iterations_used = 0;
    int attempt_index = 0;
    std::optional<DiagnosisLabel> terminal_answer;
};

/// Fixed repair order for the cycle policy.
inline constexpr std::array<Strategy, 4> kCycleOrder = {
    Strategy::Verification,
    Strategy::Corrections,
    Strategy::Backtracking,
    Strategy::ExploreNewPaths,
};

/// Picks the next repair strategy after an incorrect verdict. The cycle
/// policy walks kCycleOrder by the number of strategies already applied;
/// the scripted policy follows the user list (wrapping).
inline Strategy select_strategy(const std::vector<Strategy>& history,
                                const VerifierVerdict& feedback, const SearchConfig& config) {
    if (feedback.correct) {
        throw ValidationError("select_strategy called on a correct verdict");
    }
    if (config.strategy_policy == StrategyPolicy::cycle) {
        return kCycleOrder[history.size() % kCycleOrder.size()];
    }
    return config.scripted_strategies[history.size() % config.scripted_strategies.size()];
}

// ---------------------------------------------------------------------------
// Generator output convention: one reasoning step per line, then a final
// "ANSWER: <diagnosis>" line.
// ---------------------------------------------------------------------------

struct GeneratorOutput {
    std::vector<std::string> steps;
    std::string answer;
    bool well_formed = false;
};

inline GeneratorOutput parse_generator_output(const std::string& text) {
    GeneratorOutput out;
    auto lines = split_lines(text);
    long answer_at = -1;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (starts_with(trim(lines[i]), "ANSWER:")) answer_at = static_cast<long>(i);
    }
    for (long i = 0; i < (answer_at < 0 ? static_cast<long>(lines.size()) : answer_at); ++i) {
        std::string step = trim(lines[i]);
        if (!step.empty() && !starts_with(step, "ANSWER:")) out.steps.push_back(std::move(step));
    }
    if (answer_at >= 0) {
        out.answer = trim(trim(lines[answer_at]).substr(std::string("ANSWER:").size()));
    }
    out.well_formed = !out.answer.empty() && !out.steps.empty();
    return out;
}

/// One generator invocation, kept for failure reports and transcript checks.
struct GeneratorCall {
    int attempt = 0;
    int iteration = 0;
    std::string phase;  // "search", "guided", "reformat", "response"
    MessageList request;
    std::string output;
};

struct FailureReport {
    std::string record_id;
    std::string reason;
    std::vector<GeneratorCall> transcript;
};

inline ordered_json to_json(const FailureReport& f) {
    ordered_json calls = ordered_json::array();
    for (const auto& c : f.transcript) {
        ordered_json msgs = ordered_json::array();
        for (const auto& m : c.request) {
            msgs.push_back(ordered_json{{"role", m.role}, {"content", m.content}});
        }
        calls.push_back(ordered_json{{"attempt", c.attempt},
                                     {"iteration", c.iteration},
                                     {"phase", c.phase},
                                     {"request", std::move(msgs)},
                                     {"output", c.output}});
    }
    return ordered_json{
        {"record_id", f.record_id}, {"reason", f.reason}, {"transcript", std::move(calls)}};
}

// ---------------------------------------------------------------------------
// Long-CoT reformatting
// ---------------------------------------------------------------------------

namespace detail {

inline bool has_rigid_markers(const std::string& text) {
    // enumerated list markers at line starts: "1. ", "2) "
    for (const auto& raw : split_lines(text)) {
        std::string line = trim(raw);
        std::size_t i = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
            if (i + 1 >= line.size() || is_ascii_space(line[i + 1])) return true;
        }
    }
    // "Step 1", "Step2:" anywhere
    std::size_t pos = 0;
    while ((pos = text.find("Step", pos)) != std::string::npos) {
        std::size_t j = pos + 4;
        while (j < text.size() && text[j] == ' ') ++j;
        if (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) return true;
        pos += 4;
    }
    return false;
}

inline std::vector<std::string> key_terms(const std::string& step) {
    std::vector<std::string> terms;
    for (auto& tok : split_whitespace(normalize_label(step))) {
        if (tok.size() >= 6) terms.push_back(tok);
    }
    return terms;
}

inline bool step_covered(const std::string& normalized_passage, const std::string& step) {
    auto terms = key_terms(step);
    if (terms.empty()) {
        return normalized_passage.find(normalize_label(step)) != std::string::npos;
    }
    for (const auto& t : terms) {
        if (normalized_passage.find(t) == std::string::npos) return false;
    }
    return true;
}

}  // namespace detail

/// Structural contract for a long-CoT passage: every step's content present,
/// at least one connective per step transition, no enumerated markers.
inline bool long_cot_structure_ok(const std::string& passage,
                                  const std::vector<TraceStep>& steps,
                                  const std::vector<std::string>& connectives) {
    if (trim(passage).empty() || steps.empty()) return false;
    if (detail::has_rigid_markers(passage)) return false;
    std::string normalized = normalize_label(passage);
    for (const auto& s : steps) {
        if (!detail::step_covered(normalized, s.text)) return false;
    }
    if (steps.size() >= 2) {
        std::string lowered = normalize_text(passage);
        std::size_t count = 0;
        for (const auto& c : connectives) {
            count += count_word_occurrences(lowered, normalize_text(c));
        }
        if (count < steps.size() - 1) return false;
    }
    return true;
}

/// Deterministic fallback: steps joined by connectives cycled from the lexicon.
inline std::string template_join(const std::vector<TraceStep>& steps,
                                 const std::vector<std::string>& connectives) {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i > 0) {
            out += " " + connectives[(i - 1) % connectives.size()] + ", ";
        }
        out += steps[i].text;
    }
    return out;
}

/// Turns an accepted trace into one natural-language passage. Asks the
/// generator, checks structure, regenerates once, then falls back to the
/// template join (which satisfies the contract by construction).
inline std::string reformat_long_cot(const ReasoningTrace& trace, Backend& generator,
                                     const PromptLibrary& lib = {},
                                     Language language = Language::en,
                                     std::vector<GeneratorCall>* log = nullptr) {
    if (!trace.terminal_answer) {
        throw ValidationError("reformat_long_cot requires an accepted trace");
    }
    const auto& connectives = lib.connectives_for(language);
    std::string quoted;
    for (std::size_t i = 0; i < connectives.size(); ++i) {
        if (i > 0) quoted += ", ";
        quoted += "\"" + connectives[i] + "\"";
    }
    std::string steps_block;
    for (const auto& s : trace.steps) steps_block += "- " + s.text + "\n";

    std::string instruction =
        detail::replace_all(lib.reformat_instruction, "{connectives}", quoted);
    for (int round = 0; round < 2; ++round) {
        MessageList messages{
            {"system", "You rewrite clinical reasoning notes into natural flowing prose."},
            {"user", (round == 0 ? "" : lib.reformat_retry_note) + instruction +
                         "\n\nSteps:\n" + steps_block}};
        Completion c = generator.complete(messages);
        if (log) log->push_back({trace.attempt_index, round + 1, "reformat", messages, c.text});
        if (long_cot_structure_ok(c.text, trace.steps, connectives)) return c.text;
    }
    return template_join(trace.steps, connectives);
}

/// Produces the formal long response from the long CoT. The response must
/// mention the reference diagnosis (case-fold + whitespace-collapse
/// containment); one regeneration is allowed, after which nullopt signals a
/// failure report.
inline std::optional<std::string> generate_long_response(
    const std::string& thinking, const ClinicalRecord& record, Backend& generator,
    const PromptLibrary& lib = {}, std::vector<GeneratorCall>* log = nullptr) {
    std::string question = compose_question(record);
    for (int round = 0; round < 2; ++round) {
        std::string note =
            round == 0 ? ""
                       : "Your previous response did not state the final diagnosis explicitly. ";
        MessageList messages{
            {"system", "You are an experienced clinician writing the formal case response."},
            {"user", question + "\n\nReasoning:\n" + thinking + "\n\n" + note +
                         lib.response_instruction}};
        Completion c = generator.complete(messages);
        if (log) log->push_back({0, round + 1, "response", messages, c.text});
        if (contains_normalized(c.text, record.reference_diagnosis.name)) return c.text;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// The search controller
// ---------------------------------------------------------------------------

using SynthesisOutcome = std::variant<CoTSample, FailureReport>;

inline std::string partial_trace_note(const std::string& what, const std::string& record_id,
                                      int attempt, int iteration, std::size_t strategies) {
    return what + " [record " + record_id + ", attempt " + std::to_string(attempt) +
           ", iteration " + std::to_string(iteration) + ", " + std::to_string(strategies) +
           " strategies applied]";
}

/// Search loop over generator attempts: verify each candidate, repair via a
/// selected strategy, restart the search when the iteration cap is hit, and
/// after max_attempts failed attempts make one guided attempt with the
/// reference answer embedded in the prompt. Accepted trajectories are
/// reformatted into a long CoT and a long response.
inline SynthesisOutcome synthesize_one(const ClinicalRecord& record, Backend& generator,
                                       const VerifierConfig& verifier,
                                       const SearchConfig& config) {
    validate_record(record);
    config.validate();
    const PromptLibrary& lib = config.prompts;
    std::string question = compose_question(record);

    std::vector<GeneratorCall> transcript;
    std::vector<Strategy> strategies;

    auto call_generator = [&](const MessageList& messages, int attempt, int iteration,
                              const char* phase) -> Completion {
        try {
            Completion c = generator.complete(messages);
            transcript.push_back({attempt, iteration, phase, messages, c.text});
            return c;
        } catch (const TimeoutError& e) {
            throw TimeoutError(partial_trace_note(e.what(), record.id, attempt, iteration,
                                                  strategies.size()),
                               e.attempts());
        } catch (const TransportError& e) {
            throw TransportError(partial_trace_note(e.what(), record.id, attempt, iteration,
                                                    strategies.size()),
                                 e.attempts(), e.http_status());
        }
    };

    std::optional<ReasoningTrace> accepted;
    bool guided = false;

    for (int attempt = 1; attempt <= config.max_attempts && !accepted; ++attempt) {
        MessageList messages{{"system", lib.generator_system}, {"user", question}};
        std::string origin = "initial";
        for (int iteration = 1; iteration <= config.max_iterations_per_attempt; ++iteration) {
            Completion c = call_generator(messages, attempt, iteration, "search");
            GeneratorOutput parsed = parse_generator_output(c.text);
            VerifierVerdict verdict;
            if (parsed.well_formed) {
                verdict = verify(parsed.answer, record.reference_diagnosis, verifier);
            }
            if (verdict.correct) {
                ReasoningTrace trace;
                for (const auto& s : parsed.steps) trace.steps.push_back({s, origin});
                trace.iterations_used = iteration;
                trace.attempt_index = attempt;
                trace.terminal_answer =
                    DiagnosisLabel{record.reference_diagnosis.icd10, parsed.answer};
                accepted = std::move(trace);
                break;
            }
            if (iteration < config.max_iterations_per_attempt) {
                Strategy s = select_strategy(strategies, verdict, config);
                strategies.push_back(s);
                origin = to_string(s);
                messages.push_back({"assistant", c.text});
                messages.push_back({"user", lib.strategy_instructions.at(s) + lib.repair_suffix});
            }
        }
    }

    if (!accepted) {
        // final guided attempt: reference answer in the prompt, CoT path outlined
        std::string instruction = detail::replace_all(lib.guided_instruction, "{answer}",
                                                      record.reference_diagnosis.name);
        MessageList messages{{"system", lib.generator_system},
                             {"user", question + "\n\n" + instruction}};
        Completion c = call_generator(messages, config.max_attempts + 1, 1, "guided");
        GeneratorOutput parsed = parse_generator_output(c.text);
        bool ok = parsed.well_formed &&
                  normalize_label(parsed.answer) ==
                      normalize_label(record.reference_diagnosis.name);
        if (!ok) {
            return FailureReport{record.id,
                                 "guided attempt produced malformed or mismatched output",
                                 std::move(transcript)};
        }
        ReasoningTrace trace;
        for (const auto& s : parsed.steps) trace.steps.push_back({s, "guided"});
        trace.iterations_used = 1;
        trace.attempt_index = config.max_attempts + 1;
        trace.terminal_answer = record.reference_diagnosis;
        accepted = std::move(trace);
        guided = true;
    }

    std::string thinking =
        reformat_long_cot(*accepted, generator, lib, record.language, &transcript);
    auto response = generate_long_response(thinking, record, generator, lib, &transcript);
    if (!response) {
        return FailureReport{record.id,
                             "long response missing the final diagnosis after one regeneration",
                             std::move(transcript)};
    }

    CoTSample sample;
    sample.question = std::move(question);
    sample.thinking = std::move(thinking);
    sample.response = std::move(*response);
    sample.provenance.record_id = record.id;
    sample.provenance.generator_id = generator.config().model;
    sample.provenance.attempts_used = accepted->attempt_index;
    sample.provenance.guided = guided;
    for (Strategy s : strategies) {
        sample.provenance.strategies_applied.push_back(to_string(s));
    }
    validate_sample(sample, config.max_attempts);
    return sample;
}

// ---------------------------------------------------------------------------
// Pool runner
// ---------------------------------------------------------------------------

struct SynthesisRunResult {
    std::vector<CoTSample> samples;
    std::vector<FailureReport> failures;
};

/// Synthesizes records independently on up to `parallel` workers. Output is
/// canonicalized by record id, so results do not depend on scheduling (given
/// a backend whose replies depend only on the request).
inline SynthesisRunResult run_synthesis(const std::vector<ClinicalRecord>& records,
                                        Backend& generator, const VerifierConfig& verifier,
                                        const SearchConfig& config, int parallel = 1) {
    if (parallel < 1) throw ValidationError("parallel must be >= 1");
    std::vector<std::optional<SynthesisOutcome>> outcomes(records.size());
    std::vector<std::exception_ptr> errors(records.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= records.size()) return;
            try {
                outcomes[i] = synthesize_one(records[i], generator, verifier, config);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    if (parallel == 1 || records.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        int n = std::min<int>(parallel, static_cast<int>(records.size()));
        threads.reserve(n);
        for (int t = 0; t < n; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    SynthesisRunResult result;
    for (auto& o : outcomes) {
        if (!o) continue;
        if (auto* sample = std::get_if<CoTSample>(&*o)) {
            result.samples.push_back(std::move(*sample));
        } else {
            result.failures.push_back(std::move(std::get<FailureReport>(*o)));
        }
    }
    std::sort(result.samples.begin(), result.samples.end(),
              [](const CoTSample& a, const CoTSample& b) {
                  return a.provenance.record_id < b.provenance.record_id;
              });
    std::sort(result.failures.begin(), result.failures.end(),
              [](const FailureReport& a, const FailureReport& b) {
                  return a.record_id < b.record_id;
              });
    return result;
}

}  // namespace cotforge
