#pragma once

#include <memory>
#include <optional>
#include <string>

#include "cotforge/backend.hpp"
#include "cotforge/errors.hpp"
#include "cotforge/icd10.hpp"
#include "cotforge/record.hpp"
#include "cotforge/text.hpp"

namespace cotforge {

enum class MatchMethod { exact_normalized, icd_match, llm_judge };

inline std::string to_string(MatchMethod m) {
    switch (m) {
        case MatchMethod::exact_normalized: return "exact_normalized";
        case MatchMethod::icd_match: return "icd_match";
        case MatchMethod::llm_judge: return "llm_judge";
    }
    return "?";
}

struct VerifierVerdict {
    bool correct = false;
    MatchMethod method = MatchMethod::exact_normalized;
    std::string rationale;  // judge transcript; empty for rule methods
};

enum class IcdGranularity { exact, category };

struct VerifierConfig {
    IcdGranularity icd_granularity = IcdGranularity::category;
    std::shared_ptr<Backend> judge;  // optional third tier
};

inline constexpr const char* kVerdictCorrect = "VERDICT: CORRECT";
inline constexpr const char* kVerdictIncorrect = "VERDICT: INCORRECT";

inline MessageList judge_messages(const std::string& candidate, const DiagnosisLabel& reference) {
    MessageList m;
    m.push_back({"system",
                 "You are a strict clinical diagnosis verifier. Decide whether a candidate "
                 "diagnosis denotes the same condition as the reference diagnosis. Explain "
                 "briefly, then output a final line that is exactly \"VERDICT: CORRECT\" or "
                 "\"VERDICT: INCORRECT\". That line must be the last line of your reply."});
    m.push_back({"user", "Reference diagnosis: " + reference.name + " (ICD-10 " +
                             reference.icd10 + ")\nCandidate diagnosis: " + candidate});
    return m;
}

namespace detail {

inline std::optional<bool> parse_verdict_line(const std::string& text) {
    auto lines = split_lines(text);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        std::string line = trim(*it);
        if (line.empty()) continue;
        if (line == kVerdictCorrect) return true;
        if (line == kVerdictIncorrect) return false;
        return std::nullopt;  // last non-empty line is something else
    }
    return std::nullopt;
}

inline VerifierVerdict ask_judge(const std::string& candidate, const DiagnosisLabel& reference,
                                 Backend& judge) {
    auto messages = judge_messages(candidate, reference);
    std::string transcript;
    for (int call = 0; call < 2; ++call) {
        Completion c = judge.complete(messages);
        transcript += c.text;
        if (auto verdict = parse_verdict_line(c.text)) {
            return VerifierVerdict{*verdict, MatchMethod::llm_judge, transcript};
        }
        transcript += "\n";
    }
    throw JudgeProtocolError("judge reply missing a VERDICT line after one retry");
}

}  // namespace detail

/// Tiered check of a free-text candidate against the reference diagnosis:
/// normalized name equality, then ICD-10 code comparison, then the judge.
/// Without a judge an unresolved candidate is incorrect.
inline VerifierVerdict verify(const std::string& candidate, const DiagnosisLabel& reference,
                              const VerifierConfig& config = {}) {
    validate_diagnosis(reference);

    if (normalize_label(candidate) == normalize_label(reference.name) &&
        !normalize_label(candidate).empty()) {
        return VerifierVerdict{true, MatchMethod::exact_normalized, ""};
    }

    if (auto code = canonical_icd10(candidate)) {
        auto ref_code = canonical_icd10(reference.icd10);
        bool match = config.icd_granularity == IcdGranularity::category
                         ? code->substr(0, 3) == ref_code->substr(0, 3)
                         : *code == *ref_code;
        return VerifierVerdict{match, MatchMethod::icd_match, ""};
    }

    if (config.judge) {
        return detail::ask_judge(candidate, reference, *config.judge);
    }
    return VerifierVerdict{false, MatchMethod::exact_normalized, ""};
}

/// Label overload: name equality, then code comparison, then judge on the name.
inline VerifierVerdict verify(const DiagnosisLabel& candidate, const DiagnosisLabel& reference,
                              const VerifierConfig& config = {}) {
    validate_diagnosis(reference);
    if (normalize_label(candidate.name) == normalize_label(reference.name) &&
        !candidate.name.empty()) {
        return VerifierVerdict{true, MatchMethod::exact_normalized, ""};
    }
    auto cand = canonical_icd10(candidate.icd10);
    auto ref = canonical_icd10(reference.icd10);
    if (cand && ref) {
        bool match = config.icd_granularity == IcdGranularity::category
                         ? cand->substr(0, 3) == ref->substr(0, 3)
                         : *cand == *ref;
        if (match) return VerifierVerdict{true, MatchMethod::icd_match, ""};
    }
    if (config.judge) {
        return detail::ask_judge(candidate.name, reference, *config.judge);
    }
    return VerifierVerdict{false, MatchMethod::exact_normalized, ""};
}

/// Scalar outcome reward over {0.0, 0.1, 1.0}.
struct RewardSignal {
    double value = 0.0;
    std::optional<VerifierVerdict> verdict;
    bool answered = false;
    bool thought = false;
};

/// Reward table: 0.0 without an answer or without a non-empty thinking
/// section (no think-before-answering); otherwise 1.0 when the verifier
/// accepts the answer and 0.1 when it does not.
inline RewardSignal reward(const std::optional<std::string>& answer,
                           const std::optional<std::string>& thinking,
                           const DiagnosisLabel& reference, const VerifierConfig& config = {}) {
    validate_diagnosis(reference);
    RewardSignal signal;
    signal.answered = answer.has_value() && !trim(*answer).empty();
    signal.thought = thinking.has_value() && !trim(*thinking).empty();
    if (!signal.answered || !signal.thought) {
        signal.value = 0.0;
        return signal;
    }
    signal.verdict = verify(*answer, reference, config);
    signal.value = signal.verdict->correct ? 1.0 : 0.1;
    return signal;
}

}  // namespace cotforge
