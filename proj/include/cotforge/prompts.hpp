#pragma once

#include <map>
#include <string>
#include <vector>

#include "cotforge/icd10.hpp"
#include "cotforge/record.hpp"

namespace cotforge {

/// The four repair strategies applied when a reasoning attempt fails.
enum class Strategy { ExploreNewPaths, Backtracking, Verification, Corrections };

inline std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::ExploreNewPaths: return "ExploreNewPaths";
        case Strategy::Backtracking: return "Backtracking";
        case Strategy::Verification: return "Verification";
        case Strategy::Corrections: return "Corrections";
    }
    return "?";
}

inline Strategy strategy_from_string(std::string_view s) {
    if (s == "ExploreNewPaths") return Strategy::ExploreNewPaths;
    if (s == "Backtracking") return Strategy::Backtracking;
    if (s == "Verification") return Strategy::Verification;
    if (s == "Corrections") return Strategy::Corrections;
    throw ValidationError("unknown strategy \"" + std::string(s) + "\"");
}

/// Prompt templates and lexicons used across synthesis and evaluation.
/// All of this is configuration; the defaults are the repo convention.
struct PromptLibrary {
    std::string generator_system =
        "You are an experienced clinician working through a diagnostic case. Reason step "
        "by step. Write each reasoning step on its own line. Finish with one line of the "
        "form \"ANSWER: <final diagnosis>\".";

    std::map<Strategy, std::string> strategy_instructions = {
        {Strategy::Verification,
         "Your answer was not accepted. Re-examine each step of your reasoning for factual "
         "or logical errors, then reason again."},
        {Strategy::Corrections,
         "Your answer was not accepted. Fix the identified error and continue the reasoning "
         "from there."},
        {Strategy::Backtracking,
         "Your answer was not accepted. Return to the last step you are confident in and "
         "proceed differently from that point."},
        {Strategy::ExploreNewPaths,
         "Your answer was not accepted. Discard the current line of reasoning and start a "
         "different differential."},
    };

    std::string repair_suffix =
        " Keep each reasoning step on its own line and finish with \"ANSWER: <final "
        "diagnosis>\".";

    std::string guided_instruction =
        "The confirmed diagnosis for this case is: \"{answer}\". Outline the chain of "
        "reasoning that leads from the clinical findings to this diagnosis: work through "
        "the presentation, narrow the differential, and arrive at the confirmed diagnosis. "
        "Write each reasoning step on its own line and finish with \"ANSWER: {answer}\".";

    std::string reformat_instruction =
        "Rewrite the following reasoning steps as one flowing first-person passage of "
        "thought. Preserve the content of every step. Connect consecutive steps with "
        "natural transition words such as {connectives}. Do not use numbered lists, "
        "bullet points, or headings such as \"Step 1\".";

    std::string reformat_retry_note =
        "Your previous rewrite violated the formatting constraints. ";

    std::string response_instruction =
        "Based on the reasoning above, write the formal response for this case: a concise "
        "symptom analysis followed by the diagnostic conclusion. State the final diagnosis "
        "explicitly.";

    std::string eval_cot_preamble =
        "Work through this case step by step before giving your final diagnosis.\n\n";

    std::string eval_answer_instruction =
        "\n\nEnd your reply with one line of the form \"FINAL DIAGNOSIS: <diagnosis>\".";

    std::string eval_reprompt =
        "Your reply did not contain the required final line. End your reply with one line "
        "of the form \"FINAL DIAGNOSIS: <diagnosis>\".";

    std::map<Language, std::vector<std::string>> connectives = {
        {Language::en, {"hmm", "also", "wait", "so", "then"}},
        {Language::zh, {"嗯", "另外", "等等", "所以", "然后"}},
    };

    const std::vector<std::string>& connectives_for(Language lang) const {
        auto it = connectives.find(lang);
        if (it == connectives.end() || it->second.empty()) {
            throw ValidationError("no connective lexicon configured for language " +
                                  to_string(lang));
        }
        return it->second;
    }
};

/// Question text shown to generators and evaluated models: the patient
/// history plus clinical findings when present.
inline std::string compose_question(const ClinicalRecord& record) {
    std::string q = "Patient history:\n" + record.history;
    if (!record.findings.empty()) {
        q += "\n\nClinical findings:\n" + record.findings;
    }
    return q;
}

namespace detail {

inline std::string replace_all(std::string text, const std::string& from,
                               const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

}  // namespace detail

}  // namespace cotforge
