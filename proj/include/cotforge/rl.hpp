#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cotforge/errors.hpp"
#include "cotforge/record.hpp"
#include "cotforge/verify.hpp"

namespace cotforge {

struct PPOConfig {
    int epochs = 3;
    double discount = 1.0;         // gamma
    double value_coefficient = 1.0;
    double clip_range = 0.2;       // epsilon
    double kl_coefficient = 0.03;  // beta
    double learning_rate = 5e-7;   // reference value; scale up for the toy policy
    int batch_size = 16;

    void validate() const {
        if (clip_range <= 0 || clip_range >= 1) throw ValidationError("clip_range must be in (0,1)");
        if (discount <= 0 || discount > 1) throw ValidationError("discount must be in (0,1]");
        if (value_coefficient < 0) throw ValidationError("value_coefficient must be >= 0");
        if (kl_coefficient < 0) throw ValidationError("kl_coefficient must be >= 0");
        if (learning_rate <= 0) throw ValidationError("learning_rate must be > 0");
        if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
        if (epochs < 1) throw ValidationError("epochs must be >= 1");
    }
};

/// One-step diagnostic environment with K case types. Action k answers
/// diagnosis k directly; action K+k thinks first, then answers diagnosis k.
/// Rewards come from the outcome reward table, so the environment exercises
/// the same scoring path as the data pipeline.
class ToyDiagnosisEnv {
public:
    explicit ToyDiagnosisEnv(int num_diagnoses) : k_(num_diagnoses) {
        if (num_diagnoses < 2 || num_diagnoses > 100) {
            throw ValidationError("toy environment supports 2..100 diagnoses");
        }
        for (int i = 0; i < k_; ++i) {
            char code[16];
            std::snprintf(code, sizeof(code), "Z%02d", i % 100);
            labels_.push_back(DiagnosisLabel{code, "toy diagnosis " + std::to_string(i)});
        }
    }

    int num_cases() const { return k_; }
    int num_actions() const { return 2 * k_; }
    bool thinks(int action) const { return action >= k_; }
    int diagnosis_of(int action) const { return action % k_; }
    int think_action_for(int case_id) const { return k_ + case_id; }
    const DiagnosisLabel& label(int case_id) const { return labels_[case_id]; }

    double reward_for(int case_id, int action) const {
        std::optional<std::string> thinking;
        if (thinks(action)) thinking = "considered the differential before answering";
        RewardSignal r = reward(labels_[diagnosis_of(action)].name, thinking, labels_[case_id]);
        return r.value;
    }

private:
    int k_;
    std::vector<DiagnosisLabel> labels_;
};

struct ToyPolicy {
    std::vector<std::vector<double>> logits;  // [case][action]
    std::vector<double> value;                // [case]

    static ToyPolicy uniform(int num_cases, int num_actions) {
        ToyPolicy p;
        p.logits.assign(num_cases, std::vector<double>(num_actions, 0.0));
        p.value.assign(num_cases, 0.0);
        return p;
    }

    std::vector<double> probs(int case_id) const {
        const auto& row = logits[case_id];
        double mx = *std::max_element(row.begin(), row.end());
        std::vector<double> p(row.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            p[i] = std::exp(row[i] - mx);
            sum += p[i];
        }
        for (auto& v : p) v /= sum;
        return p;
    }

    double log_prob(int case_id, int action) const {
        const auto& row = logits[case_id];
        double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double v : row) sum += std::exp(v - mx);
        return row[action] - mx - std::log(sum);
    }
};

struct TrajectoryBatch {
    std::vector<int> states;
    std::vector<int> actions;
    std::vector<double> rewards;
    std::vector<double> old_log_probs;  // of the chosen action, for the ratio
    std::vector<double> advantages;
    std::vector<double> returns;
    // Full rollout-policy action distribution per sample. The KL penalty is
    // computed exactly from it (its gradient vanishes at pi == pi_old, which
    // the chosen-action estimator does not); may be empty when
    // kl_coefficient == 0.
    std::vector<std::vector<double>> old_action_probs;

    std::size_t size() const { return states.size(); }

    void validate() const {
        std::size_t n = states.size();
        if (n == 0) throw ValidationError("trajectory batch is empty");
        if (actions.size() != n || rewards.size() != n || old_log_probs.size() != n ||
            advantages.size() != n || returns.size() != n) {
            throw ValidationError("trajectory batch field lengths differ");
        }
        if (!old_action_probs.empty() && old_action_probs.size() != n) {
            throw ValidationError("old_action_probs length differs from the batch");
        }
        for (double lp : old_log_probs) {
            if (!std::isfinite(lp)) throw NumericalError("old log probability");
        }
    }
};

/// Discounted suffix sums: R_t = sum_{s >= t} gamma^{s-t} r_s.
inline std::vector<double> compute_returns(const std::vector<double>& rewards, double gamma) {
    std::vector<double> returns(rewards.size());
    double acc = 0.0;
    for (std::size_t i = rewards.size(); i-- > 0;) {
        if (!std::isfinite(rewards[i])) throw NumericalError("reward");
        acc = rewards[i] + gamma * acc;
        returns[i] = acc;
    }
    return returns;
}

struct PpoLossResult {
    double loss = 0.0;
    double surrogate = 0.0;
    double value_loss = 0.0;  // unweighted mean squared error
    double kl = 0.0;          // sampled estimate of KL(pi_old || pi)
    std::vector<std::vector<double>> logits_grad;
    std::vector<double> value_grad;
};

/// Clipped-surrogate PPO loss with value term and KL penalty:
///   loss = -E[min(rho A, clip(rho, 1-eps, 1+eps) A)]
///          + value_coefficient * E[(V - R)^2]
///          + kl_coefficient * E[KL(pi_old(.|s) || pi(.|s))]
/// Gradients are hand-written for the tabular softmax policy.
inline PpoLossResult ppo_loss(const TrajectoryBatch& batch, const ToyPolicy& policy,
                              const PPOConfig& config) {
    batch.validate();
    config.validate();
    if (config.kl_coefficient > 0 && batch.old_action_probs.empty()) {
        throw ValidationError("KL penalty requires old_action_probs in the batch");
    }
    const double n = static_cast<double>(batch.size());
    const double eps = config.clip_range;

    PpoLossResult out;
    out.logits_grad.assign(policy.logits.size(),
                           std::vector<double>(policy.logits.empty() ? 0 : policy.logits[0].size(),
                                               0.0));
    out.value_grad.assign(policy.value.size(), 0.0);

    for (std::size_t i = 0; i < batch.size(); ++i) {
        int s = batch.states[i];
        int a = batch.actions[i];
        auto probs = policy.probs(s);
        double new_lp = policy.log_prob(s, a);
        if (!std::isfinite(new_lp)) throw NumericalError("log probability");

        double rho = std::exp(new_lp - batch.old_log_probs[i]);
        if (!std::isfinite(rho)) throw NumericalError("importance ratio");
        double advantage = batch.advantages[i];
        double unclipped = rho * advantage;
        double clipped = std::clamp(rho, 1.0 - eps, 1.0 + eps) * advantage;

        double d_surrogate_d_lp = 0.0;  // of the per-sample -min(., .) term
        if (unclipped <= clipped) {
            out.surrogate += -unclipped;
            d_surrogate_d_lp = -advantage * rho;
        } else {
            out.surrogate += -clipped;
        }

        double verr = policy.value[s] - batch.returns[i];
        out.value_loss += verr * verr;
        out.value_grad[s] += config.value_coefficient * 2.0 * verr / n;

        auto& grad_row = out.logits_grad[s];
        for (std::size_t k = 0; k < probs.size(); ++k) {
            double indicator = static_cast<int>(k) == a ? 1.0 : 0.0;
            grad_row[k] += d_surrogate_d_lp / n * (indicator - probs[k]);
        }

        if (!batch.old_action_probs.empty()) {
            const auto& old_probs = batch.old_action_probs[i];
            if (old_probs.size() != probs.size()) {
                throw ValidationError("old_action_probs row has the wrong arity");
            }
            for (std::size_t k = 0; k < probs.size(); ++k) {
                if (old_probs[k] > 0) {
                    out.kl += old_probs[k] * (std::log(old_probs[k]) - std::log(probs[k]));
                }
                grad_row[k] += config.kl_coefficient * (probs[k] - old_probs[k]) / n;
            }
            if (!std::isfinite(out.kl)) throw NumericalError("kl divergence");
        }
    }

    out.surrogate /= n;
    out.value_loss /= n;
    out.kl /= n;
    out.loss = out.surrogate + config.value_coefficient * out.value_loss +
               config.kl_coefficient * out.kl;
    if (!std::isfinite(out.loss)) throw NumericalError("total loss");
    return out;
}

struct CurvePoint {
    int step = 0;
    double mean_reward = 0.0;
    double p_think_correct = 0.0;
};

/// Exact expectations under the current policy over the uniform case
/// distribution, by enumeration.
inline CurvePoint exact_policy_stats(const ToyDiagnosisEnv& env, const ToyPolicy& policy,
                                     int step) {
    CurvePoint pt;
    pt.step = step;
    for (int c = 0; c < env.num_cases(); ++c) {
        auto probs = policy.probs(c);
        for (int a = 0; a < env.num_actions(); ++a) {
            pt.mean_reward += probs[a] * env.reward_for(c, a);
        }
        pt.p_think_correct += probs[env.think_action_for(c)];
    }
    pt.mean_reward /= env.num_cases();
    pt.p_think_correct /= env.num_cases();
    return pt;
}

struct ToyTrainResult {
    std::vector<CurvePoint> curve;  // one point per step (pre-update) plus a final point
    ToyPolicy policy;
};

/// PPO training loop on the toy environment: rollouts with the current
/// policy, rewards from the outcome table, config.epochs updates per batch.
inline ToyTrainResult train_toy(const ToyDiagnosisEnv& env, const PPOConfig& config,
                                std::uint64_t seed, int steps) {
    config.validate();
    if (steps < 1) throw ValidationError("steps must be >= 1");

    ToyPolicy policy = ToyPolicy::uniform(env.num_cases(), env.num_actions());
    std::mt19937_64 rng(seed);
    auto draw_unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    ToyTrainResult result;
    result.curve.reserve(static_cast<std::size_t>(steps) + 1);

    for (int step = 0; step < steps; ++step) {
        result.curve.push_back(exact_policy_stats(env, policy, step));

        TrajectoryBatch batch;
        for (int b = 0; b < config.batch_size; ++b) {
            int s = static_cast<int>(rng() % static_cast<std::uint64_t>(env.num_cases()));
            auto probs = policy.probs(s);
            double u = draw_unit();
            int a = 0;
            double cum = 0.0;
            for (std::size_t k = 0; k < probs.size(); ++k) {
                cum += probs[k];
                if (u < cum) {
                    a = static_cast<int>(k);
                    break;
                }
                a = static_cast<int>(k);
            }
            double r = env.reward_for(s, a);
            auto ret = compute_returns({r}, config.discount);
            batch.states.push_back(s);
            batch.actions.push_back(a);
            batch.rewards.push_back(r);
            batch.old_log_probs.push_back(policy.log_prob(s, a));
            batch.returns.push_back(ret[0]);
            batch.advantages.push_back(ret[0] - policy.value[s]);
            batch.old_action_probs.push_back(probs);
        }

        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            PpoLossResult res;
            try {
                res = ppo_loss(batch, policy, config);
            } catch (const NumericalError& e) {
                throw NumericalError(e.term(), step);
            }
            for (std::size_t s = 0; s < policy.logits.size(); ++s) {
                for (std::size_t k = 0; k < policy.logits[s].size(); ++k) {
                    policy.logits[s][k] -= config.learning_rate * res.logits_grad[s][k];
                }
                policy.value[s] -= config.learning_rate * res.value_grad[s];
            }
        }
    }
    result.curve.push_back(exact_policy_stats(env, policy, steps));
    result.policy = std::move(policy);
    return result;
}

/// Curve CSV: step,mean_reward,p_think_correct with round-trip precision.
inline void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "step,mean_reward,p_think_correct\n";
    char buf[80];
    for (const auto& pt : curve) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g", pt.step, pt.mean_reward,
                      pt.p_think_correct);
        out << buf << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

// ---------------------------------------------------------------------------
// Training-config documents
// ---------------------------------------------------------------------------

enum class TrainingStage { sft, rl };

inline TrainingStage stage_from_string(std::string_view s) {
    if (s == "sft") return TrainingStage::sft;
    if (s == "rl") return TrainingStage::rl;
    throw ValidationError("unknown training stage \"" + std::string(s) + "\"");
}

/// Reference hyperparameter documents for external trainers. Values are
/// recorded as configured, including the equal cosine endpoints (flagged in
/// a warning field rather than silently corrected).
inline ordered_json emit_training_config(TrainingStage stage) {
    if (stage == TrainingStage::sft) {
        return ordered_json{
            {"stage", "sft"},
            {"epochs", 3},
            {"learning_rate_schedule",
             ordered_json{{"type", "cosine"},
                          {"start", 5e-6},
                          {"end", 5e-6},
                          {"warning",
                           "schedule endpoints are equal as configured; cosine decay is a "
                           "no-op"}}},
            {"sequence_packing", ordered_json{{"enabled", true}, {"sample_masking", true}}},
        };
    }
    return ordered_json{
        {"stage", "rl"},
        {"algorithm", "ppo"},
        {"learning_rate", 5e-7},
        {"batch_size", 16},
        {"kl_coefficient", 0.03},
        {"kl_semantics", "penalty against the previous policy"},
        {"ppo", ordered_json{{"epochs", 3},
                             {"discount", 1.0},
                             {"value_coefficient", 1.0},
                             {"clip_range", 0.2}}},
    };
}

inline ordered_json parse_training_config(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed training config: ") + e.what());
    }
    TrainingStage stage = stage_from_string(j.at("stage").get<std::string>());
    if (stage == TrainingStage::sft) {
        j.at("epochs");
        j.at("learning_rate_schedule").at("type");
    } else {
        j.at("learning_rate");
        j.at("ppo").at("clip_range");
    }
    return j;
}

}  // namespace cotforge
