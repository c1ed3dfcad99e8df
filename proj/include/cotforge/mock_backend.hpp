#pragma once

#include <chrono>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cotforge/backend.hpp"

namespace cotforge {

/// One canned mock outcome.
struct ScriptEntry {
    enum class Kind { text, truncated, network_fail, timeout_fail, http_fail };

    Kind kind = Kind::text;
    std::string text;
    int status = 0;

    static ScriptEntry reply(std::string t) { return {Kind::text, std::move(t), 0}; }
    static ScriptEntry truncated(std::string t) { return {Kind::truncated, std::move(t), 0}; }
    static ScriptEntry network() { return {Kind::network_fail, "scripted network failure", 0}; }
    static ScriptEntry timeout() { return {Kind::timeout_fail, "scripted timeout", 0}; }
    static ScriptEntry http(int status) {
        return {Kind::http_fail, "scripted HTTP " + std::to_string(status), status};
    }
};

struct TranscriptEntry {
    std::size_t index = 0;
    MessageList request;
    bool ok = false;
    std::string text;  // response text, or failure detail
};

/// Deterministic scripted backend. Responses are delivered in script order;
/// in keyed mode each call is routed to the first key found in the request
/// content. Calls beyond the script raise ScriptExhaustedError.
class ScriptedBackend : public Backend {
public:
    ScriptedBackend(BackendConfig config, std::vector<ScriptEntry> script, std::uint64_t seed = 0)
        : Backend(std::move(config), seed), script_(script.begin(), script.end()) {}

    /// Routes any request whose content contains `key` to this sub-script.
    /// Keys are checked in insertion order.
    void add_keyed_script(std::string key, std::vector<ScriptEntry> script) {
        std::lock_guard lock(mu_);
        keyed_.emplace_back(std::move(key),
                            std::deque<ScriptEntry>(script.begin(), script.end()));
    }

    /// Artificial per-call latency, for concurrency tests.
    void set_simulated_latency(std::chrono::milliseconds d) { simulated_latency_ = d; }

    std::vector<TranscriptEntry> transcript() const {
        std::lock_guard lock(mu_);
        return transcript_;
    }

    std::size_t calls() const {
        std::lock_guard lock(mu_);
        return transcript_.size();
    }

protected:
    Completion attempt_once(const MessageList& messages) override {
        if (simulated_latency_.count() > 0) std::this_thread::sleep_for(simulated_latency_);
        ScriptEntry entry;
        std::size_t index;
        {
            std::lock_guard lock(mu_);
            index = transcript_.size();
            entry = next_entry(messages, index);
            TranscriptEntry t;
            t.index = index;
            t.request = messages;
            t.ok = entry.kind == ScriptEntry::Kind::text ||
                   entry.kind == ScriptEntry::Kind::truncated;
            t.text = entry.text;
            transcript_.push_back(std::move(t));
        }
        switch (entry.kind) {
            case ScriptEntry::Kind::text:
                return Completion{entry.text, FinishReason::complete, {}};
            case ScriptEntry::Kind::truncated:
                return Completion{entry.text, FinishReason::truncated, {}};
            case ScriptEntry::Kind::network_fail:
                throw detail::AttemptFailure{detail::AttemptFailure::Kind::network, 0, entry.text};
            case ScriptEntry::Kind::timeout_fail:
                throw detail::AttemptFailure{detail::AttemptFailure::Kind::timeout, 0, entry.text};
            case ScriptEntry::Kind::http_fail:
                throw detail::AttemptFailure{detail::AttemptFailure::Kind::http, entry.status,
                                             entry.text};
        }
        throw Error("unreachable");
    }

private:
    ScriptEntry next_entry(const MessageList& messages, std::size_t calls_so_far) {
        for (auto& [key, queue] : keyed_) {
            if (queue.empty()) continue;
            for (const auto& m : messages) {
                if (m.content.find(key) != std::string::npos) {
                    ScriptEntry e = queue.front();
                    queue.pop_front();
                    return e;
                }
            }
        }
        if (script_.empty()) throw ScriptExhaustedError(calls_so_far);
        ScriptEntry e = script_.front();
        script_.pop_front();
        return e;
    }

    mutable std::mutex mu_;
    std::deque<ScriptEntry> script_;
    std::vector<std::pair<std::string, std::deque<ScriptEntry>>> keyed_;
    std::vector<TranscriptEntry> transcript_;
    std::chrono::milliseconds simulated_latency_{0};
};

/// Builds a scripted backend with a permissive default config.
inline std::shared_ptr<ScriptedBackend> mock_from_script(std::vector<ScriptEntry> script,
                                                         std::uint64_t seed = 0) {
    if (script.empty()) throw ValidationError("mock script is empty");
    BackendConfig cfg;
    cfg.endpoint = "mock://scripted";
    cfg.model = "mock";
    return std::make_shared<ScriptedBackend>(std::move(cfg), std::move(script), seed);
}

}  // namespace cotforge
