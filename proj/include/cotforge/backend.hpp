#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "cotforge/errors.hpp"

namespace cotforge {

struct BackendConfig {
    std::string endpoint;
    std::string model = "mock";
    double timeout_s = 60.0;
    int max_retries = 2;
    int max_concurrent = 4;
    double temperature = 0.0;

    void validate() const {
        if (max_retries < 0) throw ValidationError("max_retries must be >= 0");
        if (max_concurrent < 1) throw ValidationError("max_concurrent must be >= 1");
        if (timeout_s <= 0) throw ValidationError("timeout_s must be > 0");
        if (temperature < 0) throw ValidationError("temperature must be >= 0");
    }
};

struct Message {
    std::string role;
    std::string content;

    bool operator==(const Message&) const = default;
};

using MessageList = std::vector<Message>;

enum class FinishReason { complete, truncated, error };

inline std::string to_string(FinishReason r) {
    switch (r) {
        case FinishReason::complete: return "complete";
        case FinishReason::truncated: return "truncated";
        case FinishReason::error: return "error";
    }
    return "?";
}

struct Completion {
    std::string text;
    FinishReason finish_reason = FinishReason::complete;
    std::chrono::milliseconds latency{0};
};

namespace detail {

/// Counting semaphore bounding in-flight requests per backend handle.
class Permits {
public:
    explicit Permits(int count) : available_(count) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }

    void release() {
        {
            std::lock_guard lock(mu_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int available_;
};

struct PermitGuard {
    explicit PermitGuard(Permits& p) : permits(p) { permits.acquire(); }
    ~PermitGuard() { permits.release(); }
    Permits& permits;
};

/// Outcome of one transport attempt, before the retry policy is applied.
struct AttemptFailure {
    enum class Kind { network, timeout, http };
    Kind kind = Kind::network;
    int status = 0;
    std::string detail;

    bool retryable() const {
        if (kind != Kind::http) return true;
        return status == 429 || status >= 500;
    }
};

}  // namespace detail

/// Text-generation backend. complete() applies the shared concurrency and
/// retry contract around a transport-specific attempt_once().
class Backend {
public:
    explicit Backend(BackendConfig config, std::uint64_t seed = 0)
        : config_(std::move(config)), permits_(config_.max_concurrent), rng_(seed) {
        config_.validate();
    }

    virtual ~Backend() = default;

    const BackendConfig& config() const { return config_; }

    /// Retries transient failures (network, timeout, HTTP 429/5xx) up to
    /// max_retries with exponential backoff; other 4xx fail immediately.
    Completion complete(const MessageList& messages) {
        if (messages.empty()) throw ValidationError("prompt message list is empty");
        detail::PermitGuard permit(permits_);
        detail::AttemptFailure last;
        int attempts = 0;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            ++attempts;
            auto start = std::chrono::steady_clock::now();
            try {
                int entered = ++in_flight_;
                update_max(entered);
                Completion c;
                try {
                    c = attempt_once(messages);
                } catch (...) {
                    --in_flight_;
                    throw;
                }
                --in_flight_;
                c.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start);
                return c;
            } catch (const detail::AttemptFailure& f) {
                last = f;
                if (!f.retryable()) {
                    throw TransportError("backend request rejected (HTTP " +
                                             std::to_string(f.status) + "): " + f.detail,
                                         attempts, f.status);
                }
                if (attempt < config_.max_retries) {
                    sleep_(backoff_delay(attempt));
                }
            }
        }
        if (last.kind == detail::AttemptFailure::Kind::timeout) {
            throw TimeoutError("backend request timed out after " + std::to_string(attempts) +
                                   " attempts: " + last.detail,
                               attempts);
        }
        throw TransportError("backend request failed after " + std::to_string(attempts) +
                                 " attempts: " + last.detail,
                             attempts, last.status);
    }

    /// Highest number of attempts observed in flight at once.
    int max_in_flight() const { return max_in_flight_.load(); }

    /// Replaces the backoff sleep (tests capture delays instead of waiting).
    void set_sleep_function(std::function<void(std::chrono::milliseconds)> fn) {
        sleep_ = std::move(fn);
    }

protected:
    /// One transport attempt. Throws detail::AttemptFailure on failure.
    virtual Completion attempt_once(const MessageList& messages) = 0;

private:
    std::chrono::milliseconds backoff_delay(int retry_index) {
        // base 500 ms, factor 2, jitter +/-20%; nondecreasing across retries.
        double base = 500.0 * static_cast<double>(1ull << retry_index);
        double jitter;
        {
            std::lock_guard lock(rng_mu_);
            jitter = std::uniform_real_distribution<double>(0.8, 1.2)(rng_);
        }
        return std::chrono::milliseconds(static_cast<long>(base * jitter));
    }

    void update_max(int seen) {
        int cur = max_in_flight_.load();
        while (seen > cur && !max_in_flight_.compare_exchange_weak(cur, seen)) {
        }
    }

    BackendConfig config_;
    detail::Permits permits_;
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
    std::mutex rng_mu_;
    std::mt19937_64 rng_;
    std::function<void(std::chrono::milliseconds)> sleep_ =
        [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
};

}  // namespace cotforge
