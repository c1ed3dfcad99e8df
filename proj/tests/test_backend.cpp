#include <catch2/catch_amalgamated.hpp>

#include <thread>

#include "cotforge/mock_backend.hpp"
#include "helpers.hpp"

using namespace cotforge;

namespace {

MessageList ask(const std::string& text) { return {{"user", text}}; }

std::shared_ptr<ScriptedBackend> scripted(std::vector<ScriptEntry> script, int max_retries = 2,
                                          int max_concurrent = 4) {
    BackendConfig cfg;
    cfg.endpoint = "mock://scripted";
    cfg.max_retries = max_retries;
    cfg.max_concurrent = max_concurrent;
    auto backend = std::make_shared<ScriptedBackend>(cfg, std::move(script), 0);
    backend->set_sleep_function([](std::chrono::milliseconds) {});
    return backend;
}

}  // namespace

TEST_CASE("scripted echo") {
    auto backend = mock_from_script({ScriptEntry::reply("A")});
    auto c = backend->complete(ask("hello"));
    CHECK(c.text == "A");
    CHECK(c.finish_reason == FinishReason::complete);
}

TEST_CASE("fail twice then succeed within the retry budget") {
    auto backend = scripted({ScriptEntry::network(), ScriptEntry::network(),
                             ScriptEntry::reply("B")},
                            /*max_retries=*/2);
    auto c = backend->complete(ask("q"));
    CHECK(c.text == "B");
    CHECK(backend->calls() == 3);
}

TEST_CASE("always failing exhausts retries with an attempt count") {
    auto backend = scripted({ScriptEntry::network(), ScriptEntry::network()},
                            /*max_retries=*/1);
    try {
        backend->complete(ask("q"));
        FAIL("expected TransportError");
    } catch (const TransportError& e) {
        CHECK(e.attempts() == 2);
    }
    CHECK(backend->calls() == 2);
}

TEST_CASE("timeouts surface as TimeoutError after retries") {
    auto backend = scripted({ScriptEntry::timeout(), ScriptEntry::timeout()}, 1);
    CHECK_THROWS_AS(backend->complete(ask("q")), TimeoutError);
}

TEST_CASE("4xx responses are not retried, except 429") {
    auto not_retried = scripted({ScriptEntry::http(404), ScriptEntry::reply("never")}, 3);
    try {
        not_retried->complete(ask("q"));
        FAIL("expected TransportError");
    } catch (const TransportError& e) {
        CHECK(e.attempts() == 1);
        CHECK(e.http_status() == 404);
    }
    CHECK(not_retried->calls() == 1);

    auto throttled = scripted({ScriptEntry::http(429), ScriptEntry::reply("ok")}, 2);
    CHECK(throttled->complete(ask("q")).text == "ok");
    CHECK(throttled->calls() == 2);

    auto server_error = scripted({ScriptEntry::http(500), ScriptEntry::reply("ok")}, 2);
    CHECK(server_error->complete(ask("q")).text == "ok");
}

TEST_CASE("retry count never exceeds configuration") {
    for (int retries = 0; retries <= 3; ++retries) {
        std::vector<ScriptEntry> script(10, ScriptEntry::network());
        auto backend = scripted(script, retries);
        CHECK_THROWS_AS(backend->complete(ask("q")), TransportError);
        CHECK(backend->calls() == static_cast<std::size_t>(retries) + 1);
    }
}

TEST_CASE("backoff delays are nondecreasing with bounded jitter") {
    std::vector<ScriptEntry> script(6, ScriptEntry::network());
    auto backend = scripted(script, 5);
    std::vector<std::chrono::milliseconds> delays;
    backend->set_sleep_function([&](std::chrono::milliseconds d) { delays.push_back(d); });
    CHECK_THROWS_AS(backend->complete(ask("q")), TransportError);
    REQUIRE(delays.size() == 5);
    for (std::size_t i = 0; i < delays.size(); ++i) {
        double base = 500.0 * static_cast<double>(1u << i);
        CHECK(delays[i].count() >= static_cast<long>(base * 0.8) - 1);
        CHECK(delays[i].count() <= static_cast<long>(base * 1.2) + 1);
        if (i > 0) CHECK(delays[i] >= delays[i - 1]);
    }
}

TEST_CASE("script exhaustion raises a deterministic error") {
    auto backend = mock_from_script({ScriptEntry::reply("x"), ScriptEntry::reply("y")});
    CHECK(backend->complete(ask("1")).text == "x");
    CHECK(backend->complete(ask("2")).text == "y");
    CHECK_THROWS_AS(backend->complete(ask("3")), ScriptExhaustedError);
}

TEST_CASE("identical script, seed and calls give identical transcripts") {
    auto run = [] {
        auto backend = mock_from_script(
            {ScriptEntry::reply("a"), ScriptEntry::reply("b"), ScriptEntry::reply("c")}, 42);
        backend->complete(ask("first"));
        backend->complete(ask("second"));
        backend->complete(ask("third"));
        return backend->transcript();
    };
    auto t1 = run();
    auto t2 = run();
    REQUIRE(t1.size() == t2.size());
    for (std::size_t i = 0; i < t1.size(); ++i) {
        CHECK(t1[i].index == t2[i].index);
        CHECK(t1[i].request == t2[i].request);
        CHECK(t1[i].text == t2[i].text);
    }
}

TEST_CASE("keyed scripts route by request content") {
    auto backend = scripted({ScriptEntry::reply("fallback")});
    backend->add_keyed_script("case-7", {ScriptEntry::reply("seven")});
    backend->add_keyed_script("case-9", {ScriptEntry::reply("nine")});
    CHECK(backend->complete(ask("please solve case-9 now")).text == "nine");
    CHECK(backend->complete(ask("please solve case-7 now")).text == "seven");
    CHECK(backend->complete(ask("something else")).text == "fallback");
}

TEST_CASE("at most max_concurrent attempts are in flight under load") {
    constexpr int kCalls = 32;
    std::vector<ScriptEntry> script(kCalls, ScriptEntry::reply("ok"));
    auto backend = scripted(std::move(script), 0, /*max_concurrent=*/3);
    backend->set_simulated_latency(std::chrono::milliseconds(2));

    std::vector<std::thread> threads;
    threads.reserve(8);
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&] {
            for (int i = 0; i < kCalls / 8; ++i) backend->complete(ask("load"));
        });
    }
    for (auto& t : threads) t.join();

    CHECK(backend->calls() == kCalls);
    CHECK(backend->max_in_flight() <= 3);
    CHECK(backend->max_in_flight() >= 1);
}

TEST_CASE("config invariants are enforced") {
    BackendConfig cfg;
    cfg.max_retries = -1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.max_concurrent = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.timeout_s = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    CHECK_THROWS_AS(mock_from_script({}), ValidationError);

    auto backend = mock_from_script({ScriptEntry::reply("x")});
    CHECK_THROWS_AS(backend->complete({}), ValidationError);
}
