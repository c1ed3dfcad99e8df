#pragma once

#include <cstdlib>
#include <memory>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "cotforge/backend.hpp"

namespace cotforge {

/// Name of the environment variable holding the API key, if any.
inline constexpr const char* kApiKeyEnvVar = "COTFORGE_API_KEY";

/// Chat-completions client for any endpoint speaking the de-facto JSON shape:
/// POST {endpoint}/chat/completions with {model, messages, temperature},
/// answer read from choices[0].message.content.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(BackendConfig config, std::uint64_t seed = 0)
        : Backend(std::move(config), seed) {
        split_endpoint(this->config().endpoint, base_, path_prefix_);
    }

protected:
    Completion attempt_once(const MessageList& messages) override {
        httplib::Client client(base_);
        auto timeout = std::chrono::duration<double>(config().timeout_s);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);

        httplib::Headers headers;
        if (const char* key = std::getenv(kApiKeyEnvVar); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }

        nlohmann::json body;
        body["model"] = config().model;
        body["temperature"] = config().temperature;
        auto& msgs = body["messages"] = nlohmann::json::array();
        for (const auto& m : messages) {
            msgs.push_back({{"role", m.role}, {"content", m.content}});
        }

        std::string path = path_prefix_;
        if (path.find("/chat/completions") == std::string::npos) {
            path += "/chat/completions";
        }
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res) {
            auto err = res.error();
            bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             err == httplib::Error::Read || err == httplib::Error::Write;
            throw detail::AttemptFailure{timed_out ? detail::AttemptFailure::Kind::timeout
                                                   : detail::AttemptFailure::Kind::network,
                                         0, httplib::to_string(err)};
        }
        if (res->status < 200 || res->status >= 300) {
            throw detail::AttemptFailure{detail::AttemptFailure::Kind::http, res->status,
                                         res->body.substr(0, 200)};
        }
        return parse_completion(res->body);
    }

private:
    static Completion parse_completion(const std::string& body) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
            const auto& choice = j.at("choices").at(0);
            Completion c;
            c.text = choice.at("message").at("content").get<std::string>();
            std::string reason = choice.value("finish_reason", "stop");
            if (reason == "stop") {
                c.finish_reason = FinishReason::complete;
            } else if (reason == "length") {
                c.finish_reason = FinishReason::truncated;
            } else {
                c.finish_reason = FinishReason::error;
            }
            return c;
        } catch (const nlohmann::json::exception& e) {
            throw detail::AttemptFailure{detail::AttemptFailure::Kind::network, 0,
                                         std::string("unparseable completion body: ") + e.what()};
        }
    }

    // "http://host:port/v1" -> ("http://host:port", "/v1")
    static void split_endpoint(const std::string& endpoint, std::string& base,
                               std::string& path) {
        auto scheme = endpoint.find("://");
        std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
        auto slash = endpoint.find('/', host_start);
        if (slash == std::string::npos) {
            base = endpoint;
            path.clear();
        } else {
            base = endpoint.substr(0, slash);
            path = endpoint.substr(slash);
            while (!path.empty() && path.back() == '/') path.pop_back();
        }
    }

    std::string base_;
    std::string path_prefix_;
};

}  // namespace cotforge
