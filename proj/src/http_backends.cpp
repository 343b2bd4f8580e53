// Network-facing backends. Kept in one translation unit so the HTTP library
// is compiled once.
#include "apiforge/errors.hpp"
#include "apiforge/genclient.hpp"
#include "apiforge/retrieval.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <thread>

namespace apiforge {

namespace {

std::string require_env(const std::string& name) {
    const char* value = std::getenv(name.c_str());
    if (!value || !*value)
        throw Error("BackendUnavailable", "environment variable " + name + " is not set");
    return value;
}

// POSTs a JSON body, retrying transient failures with a short backoff.
nlohmann::json post_json(const std::string& host, const std::string& path,
                         const std::string& api_key, const nlohmann::json& body,
                         int timeout_seconds, int max_retries) {
    std::string last_error = "no attempts made";
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(250 * attempt));
        httplib::Client client(host);
        client.set_connection_timeout(timeout_seconds, 0);
        client.set_read_timeout(timeout_seconds, 0);
        httplib::Headers headers{{"Authorization", "Bearer " + api_key}};
        auto result = client.Post(path, headers, body.dump(), "application/json");
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status == 429 || result->status >= 500) {
            last_error = "HTTP " + std::to_string(result->status);
            continue;
        }
        if (result->status != 200)
            throw Error("BackendUnavailable",
                        "HTTP " + std::to_string(result->status) + ": " + result->body);
        try {
            return nlohmann::json::parse(result->body);
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("bad JSON response: ") + e.what();
        }
    }
    throw Error("BackendUnavailable", last_error);
}

class LiveGenerationBackend : public genclient::GenerationBackend {
public:
    explicit LiveGenerationBackend(genclient::LiveBackendConfig config)
        : config_(std::move(config)) {}

    std::string name() const override { return "live:" + config_.model; }

    std::string generate(const std::string& prompt, double temperature) override {
        nlohmann::json body;
        body["model"] = config_.model;
        body["temperature"] = temperature;
        body["messages"] =
            nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});
        auto response = post_json(config_.host, config_.path, require_env(config_.api_key_env),
                                  body, config_.timeout_seconds, config_.max_retries);
        try {
            return response.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw Error("BackendUnavailable", std::string("unexpected response shape: ") +
                                                  e.what());
        }
    }

private:
    genclient::LiveBackendConfig config_;
};

class ExternalEmbeddingBackend : public retrieval::EmbeddingBackend {
public:
    explicit ExternalEmbeddingBackend(retrieval::ExternalBackendConfig config)
        : config_(std::move(config)) {}

    std::string name() const override { return "external:" + config_.model; }
    size_t dimension() const override { return config_.dimension; }

    retrieval::EmbeddingVector embed_raw(const std::string& text) override {
        nlohmann::json body;
        body["model"] = config_.model;
        body["input"] = text;
        auto response = post_json(config_.host, config_.path, require_env(config_.api_key_env),
                                  body, config_.timeout_seconds, config_.max_retries);
        try {
            auto v = response.at("data").at(0).at("embedding")
                         .get<retrieval::EmbeddingVector>();
            if (v.size() != config_.dimension)
                throw Error("BackendUnavailable",
                            "embedding dimension " + std::to_string(v.size()) + ", expected " +
                                std::to_string(config_.dimension));
            return v;
        } catch (const nlohmann::json::exception& e) {
            throw Error("BackendUnavailable", std::string("unexpected response shape: ") +
                                                  e.what());
        }
    }

private:
    retrieval::ExternalBackendConfig config_;
};

} // namespace

namespace genclient {

std::unique_ptr<GenerationBackend> make_live_backend(const LiveBackendConfig& config) {
    return std::make_unique<LiveGenerationBackend>(config);
}

} // namespace genclient

namespace retrieval {

std::unique_ptr<EmbeddingBackend> make_external_backend(const ExternalBackendConfig& config) {
    return std::make_unique<ExternalEmbeddingBackend>(config);
}

} // namespace retrieval

} // namespace apiforge
