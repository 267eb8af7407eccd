#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include <httplib.h>

#include "srct/dispatch.hpp"

namespace srct::dispatch {

// Chat-completions-style HTTP provider. One instance per access point; the
// base URL, path, and model string come from the config, credentials from the
// named environment variable. Build with CPPHTTPLIB_OPENSSL_SUPPORT for
// https endpoints.
class HttpProvider : public Provider {
  public:
    explicit HttpProvider(ProviderConfig config) : config_(std::move(config)) {}

    void preflight() override {
        config_.validate();
        if (config_.endpoint.empty())
            throw ConfigError("provider \"" + config_.provider_id + "\": endpoint is required");
        if (!config_.auth_env.empty() && std::getenv(config_.auth_env.c_str()) == nullptr)
            throw ConfigError("provider \"" + config_.provider_id + "\": credential env var " +
                              config_.auth_env + " is not set");
    }

    CompletionResult complete(const TrialPlan&, const std::vector<Message>& messages,
                              std::uint64_t) override {
        httplib::Client client(config_.endpoint);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        httplib::Headers headers;
        if (!config_.auth_env.empty()) {
            const char* key = std::getenv(config_.auth_env.c_str());
            if (key) headers.emplace("Authorization", std::string("Bearer ") + key);
        }
        const auto body = chat_request_body(config_, messages).dump();
        const auto res = client.Post(config_.path, headers, body, "application/json");
        if (!res) {
            CompletionResult result;
            result.outcome = Outcome::transport_error;
            result.retryable = true;
            result.error = "transport: " + httplib::to_string(res.error());
            return result;
        }
        return parse_chat_response(res->status, res->body);
    }

  private:
    ProviderConfig config_;
};

// Parses a providers file: an array of access-point entries, each serving one
// or more models. Returns one binding per model.
inline std::map<std::string, ProviderBinding> load_provider_bindings(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    if (!j.is_array()) throw ConfigError(path + ": expected an array of provider entries");
    std::map<std::string, ProviderBinding> bindings;
    for (const auto& entry : j) {
        ProviderConfig base;
        base.provider_id = entry.at("provider_id").get<std::string>();
        base.endpoint = entry.at("endpoint").get<std::string>();
        if (entry.contains("path")) base.path = entry.at("path").get<std::string>();
        if (entry.contains("auth_env")) base.auth_env = entry.at("auth_env").get<std::string>();
        if (entry.contains("max_concurrent"))
            base.max_concurrent = entry.at("max_concurrent").get<int>();
        if (entry.contains("requests_per_minute"))
            base.requests_per_minute = entry.at("requests_per_minute").get<double>();
        if (entry.contains("retry")) {
            const auto& r = entry.at("retry");
            if (r.contains("max_attempts")) base.retry.max_attempts = r.at("max_attempts").get<int>();
            if (r.contains("backoff_base_seconds"))
                base.retry.backoff_base_seconds = r.at("backoff_base_seconds").get<double>();
        }
        if (entry.contains("temperature")) base.temperature = entry.at("temperature").get<double>();
        if (entry.contains("max_output_tokens"))
            base.max_output_tokens = entry.at("max_output_tokens").get<int>();
        base.validate();
        if (!entry.contains("models") || !entry.at("models").is_array())
            throw ConfigError(path + ": provider \"" + base.provider_id +
                              "\" must list the models it serves");
        auto provider = std::make_shared<HttpProvider>(base);
        for (const auto& m : entry.at("models")) {
            ProviderConfig config = base;
            config.model = m.get<std::string>();
            if (bindings.count(config.model))
                throw ConfigError(path + ": model \"" + config.model +
                                  "\" is served by more than one provider");
            bindings[config.model] = ProviderBinding{config, provider};
        }
    }
    return bindings;
}

}  // namespace srct::dispatch
