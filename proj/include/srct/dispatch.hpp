#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "srct/common.hpp"
#include "srct/design.hpp"
#include "srct/population.hpp"
#include "srct/rng.hpp"

namespace srct::dispatch {

using json = nlohmann::ordered_json;
using design::Message;
using design::TrialPlan;

// --- time ---------------------------------------------------------------------

struct Clock {
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() = 0;
    virtual void sleep_ms(std::int64_t ms) = 0;
};

struct SystemClock : Clock {
    std::int64_t now_ms() override {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }
    void sleep_ms(std::int64_t ms) override {
        if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }
};

// Simulated time starting at zero; sleeping advances the clock instantly.
// Mock runs use one virtual clock per provider lane, which keeps transcript
// timestamps reproducible.
struct VirtualClock : Clock {
    std::int64_t now_ms() override {
        std::lock_guard<std::mutex> lock(mu_);
        return now_;
    }
    void sleep_ms(std::int64_t ms) override {
        std::lock_guard<std::mutex> lock(mu_);
        if (ms > 0) now_ += ms;
    }

  private:
    std::mutex mu_;
    std::int64_t now_ = 0;
};

// Paces requests at a fixed minimum spacing of 60000/rpm milliseconds.
class RateLimiter {
  public:
    RateLimiter(double requests_per_minute, Clock& clock)
        : interval_ms_(requests_per_minute > 0
                           ? static_cast<std::int64_t>(60000.0 / requests_per_minute)
                           : 0),
          clock_(clock) {}

    void acquire() {
        if (interval_ms_ == 0) return;
        std::int64_t wait = 0;
        {
            std::lock_guard<std::mutex> lock(mu_);
            const std::int64_t now = clock_.now_ms();
            const std::int64_t slot = std::max(now, next_);
            next_ = slot + interval_ms_;
            wait = slot - now;
        }
        if (wait > 0) clock_.sleep_ms(wait);
    }

  private:
    std::int64_t interval_ms_;
    Clock& clock_;
    std::mutex mu_;
    std::int64_t next_ = 0;
};

// --- provider contract ---------------------------------------------------------

struct RetryPolicy {
    int max_attempts = 3;
    double backoff_base_seconds = 0.5;
};

struct ProviderConfig {
    std::string provider_id;
    std::string endpoint;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string auth_env;  // name of the credential env var; value is never logged
    int max_concurrent = 1;
    double requests_per_minute = 0.0;  // 0 = unlimited
    RetryPolicy retry;
    double temperature = 1.0;
    int max_output_tokens = 1024;

    void validate() const {
        if (provider_id.empty()) throw ConfigError("provider config: provider_id is required");
        if (max_concurrent < 1)
            throw ConfigError("provider \"" + provider_id + "\": max_concurrent must be >= 1");
        if (temperature < 0.0)
            throw ConfigError("provider \"" + provider_id + "\": temperature must be >= 0");
        if (retry.max_attempts < 1)
            throw ConfigError("provider \"" + provider_id + "\": retry.max_attempts must be >= 1");
    }
};

enum class Outcome { ok, transport_error, refused, truncated };

inline std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::ok: return "ok";
        case Outcome::transport_error: return "transport-error";
        case Outcome::refused: return "refused";
        case Outcome::truncated: return "truncated";
    }
    return "transport-error";
}

inline Outcome outcome_from_name(const std::string& s) {
    if (s == "ok") return Outcome::ok;
    if (s == "refused") return Outcome::refused;
    if (s == "truncated") return Outcome::truncated;
    if (s == "transport-error") return Outcome::transport_error;
    throw std::invalid_argument("unknown outcome \"" + s + "\"");
}

struct TranscriptRecord {
    std::string trial_id;
    std::string provider_id;
    std::string session_id;
    std::vector<Message> request;
    std::string completion;
    std::int64_t requested_at_ms = 0;
    std::int64_t responded_at_ms = 0;
    int attempts = 0;
    Outcome outcome = Outcome::transport_error;
    std::string error;  // last transport error, when any
};

inline json to_json(const TranscriptRecord& r) {
    json j;
    j["trial_id"] = r.trial_id;
    j["provider_id"] = r.provider_id;
    j["session_id"] = r.session_id;
    json msgs = json::array();
    for (const auto& m : r.request) msgs.push_back({{"role", m.role}, {"content", m.content}});
    j["request"] = msgs;
    j["completion"] = r.completion;
    j["requested_at_ms"] = r.requested_at_ms;
    j["responded_at_ms"] = r.responded_at_ms;
    j["attempts"] = r.attempts;
    j["outcome"] = outcome_name(r.outcome);
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

inline TranscriptRecord transcript_from_json(const json& j) {
    TranscriptRecord r;
    r.trial_id = j.at("trial_id").get<std::string>();
    r.provider_id = j.at("provider_id").get<std::string>();
    r.session_id = j.at("session_id").get<std::string>();
    for (const auto& m : j.at("request"))
        r.request.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
    r.completion = j.at("completion").get<std::string>();
    r.requested_at_ms = j.at("requested_at_ms").get<std::int64_t>();
    r.responded_at_ms = j.at("responded_at_ms").get<std::int64_t>();
    r.attempts = j.at("attempts").get<int>();
    r.outcome = outcome_from_name(j.at("outcome").get<std::string>());
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    return r;
}

struct CompletionResult {
    std::string text;
    Outcome outcome = Outcome::ok;
    bool retryable = false;
    std::string error;
};

struct Provider {
    virtual ~Provider() = default;
    // Configuration check run before any batch starts; throws ConfigError.
    virtual void preflight() {}
    virtual CompletionResult complete(const TrialPlan& plan, const std::vector<Message>& messages,
                                      std::uint64_t attempt_seed) = 0;
};

// --- trial execution ------------------------------------------------------------

// Executes one plan as a brand-new session: no conversation state is ever
// reused across trials, and terminal failures become non-ok records instead
// of escaping the batch.
inline TranscriptRecord run_trial(const TrialPlan& plan, const std::vector<Message>& messages,
                                  Provider& provider, const ProviderConfig& config, Clock& clock,
                                  RateLimiter* limiter, std::uint64_t batch_seed) {
    TranscriptRecord record;
    record.trial_id = plan.trial_id;
    record.provider_id = config.provider_id;
    {
        const std::uint64_t sid = rng::derive(plan.seed, "session");
        char buf[20];
        std::snprintf(buf, sizeof(buf), "s-%016llx", static_cast<unsigned long long>(sid));
        record.session_id = buf;
    }
    record.request = messages;

    CompletionResult result;
    for (int attempt = 1; attempt <= config.retry.max_attempts; ++attempt) {
        if (limiter) limiter->acquire();
        if (attempt == 1) record.requested_at_ms = clock.now_ms();
        result = provider.complete(plan, messages,
                                   rng::derive(batch_seed, "attempt/" + plan.trial_id,
                                               static_cast<std::uint64_t>(attempt)));
        record.responded_at_ms = clock.now_ms();
        record.attempts = attempt;
        if (result.outcome == Outcome::ok && result.text.empty()) {
            result.outcome = Outcome::transport_error;
            result.retryable = true;
            result.error = "empty completion";
        }
        if (result.outcome == Outcome::ok || !result.retryable) break;
        if (attempt < config.retry.max_attempts) {
            // Exponential backoff with seeded jitter in [0.5, 1.0) of the step.
            rng::Rng jitter(rng::derive(batch_seed, "jitter/" + plan.trial_id,
                                        static_cast<std::uint64_t>(attempt)));
            const double step =
                config.retry.backoff_base_seconds * static_cast<double>(1 << (attempt - 1));
            const double delay = step * (0.5 + 0.5 * jitter.uniform());
            clock.sleep_ms(static_cast<std::int64_t>(delay * 1000.0));
        }
    }
    record.completion = result.text;
    record.outcome = result.outcome;
    record.error = result.error;
    return record;
}

inline TranscriptRecord run_trial(const TrialPlan& plan, const std::vector<Message>& messages,
                                  Provider& provider, const ProviderConfig& config) {
    SystemClock clock;
    provider.preflight();
    return run_trial(plan, messages, provider, config, clock, nullptr, plan.seed);
}

// --- batch execution -------------------------------------------------------------

struct ProviderBinding {
    ProviderConfig config;
    std::shared_ptr<Provider> provider;
};

struct BatchOptions {
    // Virtual time gives zero-cost rate limiting and reproducible timestamps;
    // each provider lane gets its own virtual clock.
    bool virtual_time = false;
    Clock* clock = nullptr;  // shared clock override when not virtual
    std::function<void(std::size_t done, std::size_t total)> progress;
    int max_concurrent_override = 0;
    std::uint64_t seed = 0;
};

// Runs every plan against its model's provider with bounded per-provider
// concurrency and request pacing. Results are order-aligned with the plans
// regardless of completion order.
inline std::vector<TranscriptRecord> run_batch(
    const std::vector<TrialPlan>& plans,
    const std::function<std::vector<Message>(const TrialPlan&)>& renderer,
    const std::map<std::string, ProviderBinding>& providers, const BatchOptions& options = {}) {
    for (const auto& plan : plans) {
        if (!providers.count(plan.model_id))
            throw ConfigError("no provider configured for model \"" + plan.model_id + "\"");
    }
    for (const auto& [model, binding] : providers) {
        binding.config.validate();
        binding.provider->preflight();
    }

    // Lanes group plans by provider_id so concurrency and rate limits apply
    // per access point, not per model.
    struct Lane {
        const ProviderConfig* config = nullptr;
        Provider* provider = nullptr;
        std::vector<std::size_t> plan_indices;
        std::unique_ptr<Clock> owned_clock;
        Clock* clock = nullptr;
        std::unique_ptr<RateLimiter> limiter;
    };
    std::map<std::string, Lane> lanes;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const auto& binding = providers.at(plans[i].model_id);
        Lane& lane = lanes[binding.config.provider_id];
        lane.config = &binding.config;
        lane.provider = binding.provider.get();
        lane.plan_indices.push_back(i);
    }
    static SystemClock default_clock;
    for (auto& [id, lane] : lanes) {
        if (options.virtual_time) {
            lane.owned_clock = std::make_unique<VirtualClock>();
            lane.clock = lane.owned_clock.get();
        } else {
            lane.clock = options.clock ? options.clock : &default_clock;
        }
        lane.limiter = std::make_unique<RateLimiter>(lane.config->requests_per_minute, *lane.clock);
    }

    std::vector<TranscriptRecord> records(plans.size());
    std::atomic<std::size_t> done{0};
    std::mutex progress_mu;
    std::vector<std::thread> workers;
    std::exception_ptr first_error;
    std::mutex error_mu;

    for (auto& [id, lane_ref] : lanes) {
        Lane& lane = lane_ref;
        int n_workers = lane.config->max_concurrent;
        if (options.max_concurrent_override > 0) n_workers = options.max_concurrent_override;
        n_workers = static_cast<int>(
            std::min<std::size_t>(static_cast<std::size_t>(n_workers), lane.plan_indices.size()));
        auto cursor = std::make_shared<std::atomic<std::size_t>>(0);
        for (int w = 0; w < n_workers; ++w) {
            workers.emplace_back([&, cursor]() {
                for (;;) {
                    const std::size_t slot = cursor->fetch_add(1);
                    if (slot >= lane.plan_indices.size()) return;
                    const std::size_t idx = lane.plan_indices[slot];
                    const TrialPlan& plan = plans[idx];
                    try {
                        const auto messages = renderer(plan);
                        records[idx] = run_trial(plan, messages, *lane.provider, *lane.config,
                                                 *lane.clock, lane.limiter.get(), options.seed);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mu);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                    const std::size_t d = done.fetch_add(1) + 1;
                    if (options.progress) {
                        std::lock_guard<std::mutex> lock(progress_mu);
                        options.progress(d, plans.size());
                    }
                }
            });
        }
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return records;
}

// --- chat-completions wire format --------------------------------------------------
// The transport itself lives in http_provider.hpp; the request/response shape
// is kept here so it can be tested without a socket.

inline json chat_request_body(const ProviderConfig& config,
                              const std::vector<Message>& messages) {
    json body;
    body["model"] = config.model;
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = msgs;
    body["temperature"] = config.temperature;
    body["max_tokens"] = config.max_output_tokens;
    return body;
}

inline CompletionResult parse_chat_response(int status, const std::string& body) {
    CompletionResult result;
    if (status == 429 || status >= 500) {
        result.outcome = Outcome::transport_error;
        result.retryable = true;
        result.error = "HTTP " + std::to_string(status);
        return result;
    }
    if (status != 200) {
        result.outcome = Outcome::transport_error;
        result.retryable = false;
        result.error = "HTTP " + std::to_string(status);
        return result;
    }
    json j;
    try {
        j = json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        result.outcome = Outcome::transport_error;
        result.retryable = true;
        result.error = std::string("unparseable response body: ") + e.what();
        return result;
    }
    if (!j.contains("choices") || !j.at("choices").is_array() || j.at("choices").empty()) {
        result.outcome = Outcome::transport_error;
        result.retryable = true;
        result.error = "response carries no choices";
        return result;
    }
    const auto& choice = j.at("choices").at(0);
    if (choice.contains("message") && choice.at("message").contains("content") &&
        choice.at("message").at("content").is_string())
        result.text = choice.at("message").at("content").get<std::string>();
    std::string finish;
    if (choice.contains("finish_reason") && choice.at("finish_reason").is_string())
        finish = choice.at("finish_reason").get<std::string>();
    if (finish == "length") {
        result.outcome = Outcome::truncated;
        result.retryable = false;
    } else if (finish == "content_filter") {
        result.outcome = Outcome::refused;
        result.retryable = false;
    } else {
        result.outcome = Outcome::ok;
    }
    return result;
}

// --- mock provider -----------------------------------------------------------------

struct MockContext {
    const TrialPlan& plan;
    const population::Persona* persona = nullptr;  // null in the no-persona arm
    const design::ExperimentSpec* spec = nullptr;
    std::uint64_t seed = 0;  // deterministic per (policy seed, trial)
};

using MockPolicy = std::function<CompletionResult(const MockContext&)>;

// In-process deterministic provider. Responses are a pure function of
// (plan, persona, question set, seed); no network is ever touched.
class MockProvider : public Provider {
  public:
    MockProvider(MockPolicy policy, const design::ExperimentSpec* spec,
                 const std::vector<population::Persona>& personas, std::uint64_t policy_seed)
        : policy_(std::move(policy)), spec_(spec), policy_seed_(policy_seed) {
        for (const auto& p : personas) personas_[p.id] = p;
    }

    CompletionResult complete(const TrialPlan& plan, const std::vector<Message>&,
                              std::uint64_t) override {
        MockContext ctx{plan, nullptr, spec_, rng::derive(policy_seed_, plan.trial_id)};
        if (plan.persona_id) {
            const auto it = personas_.find(*plan.persona_id);
            if (it != personas_.end()) ctx.persona = &it->second;
        }
        return policy_(ctx);
    }

  private:
    MockPolicy policy_;
    const design::ExperimentSpec* spec_;
    std::map<std::string, population::Persona> personas_;
    std::uint64_t policy_seed_;
};

}  // namespace srct::dispatch
