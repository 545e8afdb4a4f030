#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "regimeval/causal.hpp"

namespace regimeval {

inline constexpr const char* kHypothesisIncrease = "Stock price will increase";
inline constexpr const char* kHypothesisDecrease = "Stock price will decrease";

// Increase iff prediction > 0; zero takes the decrease branch.
// Throws ValidationError on a non-finite prediction.
std::string build_hypothesis(double prediction);

enum class EntailLabel { Yes, No, Uncertain };

std::string to_string(EntailLabel label);
std::optional<EntailLabel> parse_entail_label(const std::string& s);

struct EntailmentVerdict {
    EntailLabel label = EntailLabel::Uncertain;
    double confidence = 0.0;
    bool parse_warning = false;
};

// Yes above 0.8 confidence scores 1.0; Yes at or below 0.8 falls back to
// the Uncertain score. No always scores 0.
double verdict_to_score(const EntailmentVerdict& v);

// Providers return nullopt for samples they could not evaluate (network
// failure after retries); those are excluded from the NLICS mean and
// counted by the caller.
class EntailmentProvider {
  public:
    virtual ~EntailmentProvider() = default;
    virtual std::optional<EntailmentVerdict> entail(const std::string& premise,
                                                    const std::string& hypothesis) = 0;
    virtual std::string id() const = 0;
};

// Offline deterministic provider: scores the premise direction with the
// causal lexicon and agrees/disagrees with the hypothesis accordingly.
class StubEntailmentProvider final : public EntailmentProvider {
  public:
    StubEntailmentProvider();
    explicit StubEntailmentProvider(CausalLexicon lexicon);
    std::optional<EntailmentVerdict> entail(const std::string& premise,
                                            const std::string& hypothesis) override;
    std::string id() const override { return "stub"; }

  private:
    CausalLexicon lexicon_;
};

// Default prompt template; {news} and {prediction} are substituted.
extern const char* kDefaultPromptTemplate;

std::string render_prompt(const std::string& prompt_template, const std::string& news,
                          const std::string& prediction);

// First whole-word yes|no|uncertain (case-insensitive) wins; an optional
// "confidence: X%" figure is picked up when present. Yes/No without a
// stated confidence default to 1.0. No keyword at all yields Uncertain
// with a parse warning.
EntailmentVerdict parse_verdict(const std::string& response);

struct RemoteEntailmentConfig {
    std::string endpoint;  // e.g. http://host:port/v1/chat/completions
    std::string model;
    std::string auth_token;  // empty = no Authorization header
    std::map<std::string, std::string> extra_headers;
    std::string prompt_template = kDefaultPromptTemplate;
    std::string replay_log_path;  // mandatory
    int timeout_seconds = 30;
    int max_retries = 3;
    int backoff_initial_ms = 200;
    std::size_t request_budget = 1000;
    std::size_t workers = 4;
};

inline constexpr int kReplayLogVersion = 1;

// Chat-completion-style HTTP client. Every request/response pair is
// appended to the replay log so runs can be re-scored offline.
class RemoteEntailmentProvider final : public EntailmentProvider {
  public:
    explicit RemoteEntailmentProvider(RemoteEntailmentConfig config);
    ~RemoteEntailmentProvider() override;
    std::optional<EntailmentVerdict> entail(const std::string& premise,
                                            const std::string& hypothesis) override;
    std::string id() const override { return "remote:" + config_.model; }

    std::size_t requests_made() const;
    const RemoteEntailmentConfig& config() const { return config_; }

  private:
    struct Impl;
    RemoteEntailmentConfig config_;
    std::unique_ptr<Impl> impl_;
};

// Replays a recorded log without touching the network. Verdicts are keyed
// by the rendered prompt; a prompt absent from the log is a hard error.
class ReplayEntailmentProvider final : public EntailmentProvider {
  public:
    explicit ReplayEntailmentProvider(const std::string& log_path);
    std::optional<EntailmentVerdict> entail(const std::string& premise,
                                            const std::string& hypothesis) override;
    std::string id() const override;

  private:
    std::string log_path_;
    std::string provider_id_;
    std::string prompt_template_;
    std::map<std::string, EntailmentVerdict> by_prompt_hash_;
};

}  // namespace regimeval
