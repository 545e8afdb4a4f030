#include "regimeval/entail.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "regimeval/common.hpp"

namespace regimeval {

using nlohmann::json;

std::string build_hypothesis(double prediction) {
    if (!std::isfinite(prediction))
        throw ValidationError("build_hypothesis: prediction is not finite");
    return prediction > 0.0 ? kHypothesisIncrease : kHypothesisDecrease;
}

std::string to_string(EntailLabel label) {
    switch (label) {
        case EntailLabel::Yes: return "Yes";
        case EntailLabel::No: return "No";
        case EntailLabel::Uncertain: return "Uncertain";
    }
    return "Uncertain";
}

std::optional<EntailLabel> parse_entail_label(const std::string& s) {
    const std::string lower = to_lower(s);
    if (lower == "yes") return EntailLabel::Yes;
    if (lower == "no") return EntailLabel::No;
    if (lower == "uncertain") return EntailLabel::Uncertain;
    return std::nullopt;
}

double verdict_to_score(const EntailmentVerdict& v) {
    switch (v.label) {
        case EntailLabel::Yes: return v.confidence > 0.8 ? 1.0 : 0.5;
        case EntailLabel::No: return 0.0;
        case EntailLabel::Uncertain: return 0.5;
    }
    return 0.5;
}

StubEntailmentProvider::StubEntailmentProvider() : lexicon_(default_causal_lexicon()) {}

StubEntailmentProvider::StubEntailmentProvider(CausalLexicon lexicon)
    : lexicon_(std::move(lexicon)) {}

std::optional<EntailmentVerdict> StubEntailmentProvider::entail(const std::string& premise,
                                                                const std::string& hypothesis) {
    const CausalPolarity polarity = extract_polarity(premise, lexicon_);
    const int hypothesis_direction = hypothesis == kHypothesisIncrease ? 1 : -1;
    if (polarity.value == 0) return EntailmentVerdict{EntailLabel::Uncertain, 0.0};
    if (polarity.value == hypothesis_direction)
        return EntailmentVerdict{EntailLabel::Yes, 0.9};
    return EntailmentVerdict{EntailLabel::No, 0.9};
}

const char* kDefaultPromptTemplate =
    "News: \"{news}\"\n"
    "Prediction: \"{prediction}\"\n"
    "Question: Is the prediction logically supported by the news?\n"
    "Answer: [Yes/No/Uncertain]";

std::string render_prompt(const std::string& prompt_template, const std::string& news,
                          const std::string& prediction) {
    std::string out = prompt_template;
    auto replace_all = [&out](std::string_view placeholder, const std::string& value) {
        std::size_t pos = 0;
        while ((pos = out.find(placeholder, pos)) != std::string::npos) {
            out.replace(pos, placeholder.size(), value);
            pos += value.size();
        }
    };
    replace_all("{news}", news);
    replace_all("{prediction}", prediction);
    return out;
}

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

// Scans lowercase word tokens; returns the byte offset just past the first
// yes/no/uncertain hit, or npos.
std::size_t find_keyword(const std::string& lower, EntailLabel* label) {
    std::size_t i = 0;
    while (i < lower.size()) {
        if (!is_word_char(static_cast<unsigned char>(lower[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < lower.size() && is_word_char(static_cast<unsigned char>(lower[j]))) ++j;
        const std::string_view word(lower.data() + i, j - i);
        if (word == "yes") {
            *label = EntailLabel::Yes;
            return j;
        }
        if (word == "no") {
            *label = EntailLabel::No;
            return j;
        }
        if (word == "uncertain") {
            *label = EntailLabel::Uncertain;
            return j;
        }
        i = j;
    }
    return std::string::npos;
}

// Looks for "confidence" followed by a number, e.g. "confidence: 92%",
// "confidence 0.92", "(confidence 92%)".
std::optional<double> find_confidence(const std::string& lower) {
    std::size_t pos = lower.find("confidence");
    while (pos != std::string::npos) {
        std::size_t i = pos + std::string("confidence").size();
        while (i < lower.size() &&
               (lower[i] == ':' || lower[i] == '=' || lower[i] == ' ' || lower[i] == '(' ||
                lower[i] == ')'))
            ++i;
        std::size_t j = i;
        while (j < lower.size() &&
               (std::isdigit(static_cast<unsigned char>(lower[j])) || lower[j] == '.'))
            ++j;
        if (j > i) {
            auto value = parse_double(lower.substr(i, j - i));
            if (value) {
                const bool percent = j < lower.size() && lower[j] == '%';
                if (percent || *value > 1.0) return *value / 100.0;
                return *value;
            }
        }
        pos = lower.find("confidence", pos + 1);
    }
    return std::nullopt;
}

}  // namespace

EntailmentVerdict parse_verdict(const std::string& response) {
    const std::string lower = to_lower(response);
    EntailmentVerdict verdict;
    EntailLabel label = EntailLabel::Uncertain;
    if (find_keyword(lower, &label) == std::string::npos) {
        verdict.label = EntailLabel::Uncertain;
        verdict.confidence = 0.0;
        verdict.parse_warning = true;
        return verdict;
    }
    verdict.label = label;
    const auto confidence = find_confidence(lower);
    if (label == EntailLabel::Uncertain) {
        verdict.confidence = confidence.value_or(0.0);
    } else {
        verdict.confidence = confidence.value_or(1.0);
    }
    if (verdict.confidence < 0.0) verdict.confidence = 0.0;
    if (verdict.confidence > 1.0) verdict.confidence = 1.0;
    return verdict;
}

// ---------------------------------------------------------------- remote

struct RemoteEntailmentProvider::Impl {
    std::string host;  // scheme://host[:port]
    std::string path;
    std::mutex log_mutex;
    std::ofstream log;
    std::size_t requests = 0;
};

namespace {

// Splits "http://host:port/some/path" into client base and request path.
void split_endpoint(const std::string& endpoint, std::string* host, std::string* path) {
    const std::size_t scheme = endpoint.find("://");
    if (scheme == std::string::npos)
        throw ValidationError("endpoint must start with http:// or https://: " + endpoint);
    const std::size_t slash = endpoint.find('/', scheme + 3);
    if (slash == std::string::npos) {
        *host = endpoint;
        *path = "/";
    } else {
        *host = endpoint.substr(0, slash);
        *path = endpoint.substr(slash);
    }
}

std::string extract_content(const std::string& body) {
    json doc = json::parse(body, nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) {
        auto choices = doc.find("choices");
        if (choices != doc.end() && choices->is_array() && !choices->empty()) {
            const json& first = (*choices)[0];
            if (first.contains("message") && first["message"].contains("content"))
                return first["message"]["content"].get<std::string>();
            if (first.contains("text")) return first["text"].get<std::string>();
        }
        if (doc.contains("content") && doc["content"].is_string())
            return doc["content"].get<std::string>();
    }
    return body;  // plain-text endpoints
}

}  // namespace

RemoteEntailmentProvider::RemoteEntailmentProvider(RemoteEntailmentConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
    if (config_.replay_log_path.empty())
        throw ValidationError("remote entailment requires a replay log path");
    split_endpoint(config_.endpoint, &impl_->host, &impl_->path);
    impl_->log.open(config_.replay_log_path, std::ios::binary | std::ios::app);
    if (!impl_->log)
        throw ValidationError("cannot open replay log for writing: " +
                              config_.replay_log_path);
    // Header record carries the template so replay can re-render prompts.
    json header;
    header["v"] = kReplayLogVersion;
    header["type"] = "header";
    header["provider"] = id();
    header["template"] = config_.prompt_template;
    {
        std::lock_guard<std::mutex> lock(impl_->log_mutex);
        impl_->log << header.dump() << '\n';
        impl_->log.flush();
    }
}

RemoteEntailmentProvider::~RemoteEntailmentProvider() = default;

std::size_t RemoteEntailmentProvider::requests_made() const { return impl_->requests; }

std::optional<EntailmentVerdict> RemoteEntailmentProvider::entail(
    const std::string& premise, const std::string& hypothesis) {
    const std::string prompt = render_prompt(config_.prompt_template, premise, hypothesis);

    {
        std::lock_guard<std::mutex> lock(impl_->log_mutex);
        if (impl_->requests >= config_.request_budget)
            throw RuntimeFailure("entailment request budget of " +
                                 std::to_string(config_.request_budget) + " exhausted");
        ++impl_->requests;
    }

    json body;
    body["model"] = config_.model;
    body["temperature"] = 0;
    body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});

    httplib::Headers headers;
    if (!config_.auth_token.empty())
        headers.emplace("Authorization", "Bearer " + config_.auth_token);
    for (const auto& [k, v] : config_.extra_headers) headers.emplace(k, v);

    std::string response_body;
    bool got_response = false;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            const auto delay = std::chrono::milliseconds(
                static_cast<long>(config_.backoff_initial_ms) * (1L << (attempt - 1)));
            std::this_thread::sleep_for(delay);
        }
        httplib::Client client(impl_->host);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        auto res = client.Post(impl_->path, headers, body.dump(), "application/json");
        if (res && res->status == 200) {
            response_body = res->body;
            got_response = true;
            break;
        }
    }
    if (!got_response) return std::nullopt;

    const std::string content = extract_content(response_body);
    const EntailmentVerdict verdict = parse_verdict(content);

    json record;
    record["v"] = kReplayLogVersion;
    record["type"] = "request";
    record["prompt_hash"] = content_hash(prompt);
    record["prompt"] = prompt;
    record["response"] = content;
    record["label"] = to_string(verdict.label);
    record["confidence"] = verdict.confidence;
    record["parse_warning"] = verdict.parse_warning;
    {
        std::lock_guard<std::mutex> lock(impl_->log_mutex);
        impl_->log << record.dump() << '\n';
        impl_->log.flush();
    }
    return verdict;
}

// ---------------------------------------------------------------- replay

ReplayEntailmentProvider::ReplayEntailmentProvider(const std::string& log_path)
    : log_path_(log_path), provider_id_("replay"), prompt_template_(kDefaultPromptTemplate) {
    std::ifstream in(log_path);
    if (!in) throw ValidationError("cannot open replay log: " + log_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object())
            throw ValidationError(log_path + ":" + std::to_string(line_no) +
                                  ": invalid replay record");
        if (obj.value("v", 0) != kReplayLogVersion)
            throw ValidationError(log_path + ":" + std::to_string(line_no) +
                                  ": unsupported replay log version");
        const std::string type = obj.value("type", "request");
        if (type == "header") {
            provider_id_ = "replay(" + obj.value("provider", std::string("unknown")) + ")";
            if (obj.contains("template"))
                prompt_template_ = obj["template"].get<std::string>();
            continue;
        }
        EntailmentVerdict verdict;
        auto label = parse_entail_label(obj.value("label", ""));
        if (!label)
            throw ValidationError(log_path + ":" + std::to_string(line_no) +
                                  ": bad label '" + obj.value("label", "") + "'");
        verdict.label = *label;
        verdict.confidence = obj.value("confidence", 0.0);
        verdict.parse_warning = obj.value("parse_warning", false);
        std::string hash = obj.value("prompt_hash", "");
        if (hash.empty() && obj.contains("prompt"))
            hash = content_hash(obj["prompt"].get<std::string>());
        if (hash.empty())
            throw ValidationError(log_path + ":" + std::to_string(line_no) +
                                  ": record has no prompt or prompt_hash");
        by_prompt_hash_[hash] = verdict;
    }
    if (by_prompt_hash_.empty())
        throw ValidationError("replay log " + log_path + " has no request records");
}

std::optional<EntailmentVerdict> ReplayEntailmentProvider::entail(
    const std::string& premise, const std::string& hypothesis) {
    const std::string prompt = render_prompt(prompt_template_, premise, hypothesis);
    auto it = by_prompt_hash_.find(content_hash(prompt));
    if (it == by_prompt_hash_.end())
        throw RuntimeFailure("replay log " + log_path_ +
                             ": no recorded verdict for prompt hash " + content_hash(prompt));
    return it->second;
}

std::string ReplayEntailmentProvider::id() const { return provider_id_; }

}  // namespace regimeval
