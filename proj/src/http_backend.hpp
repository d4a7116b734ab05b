#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>

#include "lm.hpp"

namespace optiseq {

struct HttpBackendConfig {
    std::string base_url;          // e.g. "http://localhost:8080" or ".../v1"
    std::string model;
    std::string api_key;           // empty -> read OPTISEQ_API_KEY from the environment
    int timeout_ms = 30000;
    int max_parallel = 4;          // in-flight request limit
    int max_retries = 3;           // transient transport errors only
    int retry_backoff_ms = 250;    // doubled per retry
};

// Bounds in-flight requests; plain mutex/condvar so the limit can be set
// at runtime.
class RequestGate {
  public:
    explicit RequestGate(int limit) : limit_(limit < 1 ? 1 : limit) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return in_flight_ < limit_; });
        ++in_flight_;
    }

    void release() {
        {
            std::lock_guard lock(mu_);
            --in_flight_;
        }
        cv_.notify_one();
    }

  private:
    std::mutex mu_;
    std::condition_variable cv_;
    int limit_;
    int in_flight_ = 0;
};

/// Client for OpenAI-style completions endpoints.
///
/// Generation is a plain completions request with token logprobs.
/// Scoring sends prefix+continuation with echo enabled and zero new
/// tokens, then sums logprobs from the first token whose text offset
/// lands on the prefix/continuation boundary. A tokenizer that merges
/// that boundary into one token raises token_boundary_mismatch; callers
/// can prepend a newline to the continuation to force a clean split.
class HttpBackend final : public LmBackend {
  public:
    explicit HttpBackend(HttpBackendConfig config);

    LmResponse generate(const std::string& prompt, const GenParams& params) override;
    ScoreResponse score_continuation(const std::string& prefix,
                                     const std::string& continuation) override;
    int max_parallel() const override { return config_.max_parallel; }
    std::string identity() const override {
        return "http:" + config_.base_url + "#" + config_.model;
    }

  private:
    // POSTs the JSON body to /completions with retries; returns the parsed
    // response body.
    std::string post_completions(const std::string& body);

    HttpBackendConfig config_;
    std::string host_;        // scheme://host[:port]
    std::string path_prefix_; // path part of base_url, without trailing "/"
    RequestGate gate_;
};

} // namespace optiseq
