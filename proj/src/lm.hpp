#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "error.hpp"

namespace optiseq {

/// Greedy decoding only: temperature is pinned to 0.
struct GenParams {
    int max_tokens = 64;
    double temperature = 0.0;
    std::vector<std::string> stop_sequences;
};

struct LmResponse {
    std::string text;
    std::vector<std::string> tokens;
    std::vector<double> logprobs; // nats, one per emitted token
};

struct ScoreResponse {
    double total_logprob = 0.0; // nats
    std::vector<std::string> tokens; // continuation span only
    std::vector<double> logprobs;
};

inline double sum_logprobs(const std::vector<double>& lps) {
    double s = 0.0;
    for (double lp : lps) s += lp;
    return s;
}

/// Generation plus continuation scoring with per-token log-probabilities.
/// Implementations must be safely shareable across concurrent callers.
class LmBackend {
  public:
    virtual ~LmBackend() = default;

    /// Greedy continuation of `prompt`, cut at the first stop sequence or
    /// at max_tokens. Tokens and logprobs cover emitted tokens only.
    virtual LmResponse generate(const std::string& prompt, const GenParams& params) = 0;

    /// Log-probability of exactly `continuation`'s tokens conditioned on
    /// `prefix` plus the preceding continuation tokens.
    virtual ScoreResponse score_continuation(const std::string& prefix,
                                             const std::string& continuation) = 0;

    /// How many calls are worth dispatching concurrently against this
    /// backend. In-process backends gain nothing from threads and return 1.
    virtual int max_parallel() const { return 1; }

    /// Identity echoed into reports (kind plus its defining config).
    virtual std::string identity() const = 0;

  protected:
    static void check_generate_args(const std::string& prompt, const GenParams& params) {
        if (prompt.empty()) fail(Errc::invalid_argument, "generate: prompt is empty");
        if (params.max_tokens < 1) fail(Errc::invalid_argument, "generate: max_tokens must be >= 1");
        if (params.temperature != 0.0)
            fail(Errc::invalid_argument, "generate: only greedy decoding (temperature 0) is supported");
    }

    static void check_score_args(const std::string& continuation) {
        if (continuation.empty())
            fail(Errc::invalid_argument, "score_continuation: continuation is empty");
    }
};

} // namespace optiseq
