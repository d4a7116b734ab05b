#include "http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace optiseq {

using nlohmann::json;

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)), gate_(config_.max_parallel) {
    if (config_.base_url.empty())
        fail(Errc::invalid_argument, "http backend: base_url is empty");
    if (config_.model.empty())
        fail(Errc::invalid_argument, "http backend: model is empty");
    if (config_.api_key.empty()) {
        if (const char* env = std::getenv("OPTISEQ_API_KEY")) config_.api_key = env;
    }

    std::string url = config_.base_url;
    std::size_t scheme_end = url.find("://");
    std::size_t path_start =
        url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) {
        host_ = url;
    } else {
        host_ = url.substr(0, path_start);
        path_prefix_ = url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

namespace {

struct GateGuard {
    RequestGate& gate;
    explicit GateGuard(RequestGate& g) : gate(g) { gate.acquire(); }
    ~GateGuard() { gate.release(); }
};

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

json parse_body(const std::string& body) {
    try {
        return json::parse(body);
    } catch (const json::exception& e) {
        fail(Errc::backend_unavailable,
             std::string("malformed response from backend: ") + e.what());
    }
}

const json& first_choice(const json& response) {
    if (!response.contains("choices") || !response["choices"].is_array() ||
        response["choices"].empty())
        fail(Errc::backend_unavailable, "backend response has no choices");
    return response["choices"][0];
}

// Null logprob entries (or a missing block) mean the endpoint cannot give
// us token-level scores; that is fatal for this pipeline, not retryable.
const json& logprob_block(const json& choice) {
    if (!choice.contains("logprobs") || choice["logprobs"].is_null())
        fail(Errc::logprobs_unsupported,
             "backend did not return token log-probabilities; a completions "
             "endpoint with logprob support is required");
    return choice["logprobs"];
}

} // namespace

std::string HttpBackend::post_completions(const std::string& body) {
    GateGuard guard(gate_);
    std::string last_error;
    int backoff_ms = config_.retry_backoff_ms;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        httplib::Client client(host_);
        client.set_connection_timeout(0, config_.timeout_ms * 1000LL);
        client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
        client.set_write_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
        httplib::Headers headers;
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);

        auto res = client.Post(path_prefix_ + "/completions", headers, body,
                               "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) return res->body;
        last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
        if (!retryable_status(res->status)) break;
    }
    fail(Errc::backend_unavailable, "completions request failed (" + host_ +
                                        "): " + last_error);
}

LmResponse HttpBackend::generate(const std::string& prompt, const GenParams& params) {
    check_generate_args(prompt, params);
    json req = {
        {"model", config_.model},
        {"prompt", prompt},
        {"max_tokens", params.max_tokens},
        {"temperature", 0.0},
        {"logprobs", 1},
        {"echo", false},
    };
    if (!params.stop_sequences.empty()) req["stop"] = params.stop_sequences;

    json resp = parse_body(post_completions(req.dump()));
    const json& choice = first_choice(resp);
    const json& lp = logprob_block(choice);
    if (!lp.contains("tokens") || !lp.contains("token_logprobs"))
        fail(Errc::logprobs_unsupported, "backend logprobs block lacks token arrays");

    LmResponse out;
    out.text = choice.value("text", std::string());
    for (const auto& t : lp["tokens"]) out.tokens.push_back(t.get<std::string>());
    for (const auto& v : lp["token_logprobs"]) {
        if (v.is_null())
            fail(Errc::logprobs_unsupported, "backend returned a null token logprob");
        out.logprobs.push_back(v.get<double>());
    }
    if (out.tokens.size() != out.logprobs.size())
        fail(Errc::backend_unavailable, "backend token/logprob arrays disagree in length");

    // Some servers keep emitting past a stop string; cut at token
    // granularity so tokens and text stay aligned (the text may then end
    // slightly before the stop).
    std::size_t cut = std::string::npos;
    for (const auto& stop : params.stop_sequences) {
        if (stop.empty()) continue;
        std::size_t pos = out.text.find(stop);
        if (pos != std::string::npos && pos < cut) cut = pos;
    }
    if (cut != std::string::npos) {
        std::size_t covered = 0;
        std::size_t n_keep = 0;
        while (n_keep < out.tokens.size() && covered + out.tokens[n_keep].size() <= cut) {
            covered += out.tokens[n_keep].size();
            ++n_keep;
        }
        out.text.resize(covered);
        out.tokens.resize(n_keep);
        out.logprobs.resize(n_keep);
    }

    std::string joined;
    for (const auto& t : out.tokens) joined += t;
    if (joined != out.text)
        fail(Errc::backend_unavailable,
             "backend response tokens do not concatenate to the returned text");
    return out;
}

ScoreResponse HttpBackend::score_continuation(const std::string& prefix,
                                              const std::string& continuation) {
    check_score_args(continuation);
    json req = {
        {"model", config_.model},
        {"prompt", prefix + continuation},
        {"max_tokens", 0},
        {"temperature", 0.0},
        {"logprobs", 1},
        {"echo", true},
    };

    json resp = parse_body(post_completions(req.dump()));
    const json& choice = first_choice(resp);
    const json& lp = logprob_block(choice);
    if (!lp.contains("tokens") || !lp.contains("token_logprobs") || !lp.contains("text_offset"))
        fail(Errc::logprobs_unsupported,
             "echo scoring needs tokens, token_logprobs and text_offset");

    const auto& tokens = lp["tokens"];
    const auto& lps = lp["token_logprobs"];
    const auto& offsets = lp["text_offset"];
    if (tokens.size() != lps.size() || tokens.size() != offsets.size())
        fail(Errc::backend_unavailable, "backend logprob arrays disagree in length");

    const std::size_t boundary = prefix.size();
    std::size_t start = tokens.size();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto off = offsets[i].get<std::uint64_t>();
        if (off >= boundary) {
            if (off != boundary)
                fail(Errc::token_boundary_mismatch,
                     "tokenizer merged the prefix/continuation boundary (next token "
                     "starts at byte " + std::to_string(off) + ", boundary is " +
                     std::to_string(boundary) + "); prepend a newline to the "
                     "continuation to force a clean split");
            start = i;
            break;
        }
    }
    if (start == tokens.size())
        fail(Errc::token_boundary_mismatch,
             "no returned token starts at or after the continuation boundary");

    ScoreResponse out;
    for (std::size_t i = start; i < tokens.size(); ++i) {
        if (lps[i].is_null())
            fail(Errc::logprobs_unsupported,
                 "backend returned a null logprob inside the continuation span");
        out.tokens.push_back(tokens[i].get<std::string>());
        out.logprobs.push_back(lps[i].get<double>());
        out.total_logprob += lps[i].get<double>();
    }
    return out;
}

} // namespace optiseq
