#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "lm.hpp"

namespace testing {

inline std::string fixture_path(const std::string& name) {
    return std::string(OPTISEQ_FIXTURES_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

// Unique scratch directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        std::mt19937_64 rng(static_cast<std::uint64_t>(stamp));
        path = std::filesystem::temp_directory_path() /
               ("optiseq_test_" + std::to_string(rng()));
        std::filesystem::create_directories(path);
    }

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }

    std::string file(const std::string& name) const { return (path / name).string(); }
};

/// Backend driven by lambdas; generation latency is injectable so the
/// batched-dispatch wall-time contracts can be exercised.
class ScriptedBackend final : public optiseq::LmBackend {
  public:
    std::function<optiseq::LmResponse(const std::string&, const optiseq::GenParams&)>
        on_generate;
    std::function<double(const std::string&, const std::string&)> on_score;
    int parallel = 8;
    int gen_delay_ms = 0;
    int score_delay_ms = 0;

    std::atomic<int> gen_calls{0};
    std::atomic<int> score_calls{0};

    optiseq::LmResponse generate(const std::string& prompt,
                                 const optiseq::GenParams& params) override {
        check_generate_args(prompt, params);
        ++gen_calls;
        if (gen_delay_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(gen_delay_ms));
        return on_generate(prompt, params);
    }

    optiseq::ScoreResponse score_continuation(const std::string& prefix,
                                              const std::string& continuation) override {
        check_score_args(continuation);
        ++score_calls;
        if (score_delay_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(score_delay_ms));
        double total = on_score(prefix, continuation);
        return {total, {continuation}, {total}};
    }

    int max_parallel() const override { return parallel; }
    std::string identity() const override { return "scripted"; }
};

// Splits a text into single-token LmResponse pieces (token per byte) so
// scripted generations satisfy the tokens/text invariants.
inline optiseq::LmResponse byte_response(const std::string& text, double per_token_lp) {
    optiseq::LmResponse r;
    r.text = text;
    for (char c : text) {
        r.tokens.emplace_back(1, c);
        r.logprobs.push_back(per_token_lp);
    }
    return r;
}

/// Pass-through wrapper that counts backend invocations.
class CountingBackend final : public optiseq::LmBackend {
  public:
    explicit CountingBackend(optiseq::LmBackend& inner) : inner_(inner) {}

    optiseq::LmResponse generate(const std::string& prompt,
                                 const optiseq::GenParams& params) override {
        ++gen_calls;
        return inner_.generate(prompt, params);
    }

    optiseq::ScoreResponse score_continuation(const std::string& prefix,
                                              const std::string& continuation) override {
        ++score_calls;
        return inner_.score_continuation(prefix, continuation);
    }

    int max_parallel() const override { return inner_.max_parallel(); }
    std::string identity() const override { return inner_.identity(); }

    std::atomic<int> gen_calls{0};
    std::atomic<int> score_calls{0};

  private:
    optiseq::LmBackend& inner_;
};

} // namespace testing
