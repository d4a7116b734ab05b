#include "ngram_backend.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace optiseq {

NgramBackend::NgramBackend(const std::string& corpus, std::string source_label)
    : source_label_(std::move(source_label)) {
    for (std::size_t i = 1; i < corpus.size(); ++i) {
        auto a = static_cast<unsigned char>(corpus[i - 1]);
        auto b = static_cast<unsigned char>(corpus[i]);
        ++counts_[a][b];
        ++row_totals_[a];
    }
}

std::unique_ptr<NgramBackend> NgramBackend::from_file(const std::string& corpus_path) {
    std::ifstream in(corpus_path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open corpus file '" + corpus_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::make_unique<NgramBackend>(buf.str(), corpus_path);
}

double NgramBackend::logprob(unsigned char prev, unsigned char next) const {
    return std::log(static_cast<double>(counts_[prev][next]) + 1.0) -
           std::log(static_cast<double>(row_totals_[prev]) + 256.0);
}

unsigned char NgramBackend::argmax_next(unsigned char prev) const {
    // Smoothing is monotone in the raw count, so argmax over counts is
    // argmax over probabilities. Lowest byte wins ties.
    unsigned best_byte = 0;
    std::uint32_t best_count = counts_[prev][0];
    for (unsigned b = 1; b < 256; ++b) {
        if (counts_[prev][b] > best_count) {
            best_count = counts_[prev][b];
            best_byte = b;
        }
    }
    return static_cast<unsigned char>(best_byte);
}

LmResponse NgramBackend::generate(const std::string& prompt, const GenParams& params) {
    check_generate_args(prompt, params);
    LmResponse out;
    auto prev = static_cast<unsigned char>(prompt.back());
    for (int t = 0; t < params.max_tokens; ++t) {
        unsigned char b = argmax_next(prev);
        out.text.push_back(static_cast<char>(b));
        out.tokens.emplace_back(1, static_cast<char>(b));
        out.logprobs.push_back(logprob(prev, b));
        prev = b;

        bool stopped = false;
        for (const auto& stop : params.stop_sequences) {
            if (stop.empty() || out.text.size() < stop.size()) continue;
            if (out.text.compare(out.text.size() - stop.size(), stop.size(), stop) == 0) {
                std::size_t keep = out.text.size() - stop.size();
                out.text.resize(keep);
                out.tokens.resize(keep);
                out.logprobs.resize(keep);
                stopped = true;
                break;
            }
        }
        if (stopped) break;
    }
    return out;
}

ScoreResponse NgramBackend::score_continuation(const std::string& prefix,
                                               const std::string& continuation) {
    check_score_args(continuation);
    ScoreResponse out;
    bool have_prev = !prefix.empty();
    auto prev = have_prev ? static_cast<unsigned char>(prefix.back())
                          : static_cast<unsigned char>(0);
    for (char c : continuation) {
        auto b = static_cast<unsigned char>(c);
        // With no preceding byte at all, fall back to the uniform prior.
        double lp = have_prev ? logprob(prev, b) : -std::log(256.0);
        out.tokens.emplace_back(1, c);
        out.logprobs.push_back(lp);
        out.total_logprob += lp;
        prev = b;
        have_prev = true;
    }
    return out;
}

} // namespace optiseq
