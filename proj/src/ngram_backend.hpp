#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "lm.hpp"

namespace optiseq {

/// Byte-level bigram model with Laplace smoothing, alpha = 1:
///
///   P(b | a) = (count(a,b) + 1) / (count(a,.) + 256)
///
/// Generation is greedy argmax with lowest-byte tie-breaking; tokens are
/// single bytes. Deterministic and cheap enough to recompute by hand,
/// which is what makes it usable as a test oracle.
class NgramBackend final : public LmBackend {
  public:
    /// Trains on the raw bytes of `corpus`. An empty corpus yields the
    /// uniform model (every transition scores log(1/256)).
    explicit NgramBackend(const std::string& corpus, std::string source_label = "<inline>");

    static std::unique_ptr<NgramBackend> from_file(const std::string& corpus_path);

    LmResponse generate(const std::string& prompt, const GenParams& params) override;
    ScoreResponse score_continuation(const std::string& prefix,
                                     const std::string& continuation) override;
    std::string identity() const override { return "ngram:" + source_label_; }

    double logprob(unsigned char prev, unsigned char next) const;
    unsigned char argmax_next(unsigned char prev) const;

  private:
    std::array<std::array<std::uint32_t, 256>, 256> counts_{};
    std::array<std::uint64_t, 256> row_totals_{};
    std::string source_label_;
};

} // namespace optiseq
