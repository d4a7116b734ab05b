#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "prompt.hpp"

namespace optiseq {

using EmbeddingVector = std::vector<double>;

/// Text embeddings of a fixed dimension. Providers must return finite,
/// never all-zero vectors, deterministically per input.
class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual EmbeddingVector embed(const std::string& text) = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::string identity() const = 0;
};

double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Example indices sorted by descending cosine similarity between each
/// example's input and the task query; ties broken by ascending pool
/// index. Similarity looks at inputs only so labels cannot leak in.
std::vector<std::size_t> rank_examples(const IclTask& task, EmbeddingProvider& provider);

/// Deterministic test provider: L2-normalized 512-bin histogram of
/// FNV-1a-hashed character trigrams (the whole string counts as one gram
/// when shorter than three bytes).
class TrigramHashProvider final : public EmbeddingProvider {
  public:
    static constexpr std::size_t kBins = 512;

    EmbeddingVector embed(const std::string& text) override;
    std::size_t dimension() const override { return kBins; }
    std::string identity() const override { return "trigram"; }

    static std::uint64_t fnv1a(const char* data, std::size_t len);
};

struct HttpEmbedConfig {
    std::string base_url;
    std::string model;
    std::string api_key; // empty -> OPTISEQ_API_KEY
    int timeout_ms = 30000;
};

/// Client for OpenAI-style /embeddings endpoints.
class HttpEmbeddingProvider final : public EmbeddingProvider {
  public:
    explicit HttpEmbeddingProvider(HttpEmbedConfig config);

    EmbeddingVector embed(const std::string& text) override;
    std::size_t dimension() const override { return dimension_; }
    std::string identity() const override {
        return "http:" + config_.base_url + "#" + config_.model;
    }

  private:
    HttpEmbedConfig config_;
    std::string host_;
    std::string path_prefix_;
    std::size_t dimension_ = 0; // learned from the first response
};

} // namespace optiseq
