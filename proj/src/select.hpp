#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "embed.hpp"
#include "lm.hpp"
#include "permute.hpp"
#include "prompt.hpp"

namespace optiseq {

enum class Method { optiseq, eoptiseq, topk, random, locale, influence };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct SelectionResult {
    Method method = Method::optiseq;
    std::vector<Candidate> candidates;   // one per evaluated ordering
    std::size_t chosen_index = 0;
    // Per-ordering decision statistic (example-free logprob, entropy or
    // influence); empty for methods that compute none (topk, random).
    std::vector<double> scores;
    int lm_calls = 0;                    // backend invocations actually made
    double gen_wall_ms = 0.0;            // wall span of the generation batch
    double score_wall_ms = 0.0;          // wall span of the scoring batch

    const Candidate& chosen() const { return candidates[chosen_index]; }
    double wall_ms() const { return gen_wall_ms + score_wall_ms; }
};

/// Probability mass over a fixed label set, renormalized to sum to 1.
struct LabelDistribution {
    std::vector<std::string> labels;
    std::vector<double> probs;
};

/// Sum of the candidate's generation logprobs (its likelihood under the
/// with-examples prompt). 0 for an empty output.
double naive_icl_score(const Candidate& candidate);

/// Log-probability of the candidate's output conditioned on the
/// example-free prompt; stores the value on the candidate too.
double example_free_score(const IclTask& task, const CompiledTemplate& tpl,
                          Candidate& candidate, LmBackend& backend);

/// Evaluates every one of the E! orderings: generate once per ordering,
/// rescore each output against the example-free prompt, keep the argmax.
/// Ties go to the lowest enumeration rank.
SelectionResult optiseq_select(const IclTask& task, const CompiledTemplate& tpl,
                               const GenParams& params, LmBackend& backend,
                               std::uint64_t permutation_cap = kDefaultPermutationCap);

/// Same pipeline over the pruned plan: the example most similar to the
/// query is anchored first and only the (E-1)! tail orderings compete.
SelectionResult eoptiseq_select(const IclTask& task, const CompiledTemplate& tpl,
                                const GenParams& params, LmBackend& backend,
                                EmbeddingProvider& embedder,
                                std::uint64_t permutation_cap = kDefaultPermutationCap);

/// Single ordering: examples by descending similarity to the query.
SelectionResult topk_select(const IclTask& task, const CompiledTemplate& tpl,
                            const GenParams& params, LmBackend& backend,
                            EmbeddingProvider& embedder);

/// Single ordering drawn uniformly from the E! permutations; the draw is
/// a pure function of the seed.
SelectionResult random_select(const IclTask& task, const CompiledTemplate& tpl,
                              const GenParams& params, LmBackend& backend,
                              std::uint64_t seed);

/// Mass exp(score(prompt, label)) per label, renormalized over the set.
LabelDistribution label_distribution(const std::string& prompt,
                                     const std::vector<std::string>& labels,
                                     LmBackend& backend, int parallelism = 1,
                                     int* calls = nullptr);

/// Entropy-median baseline: score the label distribution under every
/// with-examples prompt, take the ordering at the lower median entropy.
SelectionResult locale_select(const IclTask& task, const CompiledTemplate& tpl,
                              const GenParams& params, LmBackend& backend,
                              std::uint64_t permutation_cap = kDefaultPermutationCap);

/// Influence baseline: fix y to the majority-vote prediction across
/// orderings, pick the ordering where P(y) deviates most above the mean.
SelectionResult influence_select(const IclTask& task, const CompiledTemplate& tpl,
                                 const GenParams& params, LmBackend& backend,
                                 std::uint64_t permutation_cap = kDefaultPermutationCap);

// Shared math, exposed for direct testing.
double entropy_nats(std::span<const double> probs);
std::size_t lower_median_index(std::span<const double> values);
std::vector<double> influence_values(std::span<const double> probs);

} // namespace optiseq
