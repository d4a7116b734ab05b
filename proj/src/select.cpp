#include "select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "parallel.hpp"

namespace optiseq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Candidate make_candidate(Ordering ordering, LmResponse&& gen) {
    Candidate c;
    c.ordering = std::move(ordering);
    c.output_text = std::move(gen.text);
    c.output_tokens = std::move(gen.tokens);
    c.gen_logprobs = std::move(gen.logprobs);
    c.gen_logprob_total = sum_logprobs(c.gen_logprobs);
    return c;
}

std::vector<std::string> assemble_all(const IclTask& task, const CompiledTemplate& tpl,
                                      const OrderingPlan& plan) {
    std::vector<std::string> prompts(plan.orderings.size());
    for (std::size_t i = 0; i < plan.orderings.size(); ++i)
        prompts[i] = tpl.assemble_prompt(task, plan.orderings[i]);
    return prompts;
}

// One generation per ordering, dispatched concurrently up to the
// backend's parallelism; results land by index so completion order never
// matters.
std::vector<Candidate> generate_candidates(const OrderingPlan& plan,
                                           const std::vector<std::string>& prompts,
                                           const GenParams& params, LmBackend& backend,
                                           int* calls, double* wall_ms) {
    std::vector<Candidate> out(plan.orderings.size());
    double ms = timed_parallel_for(prompts.size(), backend.max_parallel(), [&](std::size_t i) {
        out[i] = make_candidate(plan.orderings[i], backend.generate(prompts[i], params));
    });
    *calls += static_cast<int>(prompts.size());
    *wall_ms += ms;
    return out;
}

std::size_t argmax_lowest_rank(const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

// Generate-then-rescore shared by the exhaustive and anchored plans.
SelectionResult run_rescoring_pipeline(Method method, const IclTask& task,
                                       const CompiledTemplate& tpl, const GenParams& params,
                                       LmBackend& backend, OrderingPlan plan) {
    SelectionResult result;
    result.method = method;

    auto prompts = assemble_all(task, tpl, plan);
    result.candidates = generate_candidates(plan, prompts, params, backend,
                                            &result.lm_calls, &result.gen_wall_ms);

    const std::string example_free = tpl.assemble_example_free_prompt(task);
    result.scores.assign(result.candidates.size(), kNegInf);
    std::vector<std::size_t> to_score;
    for (std::size_t i = 0; i < result.candidates.size(); ++i) {
        if (result.candidates[i].output_text.empty()) {
            // Kept, but can never win: only an all-empty plan is an error.
            result.candidates[i].example_free_logprob = kNegInf;
        } else {
            to_score.push_back(i);
        }
    }
    if (to_score.empty())
        fail(Errc::all_generations_empty,
             "every ordering of task '" + task.id + "' generated an empty output");

    double ms = timed_parallel_for(to_score.size(), backend.max_parallel(), [&](std::size_t j) {
        std::size_t i = to_score[j];
        double lp = backend
                        .score_continuation(example_free, result.candidates[i].output_text)
                        .total_logprob;
        result.candidates[i].example_free_logprob = lp;
        result.scores[i] = lp;
    });
    result.lm_calls += static_cast<int>(to_score.size());
    result.score_wall_ms += ms;

    result.chosen_index = argmax_lowest_rank(result.scores);
    return result;
}

SelectionResult single_ordering_result(Method method, const IclTask& task,
                                       const CompiledTemplate& tpl, const GenParams& params,
                                       LmBackend& backend, Ordering ordering) {
    SelectionResult result;
    result.method = method;
    std::string prompt = tpl.assemble_prompt(task, ordering);
    double ms = timed_parallel_for(1, 1, [&](std::size_t) {
        result.candidates.push_back(make_candidate(ordering, backend.generate(prompt, params)));
    });
    result.gen_wall_ms = ms;
    result.lm_calls = 1;
    result.chosen_index = 0;
    return result;
}

std::vector<double> renormalize_logmass(const std::vector<double>& logmass) {
    double m = *std::max_element(logmass.begin(), logmass.end());
    double sum = 0.0;
    for (double lp : logmass) sum += std::exp(lp - m);
    double lse = m + std::log(sum);
    std::vector<double> probs(logmass.size());
    for (std::size_t i = 0; i < logmass.size(); ++i) probs[i] = std::exp(logmass[i] - lse);
    return probs;
}

// Per-ordering label probabilities shared by the LocalE and Influence
// baselines. Classification tasks score the configured label space; for
// generation tasks the label set is the deduplicated set of outputs the
// orderings themselves produced.
struct OrderingLabelProbs {
    OrderingPlan plan;
    std::vector<std::string> prompts;
    std::vector<Candidate> candidates; // outputs filled only on the generation path
    std::vector<std::string> labels;
    std::vector<std::vector<double>> probs; // [ordering][label]
    bool generated_all = false;
    int lm_calls = 0;
    double gen_wall_ms = 0.0;
    double score_wall_ms = 0.0;
};

OrderingLabelProbs ordering_label_probs(const IclTask& task, const CompiledTemplate& tpl,
                                        const GenParams& params, LmBackend& backend,
                                        std::uint64_t cap) {
    OrderingLabelProbs out;
    out.plan = enumerate_orderings(task.examples.size(), cap);
    out.prompts = assemble_all(task, tpl, out.plan);

    if (task.task_kind == TaskKind::classification) {
        out.labels = task.label_space;
        out.candidates.resize(out.plan.orderings.size());
        for (std::size_t i = 0; i < out.plan.orderings.size(); ++i)
            out.candidates[i].ordering = out.plan.orderings[i];
    } else {
        out.candidates = generate_candidates(out.plan, out.prompts, params, backend,
                                             &out.lm_calls, &out.gen_wall_ms);
        out.generated_all = true;
        for (const auto& c : out.candidates) {
            if (c.output_text.empty()) continue;
            if (std::find(out.labels.begin(), out.labels.end(), c.output_text) ==
                out.labels.end())
                out.labels.push_back(c.output_text);
        }
        if (out.labels.empty())
            fail(Errc::all_generations_empty,
                 "every ordering of task '" + task.id + "' generated an empty output");
    }

    const std::size_t n_orders = out.plan.orderings.size();
    const std::size_t n_labels = out.labels.size();
    std::vector<std::vector<double>> logmass(n_orders, std::vector<double>(n_labels));
    double ms = timed_parallel_for(n_orders * n_labels, backend.max_parallel(),
                                   [&](std::size_t j) {
                                       std::size_t o = j / n_labels;
                                       std::size_t l = j % n_labels;
                                       logmass[o][l] =
                                           backend.score_continuation(out.prompts[o],
                                                                      out.labels[l])
                                               .total_logprob;
                                   });
    out.lm_calls += static_cast<int>(n_orders * n_labels);
    out.score_wall_ms += ms;

    out.probs.reserve(n_orders);
    for (const auto& row : logmass) out.probs.push_back(renormalize_logmass(row));
    return out;
}

// Generates the chosen ordering's output unless the plan already did.
void finalize_baseline_choice(OrderingLabelProbs& olp, SelectionResult& result,
                              const GenParams& params, LmBackend& backend) {
    result.candidates = std::move(olp.candidates);
    result.lm_calls += olp.lm_calls;
    result.gen_wall_ms += olp.gen_wall_ms;
    result.score_wall_ms += olp.score_wall_ms;
    if (!olp.generated_all) {
        const std::string& prompt = olp.prompts[result.chosen_index];
        double ms = timed_parallel_for(1, 1, [&](std::size_t) {
            result.candidates[result.chosen_index] = make_candidate(
                result.candidates[result.chosen_index].ordering,
                backend.generate(prompt, params));
        });
        result.lm_calls += 1;
        result.gen_wall_ms += ms;
    }
}

} // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::optiseq: return "optiseq";
        case Method::eoptiseq: return "eoptiseq";
        case Method::topk: return "topk";
        case Method::random: return "random";
        case Method::locale: return "locale";
        case Method::influence: return "influence";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "optiseq") return Method::optiseq;
    if (name == "eoptiseq") return Method::eoptiseq;
    if (name == "topk") return Method::topk;
    if (name == "random") return Method::random;
    if (name == "locale") return Method::locale;
    if (name == "influence") return Method::influence;
    fail(Errc::invalid_argument, "unknown method '" + name + "'");
}

double naive_icl_score(const Candidate& candidate) {
    return sum_logprobs(candidate.gen_logprobs);
}

double example_free_score(const IclTask& task, const CompiledTemplate& tpl,
                          Candidate& candidate, LmBackend& backend) {
    if (candidate.output_text.empty())
        fail(Errc::empty_output, "cannot rescore an empty output");
    std::string prompt = tpl.assemble_example_free_prompt(task);
    double lp = backend.score_continuation(prompt, candidate.output_text).total_logprob;
    candidate.example_free_logprob = lp;
    return lp;
}

SelectionResult optiseq_select(const IclTask& task, const CompiledTemplate& tpl,
                               const GenParams& params, LmBackend& backend,
                               std::uint64_t permutation_cap) {
    validate_task(task);
    return run_rescoring_pipeline(Method::optiseq, task, tpl, params, backend,
                                  enumerate_orderings(task.examples.size(), permutation_cap));
}

SelectionResult eoptiseq_select(const IclTask& task, const CompiledTemplate& tpl,
                                const GenParams& params, LmBackend& backend,
                                EmbeddingProvider& embedder, std::uint64_t permutation_cap) {
    validate_task(task);
    auto ranked = rank_examples(task, embedder);
    return run_rescoring_pipeline(Method::eoptiseq, task, tpl, params, backend,
                                  anchored_orderings(ranked, permutation_cap));
}

SelectionResult topk_select(const IclTask& task, const CompiledTemplate& tpl,
                            const GenParams& params, LmBackend& backend,
                            EmbeddingProvider& embedder) {
    validate_task(task);
    Ordering ordering{rank_examples(task, embedder), {OrderingKind::topk, 0}};
    return single_ordering_result(Method::topk, task, tpl, params, backend,
                                  std::move(ordering));
}

SelectionResult random_select(const IclTask& task, const CompiledTemplate& tpl,
                              const GenParams& params, LmBackend& backend,
                              std::uint64_t seed) {
    validate_task(task);
    // mt19937_64 is fully specified by the standard, so the draw is
    // reproducible across platforms (unlike the distribution adaptors).
    std::uint64_t n_orders = factorial(task.examples.size());
    std::uint64_t rank = std::mt19937_64(seed)() % n_orders;
    Ordering ordering{unrank_permutation(task.examples.size(), rank),
                      {OrderingKind::random, seed}};
    return single_ordering_result(Method::random, task, tpl, params, backend,
                                  std::move(ordering));
}

LabelDistribution label_distribution(const std::string& prompt,
                                     const std::vector<std::string>& labels,
                                     LmBackend& backend, int parallelism, int* calls) {
    if (labels.empty()) fail(Errc::invalid_argument, "label_distribution: no labels");
    std::vector<double> logmass(labels.size());
    parallel_for(labels.size(), parallelism, [&](std::size_t i) {
        logmass[i] = backend.score_continuation(prompt, labels[i]).total_logprob;
    });
    if (calls) *calls += static_cast<int>(labels.size());
    return {labels, renormalize_logmass(logmass)};
}

SelectionResult locale_select(const IclTask& task, const CompiledTemplate& tpl,
                              const GenParams& params, LmBackend& backend,
                              std::uint64_t permutation_cap) {
    validate_task(task);
    auto olp = ordering_label_probs(task, tpl, params, backend, permutation_cap);

    SelectionResult result;
    result.method = Method::locale;
    result.scores.reserve(olp.probs.size());
    for (const auto& row : olp.probs) result.scores.push_back(entropy_nats(row));
    result.chosen_index = lower_median_index(result.scores);
    finalize_baseline_choice(olp, result, params, backend);
    return result;
}

SelectionResult influence_select(const IclTask& task, const CompiledTemplate& tpl,
                                 const GenParams& params, LmBackend& backend,
                                 std::uint64_t permutation_cap) {
    validate_task(task);
    auto olp = ordering_label_probs(task, tpl, params, backend, permutation_cap);

    const std::size_t n_orders = olp.probs.size();
    const std::size_t n_labels = olp.labels.size();

    // y = majority-vote predicted label across orderings; vote ties go to
    // the label with the highest mean probability.
    std::vector<std::size_t> votes(n_labels, 0);
    std::vector<double> mean_prob(n_labels, 0.0);
    for (const auto& row : olp.probs) {
        std::size_t best = 0;
        for (std::size_t l = 1; l < n_labels; ++l)
            if (row[l] > row[best]) best = l;
        ++votes[best];
        for (std::size_t l = 0; l < n_labels; ++l) mean_prob[l] += row[l] / double(n_orders);
    }
    std::size_t target = 0;
    for (std::size_t l = 1; l < n_labels; ++l) {
        if (votes[l] > votes[target] ||
            (votes[l] == votes[target] && mean_prob[l] > mean_prob[target]))
            target = l;
    }

    std::vector<double> target_probs(n_orders);
    for (std::size_t o = 0; o < n_orders; ++o) target_probs[o] = olp.probs[o][target];

    SelectionResult result;
    result.method = Method::influence;
    result.scores = influence_values(target_probs);
    result.chosen_index = argmax_lowest_rank(result.scores);
    finalize_baseline_choice(olp, result, params, backend);
    return result;
}

double entropy_nats(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

std::size_t lower_median_index(std::span<const double> values) {
    if (values.empty()) fail(Errc::invalid_argument, "lower_median_index: empty input");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b;
    });
    return order[(values.size() - 1) / 2];
}

std::vector<double> influence_values(std::span<const double> probs) {
    double mean = 0.0;
    for (double p : probs) mean += p;
    mean /= static_cast<double>(probs.size());
    std::vector<double> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] - mean;
    return out;
}

} // namespace optiseq
