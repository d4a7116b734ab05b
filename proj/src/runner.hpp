#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"
#include "embed.hpp"
#include "http_backend.hpp"
#include "lm.hpp"
#include "metrics.hpp"
#include "select.hpp"

namespace optiseq {

using ordered_json = nlohmann::ordered_json;

struct BackendChoice {
    std::string kind = "ngram"; // "ngram" | "http"
    std::string corpus_path;    // ngram
    HttpBackendConfig http;     // http
};

struct EmbedChoice {
    std::string kind = "trigram"; // "trigram" | "http"
    HttpEmbedConfig http;
};

struct ExperimentConfig {
    std::string dataset_path;
    std::string template_path;
    std::vector<Method> methods;
    int shots = 3;
    BackendChoice backend;
    EmbedChoice embed;
    std::uint64_t seed = 0;
    int parallelism = 1;
    std::string out_path; // empty -> report not written to disk
    std::uint64_t permutation_cap = kDefaultPermutationCap;
    GenParams gen{64, 0.0, {"\n"}};
};

/// One task x method outcome. Failures are data: a per-record error is
/// captured here and the run continues.
struct EvalRecord {
    std::string task_id;
    Method method = Method::optiseq;
    Ordering ordering;
    std::string output_text;
    std::optional<std::vector<std::string>> predicted_sequence;
    std::optional<std::string> predicted_label;
    std::optional<double> precision; // sequence tasks with ground truth
    std::optional<double> recall;
    std::optional<double> accuracy;  // any task with ground truth
    std::optional<double> statistic; // example-free logprob / entropy / influence
    int lm_calls = 0;
    std::int64_t wall_ms = 0; // backend call spans only, truncated to ms
    bool parse_failure = false;
    std::optional<std::string> error;
};

struct ExperimentResult {
    std::vector<EvalRecord> records;
    ordered_json report; // config echo + summary + records, stable key order
};

std::unique_ptr<LmBackend> make_backend(const BackendChoice& choice, int parallelism);
std::unique_ptr<EmbeddingProvider> make_embedder(const EmbedChoice& choice);

/// Runs every task x method cell with bounded concurrency. Records come
/// back in dataset order regardless of completion order; with the ngram
/// backend and a fixed seed the report is byte-reproducible.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Same, with injected backend/embedder (tests swap in fakes here).
ExperimentResult run_experiment(const ExperimentConfig& config, LmBackend& backend,
                                EmbeddingProvider& embedder);

/// Writes the report JSON to `path`.
void emit_report(const ordered_json& report, const std::string& path);

/// Fixed-width per-method summary for terminal output.
std::string render_summary_table(const ordered_json& report);

struct VerifyOutcome {
    bool ok = false;
    std::string details;
};

/// Re-reads a report, recomputes the summary aggregates from its records
/// and, for ngram-backed runs, re-derives every optiseq/eoptiseq
/// example-free logprob from the corpus; any inequality fails.
VerifyOutcome verify_report(const std::string& report_path);

// Deterministic per-task seed derivation (splitmix64 over the run seed).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

} // namespace optiseq
