#include "optiseq.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>

#include "http_backend.hpp"
#include "metrics.hpp"
#include "ngram_backend.hpp"
#include "permute.hpp"
#include "runner.hpp"

namespace {

thread_local std::string g_last_error;

optiseq_status status_from(optiseq::Errc c) {
    using optiseq::Errc;
    switch (c) {
        case Errc::ok: return OPTISEQ_OK;
        case Errc::invalid_argument: return OPTISEQ_ERR_INVALID_ARGUMENT;
        case Errc::template_error: return OPTISEQ_ERR_TEMPLATE;
        case Errc::invalid_ordering: return OPTISEQ_ERR_INVALID_ORDERING;
        case Errc::cap_exceeded: return OPTISEQ_ERR_CAP_EXCEEDED;
        case Errc::parse_error: return OPTISEQ_ERR_PARSE;
        case Errc::schema_error: return OPTISEQ_ERR_SCHEMA;
        case Errc::backend_unavailable: return OPTISEQ_ERR_BACKEND_UNAVAILABLE;
        case Errc::logprobs_unsupported: return OPTISEQ_ERR_LOGPROBS_UNSUPPORTED;
        case Errc::token_boundary_mismatch: return OPTISEQ_ERR_TOKEN_BOUNDARY_MISMATCH;
        case Errc::empty_output: return OPTISEQ_ERR_EMPTY_OUTPUT;
        case Errc::empty_sequence: return OPTISEQ_ERR_EMPTY_SEQUENCE;
        case Errc::empty_gold: return OPTISEQ_ERR_EMPTY_GOLD;
        case Errc::empty_record_set: return OPTISEQ_ERR_EMPTY_RECORD_SET;
        case Errc::all_generations_empty: return OPTISEQ_ERR_ALL_GENERATIONS_EMPTY;
        case Errc::dimension_mismatch: return OPTISEQ_ERR_DIMENSION_MISMATCH;
        case Errc::zero_vector: return OPTISEQ_ERR_ZERO_VECTOR;
        case Errc::io_error: return OPTISEQ_ERR_IO;
        case Errc::verification_mismatch: return OPTISEQ_ERR_VERIFY_MISMATCH;
        case Errc::internal: return OPTISEQ_ERR_INTERNAL;
    }
    return OPTISEQ_ERR_INTERNAL;
}

template <class Fn>
optiseq_status guarded(Fn&& fn) {
    try {
        fn();
        return OPTISEQ_OK;
    } catch (const optiseq::Error& e) {
        g_last_error = e.what();
        return status_from(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return OPTISEQ_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return OPTISEQ_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return OPTISEQ_ERR_INTERNAL;
    }
}

optiseq_status arg_error(const char* message) {
    g_last_error = message;
    return OPTISEQ_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::vector<optiseq::Method> parse_methods(const std::string& csv) {
    std::vector<optiseq::Method> methods;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::string name = optiseq::trim_copy(item);
        if (name.empty()) continue;
        if (name == "all") {
            return {optiseq::Method::optiseq, optiseq::Method::eoptiseq,
                    optiseq::Method::topk,    optiseq::Method::random,
                    optiseq::Method::locale,  optiseq::Method::influence};
        }
        methods.push_back(optiseq::method_from_name(name));
    }
    return methods;
}

} // namespace

extern "C" {

const char* optiseq_version(void) { return "0.1.0"; }

const char* optiseq_status_name(optiseq_status status) {
    switch (status) {
        case OPTISEQ_OK: return "ok";
        case OPTISEQ_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case OPTISEQ_ERR_TEMPLATE: return "template_error";
        case OPTISEQ_ERR_INVALID_ORDERING: return "invalid_ordering";
        case OPTISEQ_ERR_CAP_EXCEEDED: return "cap_exceeded";
        case OPTISEQ_ERR_PARSE: return "parse_error";
        case OPTISEQ_ERR_SCHEMA: return "schema_error";
        case OPTISEQ_ERR_BACKEND_UNAVAILABLE: return "backend_unavailable";
        case OPTISEQ_ERR_LOGPROBS_UNSUPPORTED: return "logprobs_unsupported";
        case OPTISEQ_ERR_TOKEN_BOUNDARY_MISMATCH: return "token_boundary_mismatch";
        case OPTISEQ_ERR_EMPTY_OUTPUT: return "empty_output";
        case OPTISEQ_ERR_EMPTY_SEQUENCE: return "empty_sequence";
        case OPTISEQ_ERR_EMPTY_GOLD: return "empty_gold";
        case OPTISEQ_ERR_EMPTY_RECORD_SET: return "empty_record_set";
        case OPTISEQ_ERR_ALL_GENERATIONS_EMPTY: return "all_generations_empty";
        case OPTISEQ_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
        case OPTISEQ_ERR_ZERO_VECTOR: return "zero_vector";
        case OPTISEQ_ERR_IO: return "io_error";
        case OPTISEQ_ERR_VERIFY_MISMATCH: return "verification_mismatch";
        case OPTISEQ_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* optiseq_last_error(void) { return g_last_error.c_str(); }

void optiseq_string_free(char* s) { std::free(s); }

optiseq_status optiseq_score_sequences(const char* pred_text, const char* gold_text,
                                       double* precision, double* recall,
                                       double* accuracy) {
    if (!pred_text || !gold_text || !precision || !recall || !accuracy)
        return arg_error("optiseq_score_sequences: NULL argument");
    return guarded([&] {
        optiseq::ApiSequence gold = optiseq::parse_api_sequence(gold_text);
        optiseq::MetricTriple m;
        try {
            optiseq::ApiSequence pred = optiseq::parse_api_sequence(pred_text);
            m = optiseq::sequence_metrics(pred, gold);
        } catch (const optiseq::Error& e) {
            if (e.code() != optiseq::Errc::empty_sequence) throw;
            // Unparseable prediction scores zero across the board.
        }
        *precision = m.precision;
        *recall = m.recall;
        *accuracy = m.accuracy;
    });
}

optiseq_status optiseq_orderings_json(size_t n, const size_t* anchor_ranked,
                                      uint64_t permutation_cap, char** json_out) {
    if (!json_out) return arg_error("optiseq_orderings_json: NULL json_out");
    return guarded([&] {
        uint64_t cap = permutation_cap ? permutation_cap : optiseq::kDefaultPermutationCap;
        optiseq::OrderingPlan plan;
        if (anchor_ranked) {
            std::vector<std::size_t> ranked(anchor_ranked, anchor_ranked + n);
            plan = optiseq::anchored_orderings(ranked, cap);
        } else {
            plan = optiseq::enumerate_orderings(n, cap);
        }
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& ordering : plan.orderings) rows.push_back(ordering.indices);
        *json_out = dup_string(rows.dump());
    });
}

struct optiseq_backend {
    std::unique_ptr<optiseq::LmBackend> impl;
};

optiseq_status optiseq_backend_open_ngram(const char* corpus_path, optiseq_backend** out) {
    if (!corpus_path || !out) return arg_error("optiseq_backend_open_ngram: NULL argument");
    return guarded([&] {
        auto handle = new optiseq_backend{optiseq::NgramBackend::from_file(corpus_path)};
        *out = handle;
    });
}

optiseq_status optiseq_backend_open_http(const optiseq_http_options* options,
                                         optiseq_backend** out) {
    if (!options || !out) return arg_error("optiseq_backend_open_http: NULL argument");
    return guarded([&] {
        optiseq::HttpBackendConfig cfg;
        cfg.base_url = options->base_url ? options->base_url : "";
        cfg.model = options->model ? options->model : "";
        cfg.api_key = options->api_key ? options->api_key : "";
        if (options->timeout_ms > 0) cfg.timeout_ms = options->timeout_ms;
        if (options->max_parallel > 0) cfg.max_parallel = options->max_parallel;
        auto handle = new optiseq_backend{std::make_unique<optiseq::HttpBackend>(cfg)};
        *out = handle;
    });
}

void optiseq_backend_close(optiseq_backend* backend) { delete backend; }

optiseq_status optiseq_backend_generate(optiseq_backend* backend, const char* prompt,
                                        int max_tokens, const char* const* stops,
                                        size_t n_stops, char** text_out,
                                        double* total_logprob) {
    if (!backend || !prompt || !text_out || !total_logprob)
        return arg_error("optiseq_backend_generate: NULL argument");
    return guarded([&] {
        optiseq::GenParams params;
        params.max_tokens = max_tokens > 0 ? max_tokens : 64;
        for (size_t i = 0; i < n_stops; ++i)
            if (stops && stops[i]) params.stop_sequences.emplace_back(stops[i]);
        optiseq::LmResponse resp = backend->impl->generate(prompt, params);
        *text_out = dup_string(resp.text);
        *total_logprob = optiseq::sum_logprobs(resp.logprobs);
    });
}

optiseq_status optiseq_backend_score(optiseq_backend* backend, const char* prefix,
                                     const char* continuation, double* total_logprob) {
    if (!backend || !prefix || !continuation || !total_logprob)
        return arg_error("optiseq_backend_score: NULL argument");
    return guarded([&] {
        *total_logprob = backend->impl->score_continuation(prefix, continuation).total_logprob;
    });
}

optiseq_status optiseq_run(const optiseq_run_options* options, char** report_json_out) {
    if (!options) return arg_error("optiseq_run: NULL options");
    return guarded([&] {
        optiseq::ExperimentConfig cfg;
        cfg.dataset_path = options->dataset_path ? options->dataset_path : "";
        cfg.template_path = options->template_path ? options->template_path : "";
        cfg.methods = parse_methods(options->methods ? options->methods : "");
        cfg.shots = options->shots > 0 ? options->shots : 3;
        cfg.backend.kind = options->backend ? options->backend : "ngram";
        cfg.backend.corpus_path = options->corpus_path ? options->corpus_path : "";
        cfg.backend.http.base_url = options->base_url ? options->base_url : "";
        cfg.backend.http.model = options->model ? options->model : "";
        if (options->timeout_ms > 0) cfg.backend.http.timeout_ms = options->timeout_ms;
        cfg.embed.kind = options->embed ? options->embed : "trigram";
        cfg.embed.http.base_url = options->embed_base_url ? options->embed_base_url : "";
        cfg.embed.http.model = options->embed_model ? options->embed_model : "";
        cfg.seed = options->seed;
        cfg.parallelism = options->parallel > 0 ? options->parallel : 1;
        cfg.permutation_cap =
            options->permutation_cap ? options->permutation_cap : optiseq::kDefaultPermutationCap;
        cfg.gen.max_tokens = options->max_tokens > 0 ? options->max_tokens : 64;
        cfg.gen.stop_sequences = {options->stop ? std::string(options->stop) : std::string("\n")};
        cfg.out_path = options->out_path ? options->out_path : "";

        optiseq::ExperimentResult result = optiseq::run_experiment(cfg);
        if (report_json_out) *report_json_out = dup_string(result.report.dump(2));
    });
}

optiseq_status optiseq_render_table(const char* report_json, char** table_out) {
    if (!report_json || !table_out) return arg_error("optiseq_render_table: NULL argument");
    return guarded([&] {
        optiseq::ordered_json report;
        try {
            report = optiseq::ordered_json::parse(report_json);
        } catch (const nlohmann::json::exception& e) {
            optiseq::fail(optiseq::Errc::parse_error, std::string("report JSON: ") + e.what());
        }
        if (!report.contains("summary"))
            optiseq::fail(optiseq::Errc::schema_error, "report JSON lacks a summary section");
        *table_out = dup_string(optiseq::render_summary_table(report));
    });
}

optiseq_status optiseq_verify(const char* report_path, char** details_out) {
    if (!report_path) return arg_error("optiseq_verify: NULL report_path");
    return guarded([&] {
        optiseq::VerifyOutcome outcome = optiseq::verify_report(report_path);
        if (details_out) *details_out = dup_string(outcome.details);
        if (!outcome.ok) optiseq::fail(optiseq::Errc::verification_mismatch, outcome.details);
    });
}

} // extern "C"
