#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "http_backend.hpp"
#include "ngram_backend.hpp"
#include "parallel.hpp"

namespace optiseq {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::unique_ptr<LmBackend> make_backend(const BackendChoice& choice, int parallelism) {
    if (choice.kind == "ngram") {
        if (choice.corpus_path.empty())
            fail(Errc::invalid_argument, "ngram backend needs a corpus path");
        return NgramBackend::from_file(choice.corpus_path);
    }
    if (choice.kind == "http") {
        HttpBackendConfig http = choice.http;
        http.max_parallel = parallelism;
        return std::make_unique<HttpBackend>(http);
    }
    fail(Errc::invalid_argument, "unknown backend kind '" + choice.kind + "'");
}

std::unique_ptr<EmbeddingProvider> make_embedder(const EmbedChoice& choice) {
    if (choice.kind == "trigram") return std::make_unique<TrigramHashProvider>();
    if (choice.kind == "http") return std::make_unique<HttpEmbeddingProvider>(choice.http);
    fail(Errc::invalid_argument, "unknown embed kind '" + choice.kind + "'");
}

namespace {

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.dataset_path.empty()) fail(Errc::invalid_argument, "dataset path is empty");
    if (cfg.template_path.empty()) fail(Errc::invalid_argument, "template path is empty");
    if (cfg.methods.empty()) fail(Errc::invalid_argument, "no methods configured");
    if (cfg.shots < 1) fail(Errc::invalid_argument, "shots must be >= 1");
    if (cfg.parallelism < 1) fail(Errc::invalid_argument, "parallelism must be >= 1");
    if (factorial(static_cast<std::size_t>(cfg.shots)) > cfg.permutation_cap)
        fail(Errc::cap_exceeded, std::to_string(cfg.shots) + "-shot search needs " +
                                     std::to_string(factorial(cfg.shots)) +
                                     " orderings, above the permutation cap of " +
                                     std::to_string(cfg.permutation_cap) +
                                     " (raise the cap to override)");
}

bool method_uses_similarity(Method m) {
    return m == Method::topk || m == Method::eoptiseq;
}

// The pool may hold more examples than `shots`; the slice is by pool
// order except for the similarity-driven methods, which keep the top
// `shots` by similarity (in ranked order).
IclTask working_task(const IclTask& task, Method method, int shots,
                     EmbeddingProvider& embedder) {
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(shots),
                                          task.examples.size());
    if (k == task.examples.size()) return task;
    IclTask w = task;
    w.examples.clear();
    if (method_uses_similarity(method)) {
        auto ranked = rank_examples(task, embedder);
        for (std::size_t i = 0; i < k; ++i) w.examples.push_back(task.examples[ranked[i]]);
    } else {
        w.examples.assign(task.examples.begin(),
                          task.examples.begin() + static_cast<std::ptrdiff_t>(k));
    }
    return w;
}

void score_record(EvalRecord& rec, const IclTask& task) {
    if (task.task_kind == TaskKind::sequence_generation) {
        try {
            rec.predicted_sequence = parse_api_sequence(rec.output_text).names;
        } catch (const Error&) {
            rec.parse_failure = true;
        }
        if (task.ground_truth) {
            ApiSequence gold = parse_api_sequence(*task.ground_truth);
            if (rec.predicted_sequence) {
                MetricTriple m = sequence_metrics({*rec.predicted_sequence}, gold);
                rec.precision = m.precision;
                rec.recall = m.recall;
                rec.accuracy = m.accuracy;
            } else {
                rec.precision = 0.0;
                rec.recall = 0.0;
                rec.accuracy = 0.0;
            }
        }
    } else {
        std::string label = trim_copy(rec.output_text);
        rec.predicted_label = label;
        if (label.empty()) rec.parse_failure = true;
        if (task.ground_truth)
            rec.accuracy = classification_score(rec.output_text, *task.ground_truth);
    }
}

EvalRecord run_cell(const IclTask& task, std::size_t task_index, Method method,
                    const ExperimentConfig& cfg, const CompiledTemplate& tpl,
                    LmBackend& backend, EmbeddingProvider& embedder) {
    EvalRecord rec;
    rec.task_id = task.id;
    rec.method = method;
    try {
        IclTask w = working_task(task, method, cfg.shots, embedder);
        SelectionResult sel;
        switch (method) {
            case Method::optiseq:
                sel = optiseq_select(w, tpl, cfg.gen, backend, cfg.permutation_cap);
                break;
            case Method::eoptiseq:
                sel = eoptiseq_select(w, tpl, cfg.gen, backend, embedder, cfg.permutation_cap);
                break;
            case Method::topk:
                sel = topk_select(w, tpl, cfg.gen, backend, embedder);
                break;
            case Method::random:
                sel = random_select(w, tpl, cfg.gen, backend, derive_seed(cfg.seed, task_index));
                break;
            case Method::locale:
                sel = locale_select(w, tpl, cfg.gen, backend, cfg.permutation_cap);
                break;
            case Method::influence:
                sel = influence_select(w, tpl, cfg.gen, backend, cfg.permutation_cap);
                break;
        }
        rec.ordering = sel.chosen().ordering;
        rec.output_text = sel.chosen().output_text;
        if (!sel.scores.empty()) rec.statistic = sel.scores[sel.chosen_index];
        rec.lm_calls = sel.lm_calls;
        rec.wall_ms = static_cast<std::int64_t>(sel.wall_ms());
        score_record(rec, w);
    } catch (const Error& e) {
        rec.error = std::string(errc_name(e.code())) + ": " + e.what();
    } catch (const std::exception& e) {
        rec.error = std::string("internal: ") + e.what();
    }
    return rec;
}

ordered_json ordering_to_json(const Ordering& o) {
    ordered_json src;
    switch (o.source.kind) {
        case OrderingKind::exhaustive:
            src = {{"kind", "exhaustive"}, {"rank", o.source.value}};
            break;
        case OrderingKind::anchored:
            src = {{"kind", "anchored"}, {"rank", o.source.value}};
            break;
        case OrderingKind::topk:
            src = {{"kind", "topk"}};
            break;
        case OrderingKind::random:
            src = {{"kind", "random"}, {"seed", o.source.value}};
            break;
    }
    return ordered_json{{"indices", o.indices}, {"source", std::move(src)}};
}

ordered_json record_to_json(const EvalRecord& rec) {
    ordered_json j;
    j["task_id"] = rec.task_id;
    j["method"] = method_name(rec.method);
    j["ordering"] = rec.error ? ordered_json(nullptr) : ordering_to_json(rec.ordering);
    j["output"] = rec.output_text;
    if (rec.predicted_sequence)
        j["prediction"] = *rec.predicted_sequence;
    else if (rec.predicted_label)
        j["prediction"] = *rec.predicted_label;
    else
        j["prediction"] = nullptr;
    j["precision"] = rec.precision ? ordered_json(*rec.precision) : ordered_json(nullptr);
    j["recall"] = rec.recall ? ordered_json(*rec.recall) : ordered_json(nullptr);
    j["accuracy"] = rec.accuracy ? ordered_json(*rec.accuracy) : ordered_json(nullptr);
    j["statistic"] = rec.statistic ? ordered_json(*rec.statistic) : ordered_json(nullptr);
    j["lm_calls"] = rec.lm_calls;
    j["wall_ms"] = rec.wall_ms;
    j["parse_failure"] = rec.parse_failure;
    j["error"] = rec.error ? ordered_json(*rec.error) : ordered_json(nullptr);
    return j;
}

ordered_json config_to_json(const ExperimentConfig& cfg, const std::string& backend_identity,
                            const std::string& embed_identity) {
    ordered_json methods = ordered_json::array();
    for (Method m : cfg.methods) methods.push_back(method_name(m));

    ordered_json backend;
    backend["kind"] = cfg.backend.kind;
    if (cfg.backend.kind == "ngram") {
        backend["corpus"] = cfg.backend.corpus_path;
    } else {
        backend["base_url"] = cfg.backend.http.base_url;
        backend["model"] = cfg.backend.http.model;
        backend["timeout_ms"] = cfg.backend.http.timeout_ms;
    }
    backend["identity"] = backend_identity;

    ordered_json embed;
    embed["kind"] = cfg.embed.kind;
    if (cfg.embed.kind == "http") {
        embed["base_url"] = cfg.embed.http.base_url;
        embed["model"] = cfg.embed.http.model;
    }
    embed["identity"] = embed_identity;

    ordered_json j;
    j["dataset"] = cfg.dataset_path;
    j["template"] = cfg.template_path;
    j["methods"] = std::move(methods);
    j["shots"] = cfg.shots;
    j["backend"] = std::move(backend);
    j["embed"] = std::move(embed);
    j["seed"] = cfg.seed;
    j["parallel"] = cfg.parallelism;
    j["permutation_cap"] = cfg.permutation_cap;
    j["gen"] = ordered_json{{"max_tokens", cfg.gen.max_tokens},
                            {"stop", cfg.gen.stop_sequences}};
    j["out"] = cfg.out_path;
    return j;
}

// Summary built from the records JSON (not the in-memory structs) so a
// verifier re-running this function over a parsed report reproduces it
// bit for bit.
ordered_json summarize_records(const ordered_json& records) {
    ordered_json summary;
    summary["records"] = records.size();
    std::size_t failures = 0;
    for (const auto& r : records)
        if (!r["error"].is_null()) ++failures;
    summary["failures"] = failures;
    if (records.empty()) summary["note"] = "no records";

    std::vector<InstanceScore> scored;
    struct Extra {
        std::size_t count = 0;
        std::size_t errors = 0;
        std::size_t ok = 0;
        double lm_calls_sum = 0.0;
        double wall_sum = 0.0;
    };
    std::map<std::string, Extra> extras;
    for (const auto& r : records) {
        Extra& e = extras[r["method"].get<std::string>()];
        ++e.count;
        if (!r["error"].is_null()) {
            ++e.errors;
            continue;
        }
        ++e.ok;
        e.lm_calls_sum += r["lm_calls"].get<double>();
        e.wall_sum += r["wall_ms"].get<double>();
        if (!r["accuracy"].is_null()) {
            InstanceScore s;
            s.method = r["method"].get<std::string>();
            s.accuracy = r["accuracy"].get<double>();
            if (!r["precision"].is_null()) s.precision = r["precision"].get<double>();
            if (!r["recall"].is_null()) s.recall = r["recall"].get<double>();
            scored.push_back(std::move(s));
        }
    }

    std::map<std::string, MethodAggregate> aggs;
    if (!scored.empty()) aggs = aggregate(scored);

    ordered_json per_method = ordered_json::object();
    for (const auto& [method, e] : extras) {
        ordered_json m;
        m["count"] = e.count;
        m["errors"] = e.errors;
        auto it = aggs.find(method);
        if (it != aggs.end()) {
            m["scored"] = it->second.count;
            m["accuracy"] = it->second.accuracy;
            m["mean_precision"] = it->second.mean_precision
                                      ? ordered_json(*it->second.mean_precision)
                                      : ordered_json(nullptr);
            m["mean_recall"] = it->second.mean_recall ? ordered_json(*it->second.mean_recall)
                                                      : ordered_json(nullptr);
        } else {
            m["scored"] = 0;
            m["accuracy"] = nullptr;
            m["mean_precision"] = nullptr;
            m["mean_recall"] = nullptr;
        }
        m["mean_lm_calls"] = e.ok ? ordered_json(e.lm_calls_sum / double(e.ok))
                                  : ordered_json(nullptr);
        m["mean_wall_ms"] = e.ok ? ordered_json(e.wall_sum / double(e.ok))
                                 : ordered_json(nullptr);
        per_method[method] = std::move(m);
    }
    summary["per_method"] = std::move(per_method);
    return summary;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    validate_config(config);
    auto backend = make_backend(config.backend, config.parallelism);
    auto embedder = make_embedder(config.embed);
    return run_experiment(config, *backend, *embedder);
}

ExperimentResult run_experiment(const ExperimentConfig& config, LmBackend& backend,
                                EmbeddingProvider& embedder) {
    validate_config(config);
    CompiledTemplate tpl(load_template_file(config.template_path));
    std::vector<IclTask> tasks = load_dataset(config.dataset_path);

    const std::size_t n_methods = config.methods.size();
    const std::size_t n_cells = tasks.size() * n_methods;

    ExperimentResult result;
    result.records.resize(n_cells);
    parallel_for(n_cells, config.parallelism, [&](std::size_t cell) {
        std::size_t task_index = cell / n_methods;
        Method method = config.methods[cell % n_methods];
        result.records[cell] = run_cell(tasks[task_index], task_index, method, config, tpl,
                                        backend, embedder);
    });

    ordered_json records = ordered_json::array();
    for (const auto& rec : result.records) records.push_back(record_to_json(rec));

    result.report = ordered_json::object();
    result.report["config"] = config_to_json(config, backend.identity(), embedder.identity());
    result.report["summary"] = summarize_records(records);
    result.report["records"] = std::move(records);

    if (!config.out_path.empty()) emit_report(result.report, config.out_path);
    return result;
}

void emit_report(const ordered_json& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot open report file '" + path + "' for writing");
    out << report.dump(2) << '\n';
    if (!out) fail(Errc::io_error, "failed writing report file '" + path + "'");
}

std::string render_summary_table(const ordered_json& report) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %6s %6s %9s %10s %10s %12s %12s\n", "method",
                  "count", "errors", "acc%", "prec%", "recall%", "lm_calls", "wall_ms");
    out << line;
    auto fmt = [](const ordered_json& v) {
        char buf[32];
        if (v.is_null()) return std::string("-");
        std::snprintf(buf, sizeof(buf), "%.2f", v.get<double>());
        return std::string(buf);
    };
    const auto& per_method = report.at("summary").at("per_method");
    for (auto it = per_method.begin(); it != per_method.end(); ++it) {
        const auto& m = it.value();
        std::snprintf(line, sizeof(line), "%-10s %6zu %6zu %9s %10s %10s %12s %12s\n",
                      it.key().c_str(), m.at("count").get<std::size_t>(),
                      m.at("errors").get<std::size_t>(), fmt(m.at("accuracy")).c_str(),
                      fmt(m.at("mean_precision")).c_str(), fmt(m.at("mean_recall")).c_str(),
                      fmt(m.at("mean_lm_calls")).c_str(), fmt(m.at("mean_wall_ms")).c_str());
        out << line;
    }
    return out.str();
}

VerifyOutcome verify_report(const std::string& report_path) {
    std::ifstream in(report_path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open report file '" + report_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    ordered_json report;
    try {
        report = ordered_json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, "report file '" + report_path + "': " + e.what());
    }
    if (!report.contains("config") || !report.contains("summary") ||
        !report.contains("records"))
        fail(Errc::schema_error, "report lacks config/summary/records sections");

    std::vector<std::string> problems;

    ordered_json recomputed = summarize_records(report["records"]);
    if (recomputed != report["summary"])
        problems.push_back("summary aggregates do not match the records");

    const auto& cfg = report["config"];
    const std::string backend_kind = cfg.at("backend").at("kind").get<std::string>();
    std::string notice;
    if (backend_kind == "ngram") {
        auto backend = NgramBackend::from_file(cfg["backend"]["corpus"].get<std::string>());
        CompiledTemplate tpl(load_template_file(cfg["template"].get<std::string>()));
        std::vector<IclTask> tasks = load_dataset(cfg["dataset"].get<std::string>());
        std::unordered_map<std::string, const IclTask*> by_id;
        for (const auto& t : tasks) by_id[t.id] = &t;

        for (const auto& r : report["records"]) {
            std::string method = r["method"].get<std::string>();
            if (method != "optiseq" && method != "eoptiseq") continue;
            if (!r["error"].is_null() || r["statistic"].is_null()) continue;
            std::string id = r["task_id"].get<std::string>();
            auto it = by_id.find(id);
            if (it == by_id.end()) {
                problems.push_back("record '" + id + "': task not found in dataset");
                continue;
            }
            std::string output = r["output"].get<std::string>();
            if (output.empty()) {
                problems.push_back("record '" + id + "': statistic present but output empty");
                continue;
            }
            std::string prompt = tpl.assemble_example_free_prompt(*it->second);
            double expect = backend->score_continuation(prompt, output).total_logprob;
            double got = r["statistic"].get<double>();
            if (expect != got) {
                char msg[256];
                std::snprintf(msg, sizeof(msg),
                              "record '%s' (%s): stored logprob %.17g, recomputed %.17g",
                              id.c_str(), method.c_str(), got, expect);
                problems.push_back(msg);
            }
        }
    } else {
        notice = "note: non-ngram backend, aggregates verified only\n";
    }

    VerifyOutcome outcome;
    outcome.ok = problems.empty();
    std::ostringstream details;
    details << notice;
    if (outcome.ok) {
        details << "report '" << report_path << "' verified ("
                << report["records"].size() << " records)";
    } else {
        details << "verification failed for '" << report_path << "':";
        for (const auto& p : problems) details << "\n  " << p;
    }
    outcome.details = details.str();
    return outcome;
}

} // namespace optiseq
