// optiseq command line: run / score / perms / verify.
//
// Talks to the library exclusively through the C API in optiseq.h.
// Exit codes: 0 success, 1 fatal runtime error, 2 configuration error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "optiseq.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitConfig = 2;

int exit_code_for(optiseq_status status) {
    switch (status) {
        case OPTISEQ_OK:
            return kExitOk;
        case OPTISEQ_ERR_INVALID_ARGUMENT:
        case OPTISEQ_ERR_TEMPLATE:
        case OPTISEQ_ERR_INVALID_ORDERING:
        case OPTISEQ_ERR_CAP_EXCEEDED:
        case OPTISEQ_ERR_PARSE:
        case OPTISEQ_ERR_SCHEMA:
        case OPTISEQ_ERR_EMPTY_GOLD:
        case OPTISEQ_ERR_IO:
            return kExitConfig;
        default:
            return kExitFatal;
    }
}

int report_failure(optiseq_status status) {
    std::cerr << "error (" << optiseq_status_name(status) << "): " << optiseq_last_error()
              << "\n";
    if (status == OPTISEQ_ERR_LOGPROBS_UNSUPPORTED)
        std::cerr << "note: ordering selection rescoring needs per-token log-probabilities;"
                  << " point --base-url at a completions endpoint that reports them\n";
    return exit_code_for(status);
}

struct OwnedString {
    char* value = nullptr;
    ~OwnedString() { optiseq_string_free(value); }
};

struct RunSettings {
    std::string dataset;
    std::string tmpl;
    std::string methods = "optiseq";
    int shots = 3;
    std::string backend = "ngram";
    std::string corpus;
    std::string base_url;
    std::string model;
    int timeout_ms = 30000;
    std::string embed = "trigram";
    std::string embed_base_url;
    std::string embed_model;
    std::uint64_t seed = 0;
    int parallel = 1;
    std::uint64_t cap = 720;
    int max_tokens = 64;
    std::string stop = "\n";
    std::string out;
};

// Config file values fill anything the command line left untouched; an
// explicit flag always wins.
bool apply_config_file(const std::string& path, const CLI::App& cmd, RunSettings& s,
                       std::string& error) {
    std::ifstream in(path);
    if (!in) {
        error = "cannot open config file '" + path + "'";
        return false;
    }
    nlohmann::json j;
    try {
        std::ostringstream buf;
        buf << in.rdbuf();
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        error = "config file '" + path + "': " + e.what();
        return false;
    }
    if (!j.is_object()) {
        error = "config file '" + path + "' must hold a JSON object";
        return false;
    }

    auto unset = [&](const char* flag) { return cmd.get_option(flag)->count() == 0; };
    try {
        if (j.contains("dataset") && unset("--dataset")) s.dataset = j["dataset"];
        if (j.contains("template") && unset("--template")) s.tmpl = j["template"];
        if (j.contains("method") && unset("--method")) s.methods = j["method"];
        if (j.contains("shots") && unset("--shots")) s.shots = j["shots"];
        if (j.contains("backend") && unset("--backend")) s.backend = j["backend"];
        if (j.contains("corpus") && unset("--corpus")) s.corpus = j["corpus"];
        if (j.contains("base_url") && unset("--base-url")) s.base_url = j["base_url"];
        if (j.contains("model") && unset("--model")) s.model = j["model"];
        if (j.contains("timeout_ms") && unset("--timeout-ms")) s.timeout_ms = j["timeout_ms"];
        if (j.contains("embed") && unset("--embed")) s.embed = j["embed"];
        if (j.contains("embed_base_url") && unset("--embed-base-url"))
            s.embed_base_url = j["embed_base_url"];
        if (j.contains("embed_model") && unset("--embed-model")) s.embed_model = j["embed_model"];
        if (j.contains("seed") && unset("--seed")) s.seed = j["seed"];
        if (j.contains("parallel") && unset("--parallel")) s.parallel = j["parallel"];
        if (j.contains("cap") && unset("--cap")) s.cap = j["cap"];
        if (j.contains("max_tokens") && unset("--max-tokens")) s.max_tokens = j["max_tokens"];
        if (j.contains("stop") && unset("--stop")) s.stop = j["stop"];
        if (j.contains("out") && unset("--out")) s.out = j["out"];
    } catch (const nlohmann::json::exception& e) {
        error = "config file '" + path + "': " + e.what();
        return false;
    }
    return true;
}

int cmd_run(const CLI::App& cmd, RunSettings& s, const std::string& config_path, bool quiet) {
    if (!config_path.empty()) {
        std::string error;
        if (!apply_config_file(config_path, cmd, s, error)) {
            std::cerr << "error (config): " << error << "\n";
            return kExitConfig;
        }
    }
    if (s.backend == "ngram" && (!s.base_url.empty() || !s.model.empty())) {
        std::cerr << "error (config): --base-url/--model conflict with --backend ngram\n";
        return kExitConfig;
    }
    if (s.backend == "http" && !s.corpus.empty()) {
        std::cerr << "error (config): --corpus conflicts with --backend http\n";
        return kExitConfig;
    }

    optiseq_run_options opts{};
    opts.dataset_path = s.dataset.c_str();
    opts.template_path = s.tmpl.c_str();
    opts.methods = s.methods.c_str();
    opts.shots = s.shots;
    opts.backend = s.backend.c_str();
    opts.corpus_path = s.corpus.empty() ? nullptr : s.corpus.c_str();
    opts.base_url = s.base_url.empty() ? nullptr : s.base_url.c_str();
    opts.model = s.model.empty() ? nullptr : s.model.c_str();
    opts.timeout_ms = s.timeout_ms;
    opts.embed = s.embed.c_str();
    opts.embed_base_url = s.embed_base_url.empty() ? nullptr : s.embed_base_url.c_str();
    opts.embed_model = s.embed_model.empty() ? nullptr : s.embed_model.c_str();
    opts.seed = s.seed;
    opts.parallel = s.parallel;
    opts.permutation_cap = s.cap;
    opts.max_tokens = s.max_tokens;
    opts.stop = s.stop.c_str();
    opts.out_path = s.out.empty() ? nullptr : s.out.c_str();

    OwnedString report;
    optiseq_status status = optiseq_run(&opts, &report.value);
    if (status != OPTISEQ_OK) return report_failure(status);

    if (!quiet) {
        OwnedString table;
        if (optiseq_render_table(report.value, &table.value) == OPTISEQ_OK)
            std::cout << table.value;
        if (!s.out.empty()) std::cout << "report written to " << s.out << "\n";
    }
    return kExitOk;
}

int cmd_score(const std::string& pred, const std::string& gold) {
    double precision = 0.0, recall = 0.0, accuracy = 0.0;
    optiseq_status status =
        optiseq_score_sequences(pred.c_str(), gold.c_str(), &precision, &recall, &accuracy);
    if (status != OPTISEQ_OK) return report_failure(status);
    std::printf("P %.2f R %.2f Acc %.0f\n", precision, recall, accuracy);
    return kExitOk;
}

int cmd_perms(std::size_t n, const std::vector<std::size_t>& anchor, std::uint64_t cap) {
    OwnedString rows;
    optiseq_status status;
    if (anchor.empty()) {
        status = optiseq_orderings_json(n, nullptr, cap, &rows.value);
    } else {
        status = optiseq_orderings_json(anchor.size(), anchor.data(), cap, &rows.value);
    }
    if (status != OPTISEQ_OK) return report_failure(status);

    auto plan = nlohmann::json::parse(rows.value);
    for (const auto& ordering : plan) {
        bool first = true;
        for (const auto& idx : ordering) {
            if (!first) std::cout << ' ';
            first = false;
            std::cout << idx.get<std::size_t>();
        }
        std::cout << '\n';
    }
    return kExitOk;
}

int cmd_verify(const std::string& report_path) {
    OwnedString details;
    optiseq_status status = optiseq_verify(report_path.c_str(), &details.value);
    if (details.value && *details.value) std::cout << details.value << "\n";
    if (status == OPTISEQ_OK) return kExitOk;
    if (status == OPTISEQ_ERR_VERIFY_MISMATCH) return kExitFatal;
    return report_failure(status);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"optiseq: in-context example ordering selection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(optiseq_version()));

    RunSettings s;
    std::string config_path;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "run an ordering-selection experiment");
    run->add_option("--dataset", s.dataset, "JSON-lines task file");
    run->add_option("--template", s.tmpl, "prompt template JSON file");
    run->add_option("--method", s.methods,
                    "comma-separated: optiseq,eoptiseq,topk,random,locale,influence or 'all'");
    run->add_option("--shots", s.shots, "in-context examples per prompt (default 3)");
    run->add_option("--backend", s.backend, "ngram | http");
    run->add_option("--corpus", s.corpus, "training corpus for the ngram backend");
    run->add_option("--base-url", s.base_url, "completions endpoint base URL");
    run->add_option("--model", s.model, "model name for the http backend");
    run->add_option("--timeout-ms", s.timeout_ms, "http request timeout");
    run->add_option("--embed", s.embed, "trigram | http");
    run->add_option("--embed-base-url", s.embed_base_url, "embeddings endpoint base URL");
    run->add_option("--embed-model", s.embed_model, "embeddings model name");
    run->add_option("--seed", s.seed, "run seed");
    run->add_option("--parallel", s.parallel, "bounded concurrency (tasks and backend calls)");
    run->add_option("--cap", s.cap, "permutation cap (default 720)");
    run->add_option("--max-tokens", s.max_tokens, "generation budget per call");
    run->add_option("--stop", s.stop, "generation stop sequence");
    run->add_option("--out", s.out, "report file path");
    run->add_option("--config", config_path, "JSON config file; explicit flags win");
    run->add_flag("--quiet", quiet, "suppress the summary table");

    std::string pred, gold;
    auto* score = app.add_subcommand("score", "score a predicted API sequence against gold");
    score->add_option("--pred", pred, "predicted sequence text")->required();
    score->add_option("--gold", gold, "ground-truth sequence text")->required();

    std::size_t perms_n = 0;
    std::vector<std::size_t> anchor;
    std::uint64_t perms_cap = 720;
    auto* perms = app.add_subcommand("perms", "print an ordering plan");
    perms->add_option("-n,--n", perms_n, "number of examples");
    perms->add_option("--anchor", anchor,
                      "comma-separated ranked indices; pins the first one")
        ->delimiter(',');
    perms->add_option("--cap", perms_cap, "permutation cap (default 720)");

    std::string report_path;
    auto* verify = app.add_subcommand("verify", "recheck a report's logprobs and aggregates");
    verify->add_option("--report", report_path, "report file to verify")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (run->parsed()) return cmd_run(*run, s, config_path, quiet);
    if (score->parsed()) return cmd_score(pred, gold);
    if (perms->parsed()) {
        if (perms_n == 0 && anchor.empty()) {
            std::cerr << "error (config): perms needs -n or --anchor\n";
            return kExitConfig;
        }
        if (perms_n != 0 && !anchor.empty() && anchor.size() != perms_n) {
            std::cerr << "error (config): -n disagrees with the --anchor length\n";
            return kExitConfig;
        }
        return cmd_perms(perms_n, anchor, perms_cap);
    }
    if (verify->parsed()) return cmd_verify(report_path);
    return kExitConfig;
}
