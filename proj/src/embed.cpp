#include "embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include <httplib.h>
#include <json.hpp>

namespace optiseq {

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.size() != v.size())
        fail(Errc::dimension_mismatch, "cosine: dimensions " + std::to_string(u.size()) +
                                           " vs " + std::to_string(v.size()));
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) fail(Errc::zero_vector, "cosine: zero vector");
    double c = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::clamp(c, -1.0, 1.0);
}

std::vector<std::size_t> rank_examples(const IclTask& task, EmbeddingProvider& provider) {
    if (task.examples.empty()) fail(Errc::invalid_argument, "rank_examples: no examples");
    EmbeddingVector query_vec = provider.embed(task.query);
    std::vector<double> sims(task.examples.size());
    for (std::size_t i = 0; i < task.examples.size(); ++i)
        sims[i] = cosine(provider.embed(task.examples[i].input), query_vec);

    std::vector<std::size_t> order(task.examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sims[a] != sims[b]) return sims[a] > sims[b];
        return a < b;
    });
    return order;
}

std::uint64_t TrigramHashProvider::fnv1a(const char* data, std::size_t len) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 1099511628211ULL;
    }
    return h;
}

EmbeddingVector TrigramHashProvider::embed(const std::string& text) {
    if (text.empty()) fail(Errc::invalid_argument, "embed: text is empty");
    EmbeddingVector vec(kBins, 0.0);
    if (text.size() < 3) {
        vec[fnv1a(text.data(), text.size()) % kBins] = 1.0;
    } else {
        for (std::size_t i = 0; i + 3 <= text.size(); ++i)
            vec[fnv1a(text.data() + i, 3) % kBins] += 1.0;
    }
    double norm = std::sqrt(std::inner_product(vec.begin(), vec.end(), vec.begin(), 0.0));
    for (double& x : vec) x /= norm;
    return vec;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbedConfig config)
    : config_(std::move(config)) {
    if (config_.base_url.empty())
        fail(Errc::invalid_argument, "embedding provider: base_url is empty");
    if (config_.api_key.empty()) {
        if (const char* env = std::getenv("OPTISEQ_API_KEY")) config_.api_key = env;
    }
    std::size_t scheme_end = config_.base_url.find("://");
    std::size_t path_start =
        config_.base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) {
        host_ = config_.base_url;
    } else {
        host_ = config_.base_url.substr(0, path_start);
        path_prefix_ = config_.base_url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

EmbeddingVector HttpEmbeddingProvider::embed(const std::string& text) {
    if (text.empty()) fail(Errc::invalid_argument, "embed: text is empty");
    nlohmann::json req = {{"model", config_.model}, {"input", text}};

    httplib::Client client(host_);
    client.set_connection_timeout(0, config_.timeout_ms * 1000LL);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!config_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = client.Post(path_prefix_ + "/embeddings", headers, req.dump(),
                           "application/json");
    if (!res)
        fail(Errc::backend_unavailable,
             "embeddings request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        fail(Errc::backend_unavailable,
             "embeddings request failed: HTTP " + std::to_string(res->status));

    nlohmann::json resp;
    try {
        resp = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::backend_unavailable,
             std::string("malformed embeddings response: ") + e.what());
    }
    if (!resp.contains("data") || !resp["data"].is_array() || resp["data"].empty() ||
        !resp["data"][0].contains("embedding"))
        fail(Errc::backend_unavailable, "embeddings response lacks data[0].embedding");

    EmbeddingVector vec = resp["data"][0]["embedding"].get<EmbeddingVector>();
    if (vec.empty()) fail(Errc::backend_unavailable, "embeddings response is empty");
    bool all_zero = std::all_of(vec.begin(), vec.end(), [](double x) { return x == 0.0; });
    if (all_zero) fail(Errc::zero_vector, "embeddings response is the zero vector");
    if (dimension_ == 0) dimension_ = vec.size();
    if (vec.size() != dimension_)
        fail(Errc::dimension_mismatch, "embedding dimension changed between calls");
    return vec;
}

} // namespace optiseq
