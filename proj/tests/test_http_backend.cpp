#include <doctest.h>

#include <thread>

#include "fake_server.hpp"
#include "http_backend.hpp"

using namespace optiseq;
using testing::FakeCompletionsServer;
using testing::fake_token_logprob;
using testing::ws_tokenize;

namespace {

HttpBackendConfig config_for(const FakeCompletionsServer& server) {
    HttpBackendConfig cfg;
    cfg.base_url = server.base_url();
    cfg.model = "fake-model";
    cfg.api_key = "test-key";
    cfg.timeout_ms = 5000;
    cfg.max_retries = 2;
    cfg.retry_backoff_ms = 10;
    return cfg;
}

} // namespace

TEST_CASE("generation round trip with token logprobs") {
    FakeCompletionsServer server;
    server.gen_text = "<<SearchMovie, MovieCredits>>";
    HttpBackend backend(config_for(server));

    GenParams params;
    params.max_tokens = 16;
    LmResponse r = backend.generate("Utterance: x\nSequence:", params);
    CHECK(r.text == server.gen_text);
    std::string joined;
    double expected_total = 0.0;
    for (const auto& tok : ws_tokenize(server.gen_text)) expected_total += fake_token_logprob(tok);
    for (const auto& t : r.tokens) joined += t;
    CHECK(joined == r.text);
    CHECK(sum_logprobs(r.logprobs) == doctest::Approx(expected_total).epsilon(1e-12));
    CHECK(server.last_authorization == "Bearer test-key");
}

TEST_CASE("client cuts at a stop sequence the server ignored") {
    FakeCompletionsServer server;
    server.gen_text = "<<A>> trailing junk";
    HttpBackend backend(config_for(server));

    GenParams params;
    params.max_tokens = 16;
    params.stop_sequences = {">>"};
    LmResponse r = backend.generate("p", params);
    CHECK(r.text.find(">>") == std::string::npos);
    CHECK(r.text.size() <= std::string("<<A").size());
    std::string joined;
    for (const auto& t : r.tokens) joined += t;
    CHECK(joined == r.text);
}

TEST_CASE("echo scoring sums exactly the continuation span") {
    FakeCompletionsServer server;
    HttpBackend backend(config_for(server));

    // Boundary on a whitespace/word edge: "abc def " | "ghi jkl"
    ScoreResponse r = backend.score_continuation("abc def ", "ghi jkl");
    double expected = fake_token_logprob("ghi") + fake_token_logprob(" ") +
                      fake_token_logprob("jkl");
    CHECK(r.total_logprob == doctest::Approx(expected).epsilon(1e-12));
    REQUIRE(r.tokens.size() == 3);
    CHECK(r.tokens[0] == "ghi");
}

TEST_CASE("merged boundary raises token_boundary_mismatch") {
    FakeCompletionsServer server;
    HttpBackend backend(config_for(server));
    try {
        backend.score_continuation("abc de", "f ghi");
        FAIL("expected token_boundary_mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::token_boundary_mismatch);
    }
}

TEST_CASE("missing logprobs is fatal, not retried") {
    FakeCompletionsServer server;
    server.omit_logprobs = true;
    HttpBackend backend(config_for(server));
    GenParams params;
    try {
        backend.generate("p", params);
        FAIL("expected logprobs_unsupported");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::logprobs_unsupported);
    }
    CHECK(server.hits.load() == 1);
}

TEST_CASE("null logprob inside the continuation is unsupported") {
    FakeCompletionsServer server;
    server.null_logprob_token = "zz";
    HttpBackend backend(config_for(server));
    try {
        backend.score_continuation("a ", "zz");
        FAIL("expected logprobs_unsupported");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::logprobs_unsupported);
    }
}

TEST_CASE("transient failures are retried with backoff") {
    FakeCompletionsServer server;
    server.fail_next = 2;
    HttpBackend backend(config_for(server));
    GenParams params;
    LmResponse r = backend.generate("p", params);
    CHECK(!r.text.empty());
    CHECK(server.hits.load() == 3);
}

TEST_CASE("exhausted retries surface backend_unavailable") {
    FakeCompletionsServer server;
    server.fail_next = 10;
    HttpBackendConfig cfg = config_for(server);
    cfg.max_retries = 1;
    HttpBackend backend(cfg);
    GenParams params;
    try {
        backend.generate("p", params);
        FAIL("expected backend_unavailable");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::backend_unavailable);
    }
    CHECK(server.hits.load() == 2);
}

TEST_CASE("unreachable host surfaces backend_unavailable") {
    HttpBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:9/v1"; // discard port, nothing listens
    cfg.model = "fake";
    cfg.max_retries = 0;
    cfg.timeout_ms = 500;
    HttpBackend backend(cfg);
    GenParams params;
    try {
        backend.generate("p", params);
        FAIL("expected backend_unavailable");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::backend_unavailable);
    }
}

TEST_CASE("in-flight requests stay under the configured limit") {
    FakeCompletionsServer server;
    server.delay_ms = 40;
    HttpBackendConfig cfg = config_for(server);
    cfg.max_parallel = 3;
    HttpBackend backend(cfg);

    GenParams params;
    std::vector<std::thread> threads;
    for (int i = 0; i < 9; ++i)
        threads.emplace_back([&] { backend.generate("p", params); });
    for (auto& t : threads) t.join();
    CHECK(server.max_in_flight.load() <= 3);
    CHECK(server.max_in_flight.load() >= 2); // the limit, not the transport, serializes
}
