#include <doctest.h>

#include <algorithm>
#include <random>

#include "metrics.hpp"

using namespace optiseq;

namespace {

MetricTriple score(const std::string& pred, const std::string& gold) {
    return sequence_metrics(parse_api_sequence(pred), parse_api_sequence(gold));
}

bool near2(double value, double expected) {
    // Compare at the two-decimal presentation the reference rows use.
    return std::abs(value - expected) < 0.005;
}

} // namespace

TEST_CASE("delimited list parses into trimmed names") {
    ApiSequence s = parse_api_sequence("<<SearchMovie, MovieCredits>>");
    CHECK(s.names == std::vector<std::string>{"SearchMovie", "MovieCredits"});
    CHECK(parse_api_sequence("<< A >>").names == std::vector<std::string>{"A"});
}

TEST_CASE("undelimited text is treated as the whole list") {
    ApiSequence s = parse_api_sequence("SearchMovie, MovieCredits, ortrailing");
    CHECK(s.names ==
          std::vector<std::string>{"SearchMovie", "MovieCredits", "ortrailing"});
}

TEST_CASE("empty segments are dropped, empty results are an error") {
    CHECK(parse_api_sequence("a,,b,").names == std::vector<std::string>{"a", "b"});
    CHECK_THROWS_AS(parse_api_sequence("<<>>"), Error);
    CHECK_THROWS_AS(parse_api_sequence("  ,  "), Error);
    try {
        parse_api_sequence("");
        FAIL("expected empty_sequence");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::empty_sequence);
    }
}

TEST_CASE("instance metric rows") {
    // Frozen per-instance rows: pred vs gold -> precision/recall/accuracy.
    struct Row {
        const char* pred;
        const char* gold;
        double p, r, a;
    };
    const Row rows[] = {
        {"Movie, MovieRecommendations", "<<SearchMovie, MovieRecommendations>>", 50.0, 50.0, 0.0},
        {"MovieRecommendations", "<<SearchMovie, MovieRecommendations>>", 100.0, 50.0, 0.0},
        {"SearchMovie, MovieRecommendations", "<<SearchMovie, MovieRecommendations>>", 100.0,
         100.0, 100.0},
        {"SearchPerson, PersonImages", "<<SearchMovie, MovieCredits, PersonImages>>", 50.0, 33.33,
         0.0},
        {"SearchMovie, MovieCredits, ortrailing", "<<SearchMovie, MovieCredits>>", 66.67, 100.0,
         0.0},
        {"MovieTopRated, Movie, Credit", "<<MovieTopRated, MovieCredits>>", 33.33, 50.0, 0.0},
        {"SearchMovie, B", "<<SearchMovie, MovieCredits>>", 50.0, 50.0, 0.0},
        {"Trending, PersonPopular", "<<PersonPopular>>", 50.0, 100.0, 0.0},
        {"SearchPerson, PersonMovieCredits, MOVIE_TOP_RATED",
         "<<SearchPerson, PersonMovieCredits>>", 66.67, 100.0, 0.0},
        {"CollectionImages", "<<SearchCollection, CollectionImages>>", 100.0, 50.0, 0.0},
        {"SearchCompany, CompanyImages, Movie, MovieReleaseDates, andendwitha, SearchMovie, "
         "Movie",
         "<<SearchCompany, CompanyImages>>", 28.57, 100.0, 0.0},
        {"trumpetbox_cloud.messages_getpendingmessagesfromaccount",
         "<<trumpetbox_cloud.devices_getasingledeviceinfofromaccount, "
         "trumpetbox_cloud.messages_getpendingmessagesfromaccount>>",
         100.0, 50.0, 0.0},
        {"4d_results.get.4d.company.list, 4d_results.get.past.results.(1.year)",
         "<<4d_results.get.4d.company.list, 4d_results.get.past.results.(1.year), "
         "4d_results.get.4d.results>>",
         100.0, 66.67, 0.0},
    };
    for (const Row& row : rows) {
        CAPTURE(row.pred);
        MetricTriple m = score(row.pred, row.gold);
        CHECK(near2(m.precision, row.p));
        CHECK(near2(m.recall, row.r));
        CHECK(m.accuracy == row.a);
    }
}

TEST_CASE("name matching is exact, underscore vs dot scores zero") {
    MetricTriple m = score(
        "aviation_weather_center.most_recent.tafs, aviation_weather_center.most_recent.metars",
        "<<aviation_weather_center.most.recent.tafs, "
        "aviation_weather_center.most.recent.metars>>");
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.accuracy == 0.0);
}

TEST_CASE("identity prediction scores perfectly") {
    MetricTriple m = score("<<A, B, C>>", "<<A, B, C>>");
    CHECK(m.precision == 100.0);
    CHECK(m.recall == 100.0);
    CHECK(m.accuracy == 100.0);
}

TEST_CASE("order matters for accuracy only") {
    MetricTriple m = score("<<B, A>>", "<<A, B>>");
    CHECK(m.precision == 100.0);
    CHECK(m.recall == 100.0);
    CHECK(m.accuracy == 0.0);
}

TEST_CASE("duplicates are not over-credited") {
    MetricTriple m = score("<<A, A, A>>", "<<A, B>>");
    CHECK(m.precision == doctest::Approx(100.0 / 3.0));
    CHECK(m.recall == 50.0);
}

TEST_CASE("empty gold is an error") {
    ApiSequence pred = parse_api_sequence("<<A>>");
    CHECK_THROWS_AS(sequence_metrics(pred, ApiSequence{}), Error);
}

TEST_CASE("metric bounds and implications over random pairs") {
    std::mt19937_64 rng(99);
    const std::vector<std::string> pool = {"A", "B", "C", "D", "E"};
    auto random_seq = [&](std::size_t max_len) {
        ApiSequence s;
        std::uniform_int_distribution<std::size_t> len(1, max_len);
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        for (std::size_t i = 0, n = len(rng); i < n; ++i) s.names.push_back(pool[pick(rng)]);
        return s;
    };
    for (int trial = 0; trial < 500; ++trial) {
        ApiSequence pred = random_seq(5);
        ApiSequence gold = random_seq(5);
        MetricTriple m = sequence_metrics(pred, gold);
        CHECK(m.precision >= 0.0);
        CHECK(m.precision <= 100.0);
        CHECK(m.recall >= 0.0);
        CHECK(m.recall <= 100.0);
        CHECK((m.accuracy == 0.0 || m.accuracy == 100.0));
        if (m.accuracy == 100.0) {
            CHECK(m.precision == 100.0);
            CHECK(m.recall == 100.0);
        }

        // Shuffling the prediction moves accuracy at most, never P/R.
        ApiSequence shuffled = pred;
        std::shuffle(shuffled.names.begin(), shuffled.names.end(), rng);
        MetricTriple ms = sequence_metrics(shuffled, gold);
        CHECK(ms.precision == doctest::Approx(m.precision));
        CHECK(ms.recall == doctest::Approx(m.recall));
        if (shuffled.names != pred.names && m.accuracy == 100.0)
            CHECK(ms.accuracy == 0.0);
    }
}

TEST_CASE("classification scoring trims and matches exactly") {
    CHECK(classification_score("Sci/Tech", "Sci/Tech") == 100.0);
    CHECK(classification_score("World", "Sci/Tech") == 0.0);
    CHECK(classification_score("Sports ", "Sports") == 100.0);
    CHECK(classification_score("sports", "Sports") == 0.0);
}

TEST_CASE("aggregate means match a hand-computed fixture") {
    // Ten records, two methods; expected values recomputed by hand:
    //   alpha: acc {100,0,100,0} -> 50%, P mean (80+60+100+40)/4 = 70,
    //          R mean (50+100+75+25)/4 = 62.5
    //   beta:  acc {100,100,0,0,0,100} -> 50%, no P/R (classification)
    std::vector<InstanceScore> records = {
        {"alpha", 100.0, 80.0, 50.0},  {"alpha", 0.0, 60.0, 100.0},
        {"alpha", 100.0, 100.0, 75.0}, {"alpha", 0.0, 40.0, 25.0},
        {"beta", 100.0, {}, {}},       {"beta", 100.0, {}, {}},
        {"beta", 0.0, {}, {}},         {"beta", 0.0, {}, {}},
        {"beta", 0.0, {}, {}},         {"beta", 100.0, {}, {}},
    };
    auto summary = aggregate(records);
    REQUIRE(summary.size() == 2);
    CHECK(summary["alpha"].count == 4);
    CHECK(summary["alpha"].accuracy == doctest::Approx(50.0));
    CHECK(*summary["alpha"].mean_precision == doctest::Approx(70.0));
    CHECK(*summary["alpha"].mean_recall == doctest::Approx(62.5));
    CHECK(summary["beta"].count == 6);
    CHECK(summary["beta"].accuracy == doctest::Approx(50.0));
    CHECK(!summary["beta"].mean_precision.has_value());
}

TEST_CASE("aggregate passes single records through and rejects none") {
    auto summary = aggregate({{"solo", 100.0, 12.5, 37.5}});
    CHECK(summary["solo"].accuracy == 100.0);
    CHECK(*summary["solo"].mean_precision == doctest::Approx(12.5));
    CHECK_THROWS_AS(aggregate({}), Error);
}
