#include <doctest.h>

#include <set>
#include <thread>

#include "permute.hpp"
#include "prompt.hpp"

using namespace optiseq;

namespace {

IclTask two_example_task() {
    IclTask t;
    t.id = "t";
    t.instruction = "instr";
    t.examples = {{"in0", "out0"}, {"in1", "out1"}};
    t.query = "query";
    return t;
}

} // namespace

TEST_CASE("ordering controls example render order") {
    CompiledTemplate tpl({"{instruction}\n{examples}\n{query}", "{input}={output}", "\n"});
    IclTask task = two_example_task();
    std::string swapped = tpl.assemble_prompt(task, {{1, 0}, {}});
    CHECK(swapped == "instr\nin1=out1\nin0=out0\nquery");
    CHECK(swapped.find("in1") < swapped.find("in0"));
}

TEST_CASE("identity ordering renders pool order") {
    CompiledTemplate tpl({"{instruction}\n{examples}\n{query}", "{input}={output}", "\n"});
    IclTask task = two_example_task();
    CHECK(tpl.assemble_prompt(task, {{0, 1}, {}}) == "instr\nin0=out0\nin1=out1\nquery");
}

TEST_CASE("ag news layout golden") {
    // Classification prompt layout: Title/Article/Category blocks, the
    // test item last with its Category left blank.
    IclTask task;
    task.id = "agnews";
    task.instruction =
        "Classify the following news articles into one of these categories: World, "
        "Sports, Business, Sci/Tech.";
    task.examples = {
        {"Title: \"Fears for T N pension after talks\"\n"
         "Article: \"Unions representing workers at Turner Newall say they are "
         "'disappointed' after talks with stricken parent firm Federal Mogul.\"",
         "Business"},
        {"Title: \"The Race is On: Second Private Team Sets Launch Date for Human "
         "Spaceflight (SPACE.com)\"\n"
         "Article: \"SPACE.com - TORONTO, Canada -- A second team of rocketeers "
         "competing for the $10 million Ansari X Prize, a contest for privately funded "
         "suborbital space flight, has officially announced the first launch date for "
         "its manned rocket.\"",
         "Sci/Tech"},
        {"Title: \"Giddy Phelps Touches Gold for First Time\"\n"
         "Article: \"Michael Phelps won the gold medal in the 400 individual medley "
         "and set a world record in a time of 4 minutes 8.26 seconds.\"",
         "Sports"},
    };
    task.query =
        "Title: \"Prediction Unit Helps Forecast Wildfires (AP)\"\n"
        "Article: \"AP - It's barely dawn when Mike Fitzpatrick starts his shift with "
        "a blur of colorful maps, figures and endless charts, but already he knows "
        "what the day will bring. Lightning will strike in places he expects. Winds "
        "will pick up, moist places will dry and flames will roar.\"";
    task.task_kind = TaskKind::classification;
    task.label_space = {"World", "Sports", "Business", "Sci/Tech"};

    CompiledTemplate tpl({"{instruction}\n\n{examples}\n\n{query}\nCategory:",
                          "{input}\nCategory: {output}", "\n\n"});
    std::string prompt = tpl.assemble_prompt(task, {{0, 1, 2}, {}});

    const std::string expected =
        "Classify the following news articles into one of these categories: World, "
        "Sports, Business, Sci/Tech.\n"
        "\n"
        "Title: \"Fears for T N pension after talks\"\n"
        "Article: \"Unions representing workers at Turner Newall say they are "
        "'disappointed' after talks with stricken parent firm Federal Mogul.\"\n"
        "Category: Business\n"
        "\n"
        "Title: \"The Race is On: Second Private Team Sets Launch Date for Human "
        "Spaceflight (SPACE.com)\"\n"
        "Article: \"SPACE.com - TORONTO, Canada -- A second team of rocketeers "
        "competing for the $10 million Ansari X Prize, a contest for privately funded "
        "suborbital space flight, has officially announced the first launch date for "
        "its manned rocket.\"\n"
        "Category: Sci/Tech\n"
        "\n"
        "Title: \"Giddy Phelps Touches Gold for First Time\"\n"
        "Article: \"Michael Phelps won the gold medal in the 400 individual medley "
        "and set a world record in a time of 4 minutes 8.26 seconds.\"\n"
        "Category: Sports\n"
        "\n"
        "Title: \"Prediction Unit Helps Forecast Wildfires (AP)\"\n"
        "Article: \"AP - It's barely dawn when Mike Fitzpatrick starts his shift with "
        "a blur of colorful maps, figures and endless charts, but already he knows "
        "what the day will bring. Lightning will strike in places he expects. Winds "
        "will pick up, moist places will dry and flames will roar.\"\n"
        "Category:";
    CHECK(prompt == expected);
}

TEST_CASE("example-free prompt drops every example") {
    CompiledTemplate tpl({"{instruction}\n{examples}\n{query}", "{input}={output}", "\n"});
    IclTask task = two_example_task();
    task.examples = {{"SENTINEL_IN_A", "SENTINEL_OUT_A"}, {"SENTINEL_IN_B", "SENTINEL_OUT_B"}};
    std::string prompt = tpl.assemble_example_free_prompt(task);
    CHECK(prompt.find("SENTINEL") == std::string::npos);
    CHECK(prompt.find("instr") != std::string::npos);
    CHECK(prompt.find("query") != std::string::npos);
}

TEST_CASE("example-free prompt collapses one following newline") {
    CompiledTemplate tpl({"{instruction}\n{examples}{query}", "{input}={output}", "\n"});
    IclTask task = two_example_task();
    CHECK(tpl.assemble_example_free_prompt(task) == "instr\nquery");

    CompiledTemplate tpl2({"{instruction}\n{examples}\n{query}", "{input}={output}", "\n"});
    CHECK(tpl2.assemble_example_free_prompt(task) == "instr\nquery");
}

TEST_CASE("api sequencing prompt golden and its example-free form") {
    IclTask task;
    task.id = "restgpt";
    task.instruction =
        "I will ask you to perform a task. Your job is to come up with a sequence of "
        "APIs in a comma-separated list in the format that will perform the task. "
        "Start the list with << and end it with >>. Do not include anything other "
        "than the API name. Use the APIs below to answer the question posed to you. "
        "Avoid the use of any other text unless specified.\n"
        "\n"
        "APIs Available:\n"
        "SearchPerson: GET /search/person\n"
        "PersonMovieCredits: GET /person/{person_id}/movie_credits\n"
        "SearchMovie: GET /search/movie\n"
        "MovieCredits: GET /movie/{movie_id}/credits\n"
        "MovieTopRated: GET /movie/top_rated\n"
        "SearchTv: GET /search/tv\n"
        "TvRecommendations: GET /tv/{tv_id}/recommendations";
    task.examples = {
        {"Give me the number of movies directed by Sofia Coppola.",
         "<<SearchPerson, PersonMovieCredits>>"},
        {"Who was the lead actor in the movie The Dark Knight?",
         "<<SearchMovie, MovieCredits>>"},
        {"Who directed the top-1 rated movie?", "<<MovieTopRated, MovieCredits>>"},
    };
    task.query = "I'm watching the tv series The Last Of Us and I need some more "
                 "recommendations";

    CompiledTemplate tpl({"{instruction}\n\n{examples}\nUtterance: \"{query}\"\nSequence:",
                          "Utterance: \"{input}\"\nSequence: {output}", "\n\n"});

    std::string with_examples = tpl.assemble_prompt(task, {{0, 1, 2}, {}});
    std::string expected_examples_block =
        "Utterance: \"Give me the number of movies directed by Sofia Coppola.\"\n"
        "Sequence: <<SearchPerson, PersonMovieCredits>>\n"
        "\n"
        "Utterance: \"Who was the lead actor in the movie The Dark Knight?\"\n"
        "Sequence: <<SearchMovie, MovieCredits>>\n"
        "\n"
        "Utterance: \"Who directed the top-1 rated movie?\"\n"
        "Sequence: <<MovieTopRated, MovieCredits>>\n";
    std::string expected_tail =
        "Utterance: \"I'm watching the tv series The Last Of Us and I need some more "
        "recommendations\"\nSequence:";
    CHECK(with_examples == task.instruction + "\n\n" + expected_examples_block + expected_tail);

    // Same prompt minus the whole examples block, with no dangling
    // separator where it used to sit.
    std::string example_free = tpl.assemble_example_free_prompt(task);
    CHECK(example_free == task.instruction + "\n\n" + expected_tail);
    CHECK(example_free.find("Sofia Coppola") == std::string::npos);
    CHECK(example_free.find("<<SearchPerson") == std::string::npos);
}

TEST_CASE("distinct orderings yield distinct prompts") {
    CompiledTemplate tpl({"{instruction}\n{examples}\n{query}", "{input}:{output}", ";"});
    IclTask task;
    task.id = "t";
    task.instruction = "i";
    task.query = "q";
    task.examples = {{"a", "1"}, {"b", "2"}, {"c", "3"}, {"d", "4"}};

    std::set<std::string> prompts;
    for (const auto& ordering : enumerate_orderings(4).orderings)
        prompts.insert(tpl.assemble_prompt(task, ordering));
    CHECK(prompts.size() == 24);
}

TEST_CASE("example-free prompt is ordering independent and rendering is pure") {
    CompiledTemplate tpl({"{instruction}\n{examples}\n{query}", "{input}:{output}", ";"});
    IclTask task = two_example_task();

    std::string base = tpl.assemble_example_free_prompt(task);
    for (int rep = 0; rep < 3; ++rep) CHECK(tpl.assemble_example_free_prompt(task) == base);

    Ordering ordering{{0, 1}, {}};
    std::string with = tpl.assemble_prompt(task, ordering);
    std::vector<std::thread> threads;
    std::vector<std::string> results(8);
    for (int i = 0; i < 8; ++i)
        threads.emplace_back([&, i] { results[i] = tpl.assemble_prompt(task, ordering); });
    for (auto& t : threads) t.join();
    for (const auto& r : results) CHECK(r == with);
}

TEST_CASE("escaped braces render literally") {
    CompiledTemplate tpl({"{{json}} {instruction}\n{examples}\n{query}", "{input}={output}", "\n"});
    IclTask task = two_example_task();
    std::string prompt = tpl.assemble_prompt(task, {{0, 1}, {}});
    CHECK(prompt.rfind("{json} instr", 0) == 0);
}

TEST_CASE("template validation failures") {
    auto code_of = [](PromptTemplate spec) {
        try {
            CompiledTemplate tpl(std::move(spec));
            return Errc::ok;
        } catch (const Error& e) {
            return e.code();
        }
    };
    CHECK(code_of({"{instruction}\n{query}", "{input}={output}", "\n"}) == Errc::template_error);
    CHECK(code_of({"{instruction}{examples}{query}{query}", "{input}={output}", "\n"}) ==
          Errc::template_error);
    CHECK(code_of({"{instruction}{examples}{query}{bogus}", "{input}={output}", "\n"}) ==
          Errc::template_error);
    CHECK(code_of({"{instruction}{examples}{query}", "{input}", "\n"}) == Errc::template_error);
    CHECK(code_of({"{instruction}{examples}{query} }", "{input}={output}", "\n"}) ==
          Errc::template_error);
    CHECK(code_of({"{instruction}{examples}{query} {", "{input}={output}", "\n"}) ==
          Errc::template_error);
    CHECK(code_of({"{instruction}{examples}{query}", "{input}{output}", ""}) == Errc::ok);
}

TEST_CASE("invalid orderings are rejected") {
    CompiledTemplate tpl({"{instruction}{examples}{query}", "{input}={output}", "\n"});
    IclTask task = two_example_task();
    auto code_of = [&](std::vector<std::size_t> indices) {
        try {
            tpl.assemble_prompt(task, {std::move(indices), {}});
            return Errc::ok;
        } catch (const Error& e) {
            return e.code();
        }
    };
    CHECK(code_of({0, 0}) == Errc::invalid_ordering);
    CHECK(code_of({0}) == Errc::invalid_ordering);
    CHECK(code_of({0, 2}) == Errc::invalid_ordering);
    CHECK(code_of({1, 0}) == Errc::ok);
}

TEST_CASE("task and example validation") {
    CHECK_THROWS_AS(validate_example({"  ", "x"}), Error);
    CHECK_THROWS_AS(validate_example({"x", "\n\t"}), Error);

    IclTask task = two_example_task();
    task.task_kind = TaskKind::classification;
    CHECK_THROWS_AS(validate_task(task), Error); // empty label space
    task.label_space = {"yes", "no"};
    task.ground_truth = "maybe";
    CHECK_THROWS_AS(validate_task(task), Error); // ground truth outside labels
    task.ground_truth = "yes";
    CHECK_NOTHROW(validate_task(task));
}
