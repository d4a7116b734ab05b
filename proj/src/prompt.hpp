#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"

namespace optiseq {

std::string trim_copy(const std::string& s);

/// One in-context demonstration: an input and its expected output.
/// Both must be non-empty after whitespace trimming; the stored text is
/// kept verbatim (log-probabilities are whitespace-sensitive).
struct Example {
    std::string input;
    std::string output;
};

void validate_example(const Example& ex);

enum class TaskKind { sequence_generation, classification };

const char* task_kind_name(TaskKind k);
TaskKind task_kind_from_name(const std::string& name);

/// A single test instance: instruction, the pool of candidate examples,
/// the query to answer, and (optionally) the expected answer.
struct IclTask {
    std::string id;
    std::string instruction;
    std::vector<Example> examples;
    std::string query;
    std::optional<std::string> ground_truth;
    TaskKind task_kind = TaskKind::sequence_generation;
    std::vector<std::string> label_space;
};

void validate_task(const IclTask& task);

enum class OrderingKind { exhaustive, anchored, topk, random };

struct OrderingSource {
    OrderingKind kind = OrderingKind::exhaustive;
    // Lexicographic rank for exhaustive/anchored plans, the draw seed for
    // random. Unused for topk.
    std::uint64_t value = 0;
};

/// A permutation of example-pool indices plus where it came from.
struct Ordering {
    std::vector<std::size_t> indices;
    OrderingSource source;
};

// Throws invalid_ordering unless indices is a permutation of 0..n-1.
void validate_ordering(const std::vector<std::size_t>& indices, std::size_t n);

/// Few-shot prompt layout. `body` must contain {instruction}, {examples}
/// and {query} exactly once each; `example_format` must contain {input}
/// and {output} exactly once each. Literal braces are written doubled
/// ("{{" / "}}").
struct PromptTemplate {
    std::string body;
    std::string example_format = "{input}\n{output}";
    std::string example_separator = "\n";
};

// Parses and validates at construction so rendering cannot fail on
// malformed templates later.
class CompiledTemplate {
  public:
    explicit CompiledTemplate(PromptTemplate spec);

    const PromptTemplate& spec() const { return spec_; }

    std::string assemble_prompt(const IclTask& task, const Ordering& ordering) const;

    // Same layout with the examples slot removed; when the byte right
    // after {examples} in the body is a newline, that newline is dropped
    // too, so no blank section header is left behind.
    std::string assemble_example_free_prompt(const IclTask& task) const;

  private:
    enum class Slot { literal, instruction, examples, query, input, output };

    struct Segment {
        Slot slot;
        std::string text; // literal text; empty for placeholder slots
    };

    static std::vector<Segment> parse_segments(
        const std::string& text, const std::vector<std::pair<std::string, Slot>>& names,
        const char* what);

    std::string render_examples(const IclTask& task, const Ordering& ordering) const;
    std::string render_body(const IclTask& task, const std::string& examples_text,
                            bool drop_examples_slot) const;

    PromptTemplate spec_;
    std::vector<Segment> body_;
    std::vector<Segment> example_;
};

// Loads a template file: a JSON object with keys "body",
// "example_format" and "example_separator".
PromptTemplate load_template_file(const std::string& path);

/// One generated output together with the ordering that produced it and
/// the log-probabilities needed for selection.
struct Candidate {
    Ordering ordering;
    std::string output_text;
    std::vector<std::string> output_tokens;
    std::vector<double> gen_logprobs;   // nats, one per output token
    double gen_logprob_total = 0.0;     // sum of gen_logprobs
    std::optional<double> example_free_logprob; // filled by rescoring
};

} // namespace optiseq
