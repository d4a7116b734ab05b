#include "prompt.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace optiseq {

std::string trim_copy(const std::string& s) {
    auto is_space = [](unsigned char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    };
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

void validate_example(const Example& ex) {
    if (trim_copy(ex.input).empty())
        fail(Errc::invalid_argument, "example input is empty");
    if (trim_copy(ex.output).empty())
        fail(Errc::invalid_argument, "example output is empty");
}

const char* task_kind_name(TaskKind k) {
    return k == TaskKind::classification ? "classification" : "sequence_generation";
}

TaskKind task_kind_from_name(const std::string& name) {
    if (name == "sequence_generation") return TaskKind::sequence_generation;
    if (name == "classification") return TaskKind::classification;
    fail(Errc::schema_error, "unknown task_kind '" + name + "'");
}

void validate_task(const IclTask& task) {
    if (task.id.empty()) fail(Errc::invalid_argument, "task id is empty");
    if (task.examples.empty()) fail(Errc::invalid_argument, "task '" + task.id + "' has no examples");
    for (const auto& ex : task.examples) validate_example(ex);
    if (trim_copy(task.query).empty())
        fail(Errc::invalid_argument, "task '" + task.id + "' has an empty query");
    if (task.task_kind == TaskKind::classification) {
        if (task.label_space.empty())
            fail(Errc::invalid_argument,
                 "classification task '" + task.id + "' has an empty label_space");
        if (task.ground_truth) {
            const auto& gt = *task.ground_truth;
            if (std::find(task.label_space.begin(), task.label_space.end(), gt) ==
                task.label_space.end())
                fail(Errc::invalid_argument, "ground_truth '" + gt + "' of task '" +
                                                 task.id + "' is not in label_space");
        }
    }
}

void validate_ordering(const std::vector<std::size_t>& indices, std::size_t n) {
    if (indices.size() != n)
        fail(Errc::invalid_ordering, "ordering has " + std::to_string(indices.size()) +
                                         " indices, expected " + std::to_string(n));
    std::vector<bool> seen(n, false);
    for (std::size_t idx : indices) {
        if (idx >= n)
            fail(Errc::invalid_ordering, "ordering index " + std::to_string(idx) +
                                             " out of range for " + std::to_string(n) +
                                             " examples");
        if (seen[idx])
            fail(Errc::invalid_ordering, "ordering repeats index " + std::to_string(idx));
        seen[idx] = true;
    }
}

std::vector<CompiledTemplate::Segment> CompiledTemplate::parse_segments(
    const std::string& text, const std::vector<std::pair<std::string, Slot>>& names,
    const char* what) {
    std::vector<Segment> out;
    std::string lit;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '{') {
            if (i + 1 < text.size() && text[i + 1] == '{') {
                lit += '{';
                i += 2;
                continue;
            }
            std::size_t close = text.find('}', i + 1);
            if (close == std::string::npos)
                fail(Errc::template_error,
                     std::string(what) + ": unterminated placeholder at byte " +
                         std::to_string(i));
            std::string name = text.substr(i + 1, close - i - 1);
            auto it = std::find_if(names.begin(), names.end(),
                                   [&](const auto& p) { return p.first == name; });
            if (it == names.end())
                fail(Errc::template_error,
                     std::string(what) + ": unknown placeholder {" + name + "}");
            if (!lit.empty()) {
                out.push_back({Slot::literal, std::move(lit)});
                lit.clear();
            }
            out.push_back({it->second, ""});
            i = close + 1;
        } else if (c == '}') {
            if (i + 1 < text.size() && text[i + 1] == '}') {
                lit += '}';
                i += 2;
                continue;
            }
            fail(Errc::template_error, std::string(what) + ": stray '}' at byte " +
                                           std::to_string(i) +
                                           " (write literal braces doubled)");
        } else {
            lit += c;
            ++i;
        }
    }
    if (!lit.empty()) out.push_back({Slot::literal, std::move(lit)});
    return out;
}

CompiledTemplate::CompiledTemplate(PromptTemplate spec) : spec_(std::move(spec)) {
    body_ = parse_segments(spec_.body,
                           {{"instruction", Slot::instruction},
                            {"examples", Slot::examples},
                            {"query", Slot::query}},
                           "template body");
    example_ = parse_segments(spec_.example_format,
                              {{"input", Slot::input}, {"output", Slot::output}},
                              "example format");

    auto count = [](const std::vector<Segment>& segs, Slot s) {
        return std::count_if(segs.begin(), segs.end(),
                             [&](const Segment& g) { return g.slot == s; });
    };
    auto require_once = [&](long n, const char* what, const char* where) {
        if (n != 1)
            fail(Errc::template_error, std::string(where) + " must contain {" + what +
                                           "} exactly once (found " + std::to_string(n) + ")");
    };
    require_once(count(body_, Slot::instruction), "instruction", "template body");
    require_once(count(body_, Slot::examples), "examples", "template body");
    require_once(count(body_, Slot::query), "query", "template body");
    require_once(count(example_, Slot::input), "input", "example format");
    require_once(count(example_, Slot::output), "output", "example format");
}

std::string CompiledTemplate::render_examples(const IclTask& task,
                                              const Ordering& ordering) const {
    std::string out;
    bool first = true;
    for (std::size_t idx : ordering.indices) {
        if (!first) out += spec_.example_separator;
        first = false;
        const Example& ex = task.examples[idx];
        for (const auto& seg : example_) {
            switch (seg.slot) {
                case Slot::literal: out += seg.text; break;
                case Slot::input: out += ex.input; break;
                case Slot::output: out += ex.output; break;
                default: break;
            }
        }
    }
    return out;
}

std::string CompiledTemplate::render_body(const IclTask& task,
                                          const std::string& examples_text,
                                          bool drop_examples_slot) const {
    std::string out;
    bool skip_next_newline = false;
    for (const auto& seg : body_) {
        switch (seg.slot) {
            case Slot::literal: {
                std::size_t from = 0;
                if (skip_next_newline && !seg.text.empty() && seg.text.front() == '\n') from = 1;
                skip_next_newline = false;
                out.append(seg.text, from, std::string::npos);
                break;
            }
            case Slot::instruction:
                skip_next_newline = false;
                out += task.instruction;
                break;
            case Slot::query:
                skip_next_newline = false;
                out += task.query;
                break;
            case Slot::examples:
                if (drop_examples_slot) {
                    skip_next_newline = true;
                } else {
                    out += examples_text;
                    skip_next_newline = false;
                }
                break;
            default:
                break;
        }
    }
    return out;
}

std::string CompiledTemplate::assemble_prompt(const IclTask& task,
                                              const Ordering& ordering) const {
    validate_ordering(ordering.indices, task.examples.size());
    return render_body(task, render_examples(task, ordering), /*drop_examples_slot=*/false);
}

std::string CompiledTemplate::assemble_example_free_prompt(const IclTask& task) const {
    return render_body(task, "", /*drop_examples_slot=*/true);
}

PromptTemplate load_template_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open template file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, "template file '" + path + "': " + e.what());
    }
    if (!j.is_object() || !j.contains("body") || !j["body"].is_string())
        fail(Errc::schema_error, "template file '" + path + "' needs a string field 'body'");
    PromptTemplate t;
    t.body = j["body"].get<std::string>();
    if (j.contains("example_format")) t.example_format = j["example_format"].get<std::string>();
    if (j.contains("example_separator"))
        t.example_separator = j["example_separator"].get<std::string>();
    return t;
}

} // namespace optiseq
