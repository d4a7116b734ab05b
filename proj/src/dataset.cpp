#include "dataset.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace optiseq {

using nlohmann::json;

namespace {

[[noreturn]] void schema_fail(std::size_t line, const std::string& what) {
    fail(Errc::schema_error, "line " + std::to_string(line) + ": " + what);
}

std::string require_string(const json& j, const char* field, std::size_t line,
                           bool allow_empty = false) {
    if (!j.contains(field)) schema_fail(line, std::string("missing field '") + field + "'");
    if (!j[field].is_string())
        schema_fail(line, std::string("field '") + field + "' must be a string");
    auto v = j[field].get<std::string>();
    if (!allow_empty && trim_copy(v).empty())
        schema_fail(line, std::string("field '") + field + "' is empty");
    return v;
}

} // namespace

IclTask parse_task_line(const std::string& line, std::size_t line_number) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        fail(Errc::parse_error, "line " + std::to_string(line_number) + ": " + e.what());
    }
    if (!j.is_object()) schema_fail(line_number, "record is not a JSON object");

    IclTask task;
    task.id = require_string(j, "id", line_number);
    task.instruction = require_string(j, "instruction", line_number, /*allow_empty=*/true);
    task.query = require_string(j, "query", line_number);

    if (!j.contains("examples") || !j["examples"].is_array() || j["examples"].empty())
        schema_fail(line_number, "field 'examples' must be a non-empty array");
    for (const auto& e : j["examples"]) {
        if (!e.is_object() || !e.contains("input") || !e.contains("output") ||
            !e["input"].is_string() || !e["output"].is_string())
            schema_fail(line_number, "each example needs string fields 'input' and 'output'");
        Example ex{e["input"].get<std::string>(), e["output"].get<std::string>()};
        if (trim_copy(ex.input).empty() || trim_copy(ex.output).empty())
            schema_fail(line_number, "example input/output must be non-empty");
        task.examples.push_back(std::move(ex));
    }

    if (j.contains("ground_truth")) {
        if (!j["ground_truth"].is_string())
            schema_fail(line_number, "field 'ground_truth' must be a string");
        task.ground_truth = j["ground_truth"].get<std::string>();
    }

    try {
        task.task_kind = task_kind_from_name(require_string(j, "task_kind", line_number));
    } catch (const Error& e) {
        schema_fail(line_number, e.what());
    }

    if (j.contains("label_space")) {
        if (!j["label_space"].is_array())
            schema_fail(line_number, "field 'label_space' must be an array");
        for (const auto& l : j["label_space"]) {
            if (!l.is_string() || l.get<std::string>().empty())
                schema_fail(line_number, "label_space entries must be non-empty strings");
            task.label_space.push_back(l.get<std::string>());
        }
    }

    try {
        validate_task(task);
    } catch (const Error& e) {
        schema_fail(line_number, e.what());
    }
    return task;
}

std::vector<IclTask> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open dataset file '" + path + "'");

    std::vector<IclTask> tasks;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim_copy(line).empty()) continue;
        IclTask task = parse_task_line(line, line_number);
        if (!seen_ids.insert(task.id).second)
            fail(Errc::schema_error,
                 "line " + std::to_string(line_number) + ": duplicate task id '" + task.id + "'");
        tasks.push_back(std::move(task));
    }
    return tasks;
}

} // namespace optiseq
