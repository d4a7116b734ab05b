#pragma once

#include <string>
#include <vector>

#include "prompt.hpp"

namespace optiseq {

/// Loads a line-delimited JSON dataset: one task object per line with
/// fields {id, instruction, examples:[{input, output}], query,
/// ground_truth?, task_kind, label_space?}. Blank lines are skipped;
/// every error names the offending line.
std::vector<IclTask> load_dataset(const std::string& path);

IclTask parse_task_line(const std::string& line, std::size_t line_number);

} // namespace optiseq
