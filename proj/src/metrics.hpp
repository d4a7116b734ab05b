#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"

namespace optiseq {

/// Ordered list of API names; duplicates and order are preserved.
struct ApiSequence {
    std::vector<std::string> names;
};

/// Per-instance metrics in percent. Accuracy is all-or-nothing (0 or
/// 100); precision and recall ignore order.
struct MetricTriple {
    double precision = 0.0;
    double recall = 0.0;
    double accuracy = 0.0;
};

/// Pulls the first "<<...>>" span if present (otherwise the whole text),
/// splits on commas, trims each name and drops empty segments. Names are
/// compared case-sensitively downstream.
ApiSequence parse_api_sequence(const std::string& text);

/// Precision = overlap/|pred|, recall = overlap/|gold| with multiset
/// overlap ignoring order; accuracy = 100 only on an exact element-wise
/// match. All in percent, full precision (rounding is presentation-only).
MetricTriple sequence_metrics(const ApiSequence& pred, const ApiSequence& gold);

/// 100 when the trimmed labels match exactly, else 0.
double classification_score(const std::string& pred_label, const std::string& gold_label);

struct InstanceScore {
    std::string method;
    double accuracy = 0.0;              // 0 or 100
    std::optional<double> precision;    // sequence tasks only
    std::optional<double> recall;
};

struct MethodAggregate {
    std::size_t count = 0;
    double accuracy = 0.0;              // percent of instances at 100
    std::optional<double> mean_precision;
    std::optional<double> mean_recall;
};

/// Per-method means; errors on an empty record set.
std::map<std::string, MethodAggregate> aggregate(const std::vector<InstanceScore>& records);

} // namespace optiseq
