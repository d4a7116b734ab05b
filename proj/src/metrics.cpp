#include "metrics.hpp"

#include <algorithm>
#include <unordered_map>

#include "prompt.hpp" // trim_copy

namespace optiseq {

ApiSequence parse_api_sequence(const std::string& text) {
    std::string span = text;
    std::size_t open = text.find("<<");
    if (open != std::string::npos) {
        std::size_t close = text.find(">>", open + 2);
        if (close != std::string::npos) span = text.substr(open + 2, close - open - 2);
    }

    ApiSequence seq;
    std::size_t pos = 0;
    while (pos <= span.size()) {
        std::size_t comma = span.find(',', pos);
        std::string piece = span.substr(pos, comma == std::string::npos ? std::string::npos
                                                                        : comma - pos);
        std::string name = trim_copy(piece);
        if (!name.empty()) seq.names.push_back(std::move(name));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (seq.names.empty())
        fail(Errc::empty_sequence, "no API names found in '" + text + "'");
    return seq;
}

MetricTriple sequence_metrics(const ApiSequence& pred, const ApiSequence& gold) {
    if (gold.names.empty()) fail(Errc::empty_gold, "gold sequence is empty");

    // Multiset overlap so a duplicated correct name is not over-credited.
    std::unordered_map<std::string, std::size_t> gold_counts;
    for (const auto& name : gold.names) ++gold_counts[name];
    std::size_t hits = 0;
    for (const auto& name : pred.names) {
        auto it = gold_counts.find(name);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++hits;
        }
    }

    MetricTriple m;
    if (!pred.names.empty())
        m.precision = 100.0 * static_cast<double>(hits) / static_cast<double>(pred.names.size());
    m.recall = 100.0 * static_cast<double>(hits) / static_cast<double>(gold.names.size());
    m.accuracy = pred.names == gold.names ? 100.0 : 0.0;
    return m;
}

double classification_score(const std::string& pred_label, const std::string& gold_label) {
    return trim_copy(pred_label) == trim_copy(gold_label) ? 100.0 : 0.0;
}

std::map<std::string, MethodAggregate> aggregate(const std::vector<InstanceScore>& records) {
    if (records.empty()) fail(Errc::empty_record_set, "no records to aggregate");

    struct Acc {
        std::size_t count = 0;
        std::size_t correct = 0;
        std::size_t pr_count = 0;
        double precision_sum = 0.0;
        double recall_sum = 0.0;
    };
    std::map<std::string, Acc> accs;
    for (const auto& r : records) {
        Acc& a = accs[r.method];
        ++a.count;
        if (r.accuracy == 100.0) ++a.correct;
        if (r.precision && r.recall) {
            ++a.pr_count;
            a.precision_sum += *r.precision;
            a.recall_sum += *r.recall;
        }
    }

    std::map<std::string, MethodAggregate> out;
    for (const auto& [method, a] : accs) {
        MethodAggregate agg;
        agg.count = a.count;
        agg.accuracy = 100.0 * static_cast<double>(a.correct) / static_cast<double>(a.count);
        if (a.pr_count > 0) {
            agg.mean_precision = a.precision_sum / static_cast<double>(a.pr_count);
            agg.mean_recall = a.recall_sum / static_cast<double>(a.pr_count);
        }
        out[method] = agg;
    }
    return out;
}

} // namespace optiseq
