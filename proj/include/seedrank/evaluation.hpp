#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seedrank/corpus_io.hpp"

namespace seedrank {

inline constexpr std::array<std::size_t, 3> kDefaultCutoffs{10, 100, 1000};

// Named metric values in insertion order (MAP, P@k..., R@k..., nDCG@k..., LastRel%, WSS).
class MetricSet {
public:
    void set(std::string name, double value);
    std::optional<double> get(std::string_view name) const;
    double at(std::string_view name) const;
    std::span<const std::pair<std::string, double>> values() const noexcept { return values_; }
    bool empty() const noexcept { return values_.empty(); }

    bool operator==(const MetricSet&) const = default;

private:
    std::vector<std::pair<std::string, double>> values_;
};

// All metrics read the run in rank order; scores are ignored. A document is
// relevant when its grade is >= 1.

// Throws UndefinedMetric when the qrels hold no relevant documents.
double average_precision(std::span<const RunEntry> run, const Qrels& qrels);
// Runs shorter than k count the missing positions as non-relevant.
double precision_at(std::span<const RunEntry> run, const Qrels& qrels, std::size_t k);
double recall_at(std::span<const RunEntry> run, const Qrels& qrels, std::size_t k);
// Binary gains, log2(r + 1) discount; 0 when the ideal DCG is 0.
double ndcg_at(std::span<const RunEntry> run, const Qrels& qrels, std::size_t k);
// Rank of the last relevant document over run length. Throws UndefinedMetric
// when no relevant document is retrieved.
double last_rel_percent(std::span<const RunEntry> run, const Qrels& qrels);
double wss(std::span<const RunEntry> run, const Qrels& qrels);

// Every metric for one run. LastRel% and WSS are left out when the run retrieves
// no relevant document.
MetricSet evaluate(std::span<const RunEntry> run, const Qrels& qrels,
                   std::span<const std::size_t> cutoffs = kDefaultCutoffs);

// Per-topic metrics of a multi-topic run file, by topic_id. Topics without
// relevant judgments are skipped.
std::map<std::string, MetricSet> evaluate_runs(std::span<const RunEntry> entries,
                                               const std::map<std::string, Qrels>& qrels,
                                               std::span<const std::size_t> cutoffs = kDefaultCutoffs);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    std::size_t df = 0;
};

// Two-tailed paired Student's t-test. Throws DegenerateTest when the differences
// have zero variance, Contract on mismatched or too-short inputs.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);
double bonferroni(double p, std::size_t comparisons);

}  // namespace seedrank
