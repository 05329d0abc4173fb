#include "seedrank/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "seedrank/error.hpp"

namespace seedrank {

void MetricSet::set(std::string name, double value) {
    for (auto& [n, v] : values_) {
        if (n == name) {
            v = value;
            return;
        }
    }
    values_.emplace_back(std::move(name), value);
}

std::optional<double> MetricSet::get(std::string_view name) const {
    for (const auto& [n, v] : values_) {
        if (n == name) return v;
    }
    return std::nullopt;
}

double MetricSet::at(std::string_view name) const {
    auto v = get(name);
    if (!v) throw Error(ErrorKind::UndefinedMetric, "metric " + std::string(name) + " is not set");
    return *v;
}

namespace {

// Relevance flags in rank order.
std::vector<bool> relevance_by_rank(std::span<const RunEntry> run, const Qrels& qrels) {
    std::vector<const RunEntry*> sorted;
    sorted.reserve(run.size());
    for (const auto& e : run) sorted.push_back(&e);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const RunEntry* a, const RunEntry* b) { return a->rank < b->rank; });
    std::vector<bool> rel;
    rel.reserve(sorted.size());
    for (const auto* e : sorted) {
        auto it = qrels.find(e->doc_id);
        rel.push_back(it != qrels.end() && it->second >= 1);
    }
    return rel;
}

std::size_t total_relevant(const Qrels& qrels) {
    return static_cast<std::size_t>(
        std::count_if(qrels.begin(), qrels.end(), [](const auto& kv) { return kv.second >= 1; }));
}

std::size_t relevant_in_top(const std::vector<bool>& rel, std::size_t k) {
    return static_cast<std::size_t>(std::count(rel.begin(), rel.begin() + std::min(k, rel.size()), true));
}

void require_cutoff(std::size_t k) {
    if (k == 0) throw Error(ErrorKind::Contract, "cutoff must be at least 1");
}

std::size_t last_relevant_rank(const std::vector<bool>& rel) {
    for (std::size_t i = rel.size(); i > 0; --i) {
        if (rel[i - 1]) return i;
    }
    return 0;
}

}  // namespace

double average_precision(std::span<const RunEntry> run, const Qrels& qrels) {
    const auto r = total_relevant(qrels);
    if (r == 0) throw Error(ErrorKind::UndefinedMetric, "average precision with no relevant documents");
    auto rel = relevance_by_rank(run, qrels);
    double sum = 0.0;
    std::size_t found = 0;
    for (std::size_t i = 0; i < rel.size(); ++i) {
        if (rel[i]) sum += static_cast<double>(++found) / static_cast<double>(i + 1);
    }
    return sum / static_cast<double>(r);
}

double precision_at(std::span<const RunEntry> run, const Qrels& qrels, std::size_t k) {
    require_cutoff(k);
    return static_cast<double>(relevant_in_top(relevance_by_rank(run, qrels), k)) / static_cast<double>(k);
}

double recall_at(std::span<const RunEntry> run, const Qrels& qrels, std::size_t k) {
    require_cutoff(k);
    const auto r = total_relevant(qrels);
    if (r == 0) throw Error(ErrorKind::UndefinedMetric, "recall with no relevant documents");
    return static_cast<double>(relevant_in_top(relevance_by_rank(run, qrels), k)) / static_cast<double>(r);
}

double ndcg_at(std::span<const RunEntry> run, const Qrels& qrels, std::size_t k) {
    require_cutoff(k);
    auto rel = relevance_by_rank(run, qrels);
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, rel.size()); ++i) {
        if (rel[i]) dcg += 1.0 / std::log2(static_cast<double>(i + 2));
    }
    double idcg = 0.0;
    const auto ideal = std::min(k, total_relevant(qrels));
    for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i + 2));
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

double last_rel_percent(std::span<const RunEntry> run, const Qrels& qrels) {
    auto rel = relevance_by_rank(run, qrels);
    auto last = last_relevant_rank(rel);
    if (last == 0) throw Error(ErrorKind::UndefinedMetric, "no relevant document retrieved");
    return static_cast<double>(last) / static_cast<double>(rel.size());
}

double wss(std::span<const RunEntry> run, const Qrels& qrels) {
    return 1.0 - last_rel_percent(run, qrels);
}

MetricSet evaluate(std::span<const RunEntry> run, const Qrels& qrels, std::span<const std::size_t> cutoffs) {
    MetricSet m;
    m.set("MAP", average_precision(run, qrels));
    for (auto k : cutoffs) m.set("P@" + std::to_string(k), precision_at(run, qrels, k));
    for (auto k : cutoffs) m.set("R@" + std::to_string(k), recall_at(run, qrels, k));
    for (auto k : cutoffs) m.set("nDCG@" + std::to_string(k), ndcg_at(run, qrels, k));
    auto rel = relevance_by_rank(run, qrels);
    if (last_relevant_rank(rel) > 0) {
        const double lr = last_rel_percent(run, qrels);
        m.set("LastRel%", lr);
        m.set("WSS", 1.0 - lr);
    }
    return m;
}

std::map<std::string, MetricSet> evaluate_runs(std::span<const RunEntry> entries,
                                               const std::map<std::string, Qrels>& qrels,
                                               std::span<const std::size_t> cutoffs) {
    std::map<std::string, std::vector<RunEntry>> by_topic;
    for (const auto& e : entries) by_topic[e.topic_id].push_back(e);
    std::map<std::string, MetricSet> out;
    for (const auto& [topic, run] : by_topic) {
        auto q = qrels.find(topic);
        if (q == qrels.end() || total_relevant(q->second) == 0) continue;
        out.emplace(topic, evaluate(run, q->second, cutoffs));
    }
    return out;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorKind::Contract, "paired t-test needs equal-length samples");
    if (a.size() < 2) throw Error(ErrorKind::Contract, "paired t-test needs at least two pairs");
    const auto n = static_cast<double>(a.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i] - mean;
        ss += d * d;
    }
    const double var = ss / (n - 1.0);
    if (!(var > 0.0)) throw Error(ErrorKind::DegenerateTest, "differences have zero variance");
    TTestResult res;
    res.df = a.size() - 1;
    res.t = mean / std::sqrt(var / n);
    boost::math::students_t dist(static_cast<double>(res.df));
    res.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(res.t))));
    return res;
}

double bonferroni(double p, std::size_t comparisons) {
    if (comparisons == 0) throw Error(ErrorKind::Contract, "bonferroni needs at least one comparison");
    return std::min(1.0, p * static_cast<double>(comparisons));
}

}  // namespace seedrank
