#include "seedrank/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <thread>
#include <unordered_set>

#include "seedrank/error.hpp"
#include "strings.hpp"

namespace seedrank {

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> workers;
        for (std::size_t w = 0; w < std::min(threads, n); ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// ---------------------------------------------------------------------------
// Seed groups

std::size_t group_width(std::size_t pool_size, double fraction) {
    auto w = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pool_size) - 1e-12));
    return std::max<std::size_t>(2, w);
}

std::vector<SeedGroup> make_groups(const std::string& topic_id, std::span<const std::string> seed_pool,
                                   double fraction) {
    if (seed_pool.size() < 3) {
        throw Error(ErrorKind::InsufficientSeeds, "topic " + topic_id + ": " + std::to_string(seed_pool.size()) +
                                                      " seed studies, multi-seed grouping needs at least 3");
    }
    const auto w = group_width(seed_pool.size(), fraction);
    std::vector<SeedGroup> groups;
    for (std::size_t offset = 0; offset + w <= seed_pool.size(); ++offset) {
        SeedGroup g{topic_id, {}, offset};
        g.member_ids.assign(seed_pool.begin() + static_cast<std::ptrdiff_t>(offset),
                            seed_pool.begin() + static_cast<std::ptrdiff_t>(offset + w));
        groups.push_back(std::move(g));
    }
    return groups;
}

Document concat_group(const SeedGroup& group, const Corpus& corpus) {
    Document out;
    for (const auto& id : group.member_ids) {
        auto it = corpus.find(id);
        if (it == corpus.end()) throw Error(ErrorKind::Contract, "group member " + id + " is not in the corpus");
        if (!out.doc_id.empty()) {
            out.doc_id += '+';
            out.title += ' ';
            out.abstract += ' ';
        }
        out.doc_id += id;
        out.title += it->second.title;
        out.abstract += it->second.abstract;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

void ExperimentReport::add(const std::string& topic_id, const std::string& unit, const MetricSet& metrics) {
    for (const auto& [name, value] : metrics.values()) rows_.push_back({topic_id, unit, name, value});
    units_[topic_id].push_back(metrics);
}

namespace {

MetricSet mean_of(std::span<const MetricSet> sets) {
    std::vector<std::string> names;
    for (const auto& s : sets) {
        for (const auto& [n, v] : s.values()) {
            if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
        }
    }
    MetricSet out;
    for (const auto& n : names) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& s : sets) {
            if (auto v = s.get(n)) {
                sum += *v;
                ++count;
            }
        }
        out.set(n, sum / static_cast<double>(count));
    }
    return out;
}

}  // namespace

void ExperimentReport::finalize() {
    topic_means_.clear();
    lastrel_excluded_.clear();
    std::vector<MetricSet> means;
    for (const auto& [topic, sets] : units_) {
        auto m = mean_of(sets);
        topic_means_[topic] = m;
        means.push_back(std::move(m));
        lastrel_excluded_[topic] = static_cast<std::size_t>(std::count_if(
            sets.begin(), sets.end(), [](const MetricSet& s) { return !s.get("LastRel%"); }));
    }
    overall_ = mean_of(means);
}

std::string ExperimentReport::to_csv() const {
    std::string out = "topic_id,seed_or_window,metric,value\n";
    auto line = [&](const std::string& topic, const std::string& unit, const std::string& metric, double v) {
        out += topic + ',' + unit + ',' + metric + ',' + detail::format_double(v) + '\n';
    };
    for (const auto& r : rows_) line(r.topic_id, r.unit, r.metric, r.value);
    for (const auto& [topic, m] : topic_means_) {
        for (const auto& [n, v] : m.values()) line(topic, "mean", n, v);
    }
    for (const auto& [n, v] : overall_.values()) line("all", "mean", n, v);
    return out;
}

Qrels restrict_qrels(const Qrels& qrels, std::span<const RunEntry> run) {
    Qrels out;
    for (const auto& e : run) {
        if (auto it = qrels.find(e.doc_id); it != qrels.end()) out.emplace(it->first, it->second);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Single-seed leave-one-out

SingleResult loocv_single(const RankingContext& ctx, std::span<const Topic> topics, Method method,
                          Representation repr, const ScoringParams& params, std::size_t threads) {
    struct Unit {
        const Topic* topic;
        std::string seed;
    };
    std::vector<Unit> units;
    for (const auto& topic : topics) {
        auto pool = topic.relevant_ids();
        if (pool.size() < 2) {
            throw Error(ErrorKind::InsufficientSeeds, "topic " + topic.topic_id + " has " +
                                                          std::to_string(pool.size()) +
                                                          " relevant studies, leave-one-out needs at least 2");
        }
        for (auto& id : pool) units.push_back({&topic, std::move(id)});
    }

    std::vector<RankedRun> runs(units.size());
    std::vector<MetricSet> metrics(units.size());
    parallel_for(units.size(), threads, [&](std::size_t i) {
        const auto& u = units[i];
        const std::string members[] = {u.seed};
        auto seed = make_seed(*ctx.corpus, members);
        runs[i] = rank(ctx, *u.topic, seed, method, repr, params);
        metrics[i] = evaluate(runs[i].entries, restrict_qrels(u.topic->qrels(), runs[i].entries));
    });

    SingleResult out;
    for (std::size_t i = 0; i < units.size(); ++i) {
        out.report.add(units[i].topic->topic_id, units[i].seed, metrics[i]);
        out.seeds.push_back(units[i].seed);
    }
    out.report.finalize();
    out.runs = std::move(runs);
    return out;
}

// ---------------------------------------------------------------------------
// Multi-seed

RankedRun multi_sdr(const RankingContext& ctx, const Topic& topic, const SeedGroup& group, Method method,
                    Representation repr, const ScoringParams& params) {
    auto p = params;
    p.undersample = params.undersample || group.member_ids.size() > 1;
    auto seed = make_seed(*ctx.corpus, group.member_ids);
    return rank(ctx, topic, seed, method, repr, p);
}

OracleSelection oracle_single(const Topic& topic, const SeedGroup& group,
                              const std::map<std::string, RankedRun>& single_runs) {
    const auto qrels = topic.qrels();
    OracleSelection best;
    bool have = false;
    for (const auto& member : group.member_ids) {
        auto it = single_runs.find(member);
        if (it == single_runs.end()) {
            throw Error(ErrorKind::Contract, "no single-seed run for group member " + member);
        }
        const auto& run = it->second.entries;
        const double ap = average_precision(run, restrict_qrels(qrels, run));
        if (!have || ap > best.seed_ap || (ap == best.seed_ap && member < best.seed_id)) {
            best.seed_id = member;
            best.seed_ap = ap;
            have = true;
        }
    }

    const auto& chosen = single_runs.at(best.seed_id);
    std::unordered_set<std::string> drop(group.member_ids.begin(), group.member_ids.end());
    best.run.topic_id = chosen.topic_id;
    best.run.tag = chosen.tag;
    std::size_t r = 0;
    for (const auto& e : chosen.entries) {
        if (drop.count(e.doc_id)) continue;
        auto copy = e;
        copy.rank = ++r;
        best.run.entries.push_back(std::move(copy));
    }
    return best;
}

MultiResult run_multi(const RankingContext& ctx, std::span<const Topic> topics, Method method,
                      Representation repr, const ScoringParams& params, double fraction, std::size_t threads) {
    MultiResult out;
    std::vector<const Topic*> group_topic;
    for (const auto& topic : topics) {
        auto pool = topic.relevant_ids();
        for (auto& g : make_groups(topic.topic_id, pool, fraction)) {
            out.groups.push_back(std::move(g));
            group_topic.push_back(&topic);
        }
    }

    auto single = loocv_single(ctx, topics, method, repr, params, threads);
    std::map<std::string, std::map<std::string, RankedRun>> single_by_topic;
    for (std::size_t i = 0; i < single.runs.size(); ++i) {
        single_by_topic[single.runs[i].topic_id].emplace(single.seeds[i], std::move(single.runs[i]));
    }

    const auto n = out.groups.size();
    out.multi_runs.resize(n);
    out.oracle.resize(n);
    std::vector<MetricSet> multi_metrics(n), oracle_metrics(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const auto& topic = *group_topic[i];
        const auto& group = out.groups[i];
        const auto qrels = topic.qrels();
        out.multi_runs[i] = multi_sdr(ctx, topic, group, method, repr, params);
        out.oracle[i] = oracle_single(topic, group, single_by_topic.at(topic.topic_id));
        const auto& m = out.multi_runs[i].entries;
        const auto& o = out.oracle[i].run.entries;
        multi_metrics[i] = evaluate(m, restrict_qrels(qrels, m));
        oracle_metrics[i] = evaluate(o, restrict_qrels(qrels, o));
    });

    for (std::size_t i = 0; i < n; ++i) {
        const auto label = "w" + std::to_string(out.groups[i].window_index);
        out.multi_report.add(out.groups[i].topic_id, label, multi_metrics[i]);
        out.oracle_report.add(out.groups[i].topic_id, label, oracle_metrics[i]);
    }
    out.multi_report.finalize();
    out.oracle_report.finalize();
    return out;
}

std::string MultiResult::comparison_csv() const {
    std::string out = "topic_id,window,oracle_seed,metric,single,multi\n";
    const auto multi_rows = multi_report.rows();
    const auto oracle_rows = oracle_report.rows();
    // Both reports were filled unit by unit in the same order.
    std::size_t mi = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto label = "w" + std::to_string(groups[g].window_index);
        std::map<std::string, double> single_vals;
        for (const auto& r : oracle_rows) {
            if (r.topic_id == groups[g].topic_id && r.unit == label) single_vals[r.metric] = r.value;
        }
        for (; mi < multi_rows.size() && multi_rows[mi].topic_id == groups[g].topic_id &&
               multi_rows[mi].unit == label;
             ++mi) {
            const auto& r = multi_rows[mi];
            auto s = single_vals.find(r.metric);
            out += r.topic_id + ',' + label + ',' + oracle[g].seed_id + ',' + r.metric + ',' +
                   (s == single_vals.end() ? std::string() : detail::format_double(s->second)) + ',' +
                   detail::format_double(r.value) + '\n';
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Observations

namespace {

double mean_pairwise_cosine(std::span<const TfIdfVector* const> docs) {
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (std::size_t j = i + 1; j < docs.size(); ++j) {
            sum += cosine(*docs[i], *docs[j]);
            ++pairs;
        }
    }
    return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

}  // namespace

IntraSimilarity intra_similarity(const IndexedCorpus& corpus, const Topic& topic, Representation repr,
                                 std::size_t repetitions, std::uint64_t rng_seed) {
    std::vector<std::string> rel_ids, irrel_ids;
    for (const auto& id : topic.candidate_ids) (topic.is_relevant(id) ? rel_ids : irrel_ids).push_back(id);
    if (rel_ids.size() < 2) {
        throw Error(ErrorKind::InsufficientDocuments,
                    "topic " + topic.topic_id + ": need at least 2 relevant documents, have " +
                        std::to_string(rel_ids.size()));
    }
    if (irrel_ids.size() < rel_ids.size()) {
        throw Error(ErrorKind::InsufficientDocuments,
                    "topic " + topic.topic_id + ": need at least " + std::to_string(rel_ids.size()) +
                        " irrelevant documents, have " + std::to_string(irrel_ids.size()));
    }
    if (repetitions == 0) throw Error(ErrorKind::Contract, "repetitions must be positive");

    auto pool = make_pool(corpus, topic, {}, repr);
    std::unordered_map<std::string, TfIdfVector> vectors;
    for (std::size_t j = 0; j < pool.doc_ids.size(); ++j) {
        vectors.emplace(pool.doc_ids[j], tfidf(*pool.counts[j], pool.stats));
    }

    std::vector<const TfIdfVector*> rel;
    for (const auto& id : rel_ids) rel.push_back(&vectors.at(id));

    IntraSimilarity out;
    out.rel_mean = mean_pairwise_cosine(rel);

    std::mt19937_64 rng(detail::splitmix64(rng_seed ^ detail::fnv1a(topic.topic_id)));
    double total = 0.0;
    for (std::size_t r = 0; r < repetitions; ++r) {
        std::vector<std::string> sample;
        std::sample(irrel_ids.begin(), irrel_ids.end(), std::back_inserter(sample), rel_ids.size(), rng);
        std::vector<const TfIdfVector*> docs;
        for (const auto& id : sample) docs.push_back(&vectors.at(id));
        total += mean_pairwise_cosine(docs);
    }
    out.irrel_mean = total / static_cast<double>(repetitions);
    return out;
}

TermCommonality term_commonality(const IndexedCorpus& corpus, const Topic& topic, Representation repr) {
    std::vector<std::string> rel_ids;
    for (const auto& id : topic.candidate_ids) {
        if (topic.is_relevant(id)) rel_ids.push_back(id);
    }
    if (rel_ids.empty()) {
        throw Error(ErrorKind::InsufficientDocuments, "topic " + topic.topic_id + " has no relevant documents");
    }
    std::map<TermId, std::size_t> doc_counts;
    for (const auto& id : rel_ids) {
        for (const auto& [term, count] : corpus.at(id).counts(repr).entries()) ++doc_counts[term];
    }
    TermCommonality out;
    const auto n = static_cast<double>(rel_ids.size());
    for (const auto& [term, c] : doc_counts) {
        const double f = static_cast<double>(c) / n;
        out.fractions.emplace(corpus.vocabulary().term(term), f);
        ++out.histogram[std::min<std::size_t>(9, c * 10 / rel_ids.size())];
    }
    return out;
}

}  // namespace seedrank
