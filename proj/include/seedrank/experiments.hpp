#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "seedrank/corpus_io.hpp"
#include "seedrank/evaluation.hpp"
#include "seedrank/scoring.hpp"
#include "seedrank/textproc.hpp"

namespace seedrank {

struct SeedGroup {
    std::string topic_id;
    std::vector<std::string> member_ids;
    std::size_t window_index = 0;

    bool operator==(const SeedGroup&) const = default;
};

// max(2, ceil(fraction * pool_size)).
std::size_t group_width(std::size_t pool_size, double fraction = 0.2);

// Sliding windows of group_width() over the pool with step 1.
// Throws InsufficientSeeds for pools smaller than 3.
std::vector<SeedGroup> make_groups(const std::string& topic_id, std::span<const std::string> seed_pool,
                                   double fraction = 0.2);

// Members' titles and abstracts joined in member order. Throws Contract for a missing member.
Document concat_group(const SeedGroup& group, const Corpus& corpus);

struct MetricRow {
    std::string topic_id;
    std::string unit;  // seed doc_id or window label
    std::string metric;
    double value = 0.0;
};

class ExperimentReport {
public:
    void add(const std::string& topic_id, const std::string& unit, const MetricSet& metrics);
    // Computes per-topic and cross-topic means; call after the last add().
    void finalize();

    std::span<const MetricRow> rows() const noexcept { return rows_; }
    const std::map<std::string, MetricSet>& topic_means() const noexcept { return topic_means_; }
    const MetricSet& overall() const noexcept { return overall_; }
    // Units per topic that retrieved no relevant document (left out of LastRel%/WSS means).
    const std::map<std::string, std::size_t>& lastrel_excluded() const noexcept { return lastrel_excluded_; }

    // topic_id,seed_or_window,metric,value; per-topic means use unit "mean" and
    // the cross-topic means use topic "all".
    std::string to_csv() const;

private:
    std::vector<MetricRow> rows_;
    std::map<std::string, std::vector<MetricSet>> units_;
    std::map<std::string, MetricSet> topic_means_;
    std::map<std::string, std::size_t> lastrel_excluded_;
    MetricSet overall_;
};

// Qrels restricted to the documents the run ranks.
Qrels restrict_qrels(const Qrels& qrels, std::span<const RunEntry> run);

struct SingleResult {
    ExperimentReport report;
    // Topic order, then seed-pool order within a topic.
    std::vector<RankedRun> runs;
    std::vector<std::string> seeds;
};

// Every relevant study of every topic used once as the seed.
// Throws InsufficientSeeds for a topic with fewer than two relevant studies.
SingleResult loocv_single(const RankingContext& ctx, std::span<const Topic> topics, Method method,
                          Representation repr, const ScoringParams& params, std::size_t threads = 1);

// Ranks the topic against the concatenated group. Term-weight under-sampling is
// switched on for groups of two or more seeds.
RankedRun multi_sdr(const RankingContext& ctx, const Topic& topic, const SeedGroup& group, Method method,
                    Representation repr, const ScoringParams& params);

struct OracleSelection {
    std::string seed_id;
    double seed_ap = 0.0;
    RankedRun run;
};

// Picks the member whose single-seed run has the highest AP (ties to the smallest
// doc_id), drops the other members from that run and renumbers the ranks.
OracleSelection oracle_single(const Topic& topic, const SeedGroup& group,
                              const std::map<std::string, RankedRun>& single_runs);

struct MultiResult {
    std::vector<SeedGroup> groups;
    std::vector<RankedRun> multi_runs;   // aligned with groups
    std::vector<OracleSelection> oracle;  // aligned with groups
    ExperimentReport multi_report;
    ExperimentReport oracle_report;

    // topic_id,window,oracle_seed,metric,single,multi
    std::string comparison_csv() const;
};

MultiResult run_multi(const RankingContext& ctx, std::span<const Topic> topics, Method method,
                      Representation repr, const ScoringParams& params, double fraction = 0.2,
                      std::size_t threads = 1);

struct IntraSimilarity {
    double rel_mean = 0.0;
    double irrel_mean = 0.0;
};

// Mean pairwise tf-idf cosine among relevant documents versus among random
// equally-sized irrelevant samples, averaged over the repetitions.
IntraSimilarity intra_similarity(const IndexedCorpus& corpus, const Topic& topic, Representation repr,
                                 std::size_t repetitions = 10, std::uint64_t rng_seed = 42);

struct TermCommonality {
    // Fraction of relevant documents containing each term.
    std::map<std::string, double> fractions;
    // Terms per fraction decile: bin i holds fractions in [i/10, (i+1)/10), with 1.0 in the last bin.
    std::array<std::size_t, 10> histogram{};
};

TermCommonality term_commonality(const IndexedCorpus& corpus, const Topic& topic, Representation repr);

// Runs fn(i) for i in [0, n) on up to `threads` workers. If any call throws, the
// exception from the lowest index is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace seedrank
