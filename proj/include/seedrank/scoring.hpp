#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seedrank/corpus_io.hpp"
#include "seedrank/textproc.hpp"
#include "seedrank/vectorspace.hpp"

namespace seedrank {

enum class Method { Bm25, Qlm, Sdr, Aes, SdrAes };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view s);
bool needs_embeddings(Method m) noexcept;

struct ScoringParams {
    double lambda = 0.7;   // Jelinek-Mercer
    double alpha = 0.3;    // weight of AES in SDR+AES
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
    std::size_t undersample_cap = 50;
    // Cap both term partitions at undersample_cap when computing term weights.
    bool undersample = false;
    std::uint64_t rng_seed = 42;

    // Throws Config naming the offending field.
    void validate() const;
};

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const ScoredDoc&) const = default;
};

// Sorted by score descending, ties by doc_id ascending.
class ScoredList {
public:
    ScoredList() = default;
    explicit ScoredList(std::vector<ScoredDoc> entries);

    std::span<const ScoredDoc> entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::vector<std::string> doc_ids() const;
    std::unordered_map<std::string, double> score_map() const;

    bool operator==(const ScoredList&) const = default;

private:
    std::vector<ScoredDoc> entries_;
};

RankedRun to_run(const ScoredList& scores, const std::string& topic_id, const std::string& tag);

// Mean of the given similarities; 0 for an empty set.
double gamma(std::span<const double> similarities);
// Mean cosine between each vector in the subset and the seed; 0 for an empty subset.
double gamma(std::span<const TfIdfVector> subset, const TfIdfVector& seed);

// ln(1 + present / absent), with the degenerate cases:
//   present == 0          -> 0
//   absent == 0           -> ln 2
double phi_from_gammas(double gamma_present, double gamma_absent);

// Term weight of a seed term against a candidate collection. candidate_vectors
// must be the tf-idf vectors of candidate_counts under the same statistics.
// Throws Contract when the term does not occur in the seed.
double phi(TermId term, const TermCounts& seed_counts, const TfIdfVector& seed_vector,
           std::span<const TermCounts* const> candidate_counts,
           std::span<const TfIdfVector> candidate_vectors, const ScoringParams& params,
           std::uint64_t sample_key = 0);

// Weights aligned with seed.entries().
using TermWeights = std::vector<double>;

double qlm_score(const TermCounts& seed, const TermCounts& cand, const CollectionStats& stats,
                 const ScoringParams& params);
// Throws Contract when weights do not line up with the seed terms.
double sdr_score(const TermCounts& seed, const TermCounts& cand, const CollectionStats& stats,
                 const ScoringParams& params, std::span<const double> weights);
double bm25_score(const TermCounts& seed, const TermCounts& cand, const CollectionStats& stats,
                  const ScoringParams& params);
double aes_score(std::span<const std::string> seed_tokens, std::span<const std::string> cand_tokens,
                 const EmbeddingTable& table);

// Throws Contract for an empty list. A constant list maps to all zeros.
ScoredList minmax(const ScoredList& scores);
// (1 - alpha) * sdr + alpha * aes; throws Contract if the doc sets differ.
ScoredList interpolate(const ScoredList& sdr, const ScoredList& aes, double alpha);

// ---------------------------------------------------------------------------
// Ranking a topic's candidates against a seed (or a concatenated seed group).

struct SeedQuery {
    // Member ids joined by '+'; keys the under-sampling RNG.
    std::string key;
    std::vector<std::string> member_ids;
    TermCounts bow;
    TermCounts boc;
    std::vector<std::string> tokens_bow;
    std::vector<std::string> tokens_boc;

    const TermCounts& counts(Representation r) const { return r == Representation::Bow ? bow : boc; }
    const std::vector<std::string>& tokens(Representation r) const {
        return r == Representation::Bow ? tokens_bow : tokens_boc;
    }
};

// Concatenates the members in order; counts are the member sums.
SeedQuery make_seed(const IndexedCorpus& corpus, std::span<const std::string> member_ids);

// Candidate documents of one topic with their statistics.
struct CandidatePool {
    std::string topic_id;
    Representation representation = Representation::Bow;
    std::vector<std::string> doc_ids;
    std::vector<const TermCounts*> counts;
    CollectionStats stats;
};

// Topic candidates minus the excluded ids, in topic order. Throws EmptyTopic when nothing is left.
CandidatePool make_pool(const IndexedCorpus& corpus, const Topic& topic,
                        std::span<const std::string> exclude, Representation repr);

std::uint64_t sample_key(const ScoringParams& params, std::string_view topic_id,
                         std::string_view seed_key);
// RNG key for the i-th seed term, as used by sdr_term_weights.
std::uint64_t term_sample_key(std::uint64_t key, std::size_t term_index);

TermWeights sdr_term_weights(const CandidatePool& pool, const TermCounts& seed,
                             const ScoringParams& params, std::uint64_t key);

ScoredList rank_qlm(const CandidatePool& pool, const TermCounts& seed, const ScoringParams& params);
ScoredList rank_sdr(const CandidatePool& pool, const TermCounts& seed, std::span<const double> weights,
                    const ScoringParams& params);
ScoredList rank_bm25(const CandidatePool& pool, const TermCounts& seed, const ScoringParams& params);

// Candidate embedding averages, computed once per corpus and representation.
using AesCache = std::unordered_map<std::string, AesVector>;
AesCache build_aes_cache(const IndexedCorpus& corpus, const EmbeddingTable& table,
                         Representation repr, std::span<const std::string> doc_ids);

struct RankingContext {
    const IndexedCorpus* corpus = nullptr;
    const EmbeddingTable* embeddings = nullptr;
    const AesCache* aes_bow = nullptr;
    const AesCache* aes_boc = nullptr;
};

ScoredList rank_aes(const RankingContext& ctx, const CandidatePool& pool, const SeedQuery& seed);

std::string run_tag(Method method, Representation repr);

// Full ranking of the topic's candidates, excluding every seed member.
ScoredList score_topic(const RankingContext& ctx, const Topic& topic, const SeedQuery& seed,
                       Method method, Representation repr, const ScoringParams& params);
RankedRun rank(const RankingContext& ctx, const Topic& topic, const SeedQuery& seed, Method method,
               Representation repr, const ScoringParams& params);

}  // namespace seedrank
