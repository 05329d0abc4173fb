#include "seedrank/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "seedrank/error.hpp"
#include "strings.hpp"

namespace seedrank {

namespace {

using detail::fnv1a;
using detail::splitmix64;

std::vector<std::size_t> sample_indices(const std::vector<std::size_t>& from, std::size_t cap,
                                        std::mt19937_64& rng) {
    std::vector<std::size_t> out;
    out.reserve(cap);
    std::sample(from.begin(), from.end(), std::back_inserter(out), cap, rng);
    return out;
}

double mean_at(const std::vector<std::size_t>& idx, std::span<const double> sims) {
    if (idx.empty()) return 0.0;
    double sum = 0.0;
    for (auto i : idx) sum += sims[i];
    return sum / static_cast<double>(idx.size());
}

// Weight of one term given which candidates contain it. present must be ascending.
double phi_from_partition(const std::vector<std::size_t>& present, std::span<const double> sims,
                          const ScoringParams& params, std::uint64_t term_key) {
    const std::size_t n = sims.size();
    if (!params.undersample || (present.size() <= params.undersample_cap &&
                                n - present.size() <= params.undersample_cap)) {
        double sum_present = 0.0;
        for (auto i : present) sum_present += sims[i];
        const std::size_t n_absent = n - present.size();
        double g_present = present.empty() ? 0.0 : sum_present / static_cast<double>(present.size());
        double g_absent = 0.0;
        if (n_absent > 0) {
            double sum_absent = 0.0;
            std::size_t k = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (k < present.size() && present[k] == i) {
                    ++k;
                } else {
                    sum_absent += sims[i];
                }
            }
            g_absent = sum_absent / static_cast<double>(n_absent);
        }
        return phi_from_gammas(g_present, g_absent);
    }

    std::vector<std::size_t> absent;
    absent.reserve(n - present.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (k < present.size() && present[k] == i) {
            ++k;
        } else {
            absent.push_back(i);
        }
    }
    std::mt19937_64 rng(splitmix64(term_key));
    const auto& p = present.size() > params.undersample_cap
                        ? sample_indices(present, params.undersample_cap, rng)
                        : present;
    const auto& a = absent.size() > params.undersample_cap
                        ? sample_indices(absent, params.undersample_cap, rng)
                        : absent;
    return phi_from_gammas(mean_at(p, sims), mean_at(a, sims));
}

// Calls fn(seed_index, seed_count, cand_count) for every shared term.
template <typename Fn>
void for_shared_terms(const TermCounts& seed, const TermCounts& cand, Fn&& fn) {
    auto a = seed.entries(), b = cand.entries();
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) {
            ++i;
        } else if (b[j].first < a[i].first) {
            ++j;
        } else {
            fn(i, a[i].first, a[i].second, b[j].second);
            ++i;
            ++j;
        }
    }
}

double qlm_addend(std::uint32_t seed_count, std::uint32_t cand_count, std::uint64_t cand_length,
                  double p_term, double lambda) {
    if (p_term <= 0.0) {
        throw Error(ErrorKind::Contract, "candidate term missing from collection statistics");
    }
    return seed_count * std::log(1.0 + ((1.0 - lambda) / lambda) *
                                           (cand_count / (static_cast<double>(cand_length) * p_term)));
}

}  // namespace

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::Bm25: return "BM25";
        case Method::Qlm: return "QLM";
        case Method::Sdr: return "SDR";
        case Method::Aes: return "AES";
        case Method::SdrAes: return "SDR+AES";
    }
    return "?";
}

Method parse_method(std::string_view s) {
    auto u = std::string(s);
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
    if (u == "BM25") return Method::Bm25;
    if (u == "QLM") return Method::Qlm;
    if (u == "SDR") return Method::Sdr;
    if (u == "AES") return Method::Aes;
    if (u == "SDR+AES" || u == "SDR-AES") return Method::SdrAes;
    throw Error(ErrorKind::Config, "unknown method '" + std::string(s) + "'");
}

bool needs_embeddings(Method m) noexcept { return m == Method::Aes || m == Method::SdrAes; }

void ScoringParams::validate() const {
    if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorKind::Config, "lambda must be in (0,1)");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::Config, "alpha must be in [0,1]");
    if (!(bm25_k1 >= 0.0)) throw Error(ErrorKind::Config, "bm25_k1 must be >= 0");
    if (!(bm25_b >= 0.0 && bm25_b <= 1.0)) throw Error(ErrorKind::Config, "bm25_b must be in [0,1]");
    if (undersample_cap == 0) throw Error(ErrorKind::Config, "undersample_cap must be positive");
}

// ---------------------------------------------------------------------------

ScoredList::ScoredList(std::vector<ScoredDoc> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
}

std::vector<std::string> ScoredList::doc_ids() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.doc_id);
    return out;
}

std::unordered_map<std::string, double> ScoredList::score_map() const {
    std::unordered_map<std::string, double> out;
    for (const auto& e : entries_) out.emplace(e.doc_id, e.score);
    return out;
}

RankedRun to_run(const ScoredList& scores, const std::string& topic_id, const std::string& tag) {
    RankedRun run{topic_id, tag, {}};
    run.entries.reserve(scores.size());
    std::size_t r = 0;
    for (const auto& e : scores.entries()) run.entries.push_back({topic_id, e.doc_id, ++r, e.score, tag});
    return run;
}

// ---------------------------------------------------------------------------

double gamma(std::span<const double> similarities) {
    if (similarities.empty()) return 0.0;
    double sum = 0.0;
    for (double s : similarities) sum += s;
    return sum / static_cast<double>(similarities.size());
}

double gamma(std::span<const TfIdfVector> subset, const TfIdfVector& seed) {
    std::vector<double> sims;
    sims.reserve(subset.size());
    for (const auto& d : subset) sims.push_back(cosine(d, seed));
    return gamma(sims);
}

double phi_from_gammas(double gamma_present, double gamma_absent) {
    if (gamma_present == 0.0) return 0.0;
    if (gamma_absent == 0.0) return std::log(2.0);
    return std::log(1.0 + gamma_present / gamma_absent);
}

double phi(TermId term, const TermCounts& seed_counts, const TfIdfVector& seed_vector,
           std::span<const TermCounts* const> candidate_counts,
           std::span<const TfIdfVector> candidate_vectors, const ScoringParams& params,
           std::uint64_t sample_key) {
    if (!seed_counts.contains(term)) throw Error(ErrorKind::Contract, "phi: term does not occur in the seed");
    if (candidate_counts.size() != candidate_vectors.size()) {
        throw Error(ErrorKind::Contract, "phi: candidate counts and vectors differ in length");
    }
    std::vector<double> sims;
    std::vector<std::size_t> present;
    sims.reserve(candidate_vectors.size());
    for (std::size_t j = 0; j < candidate_vectors.size(); ++j) {
        sims.push_back(cosine(candidate_vectors[j], seed_vector));
        if (candidate_counts[j]->contains(term)) present.push_back(j);
    }
    return phi_from_partition(present, sims, params, sample_key);
}

double qlm_score(const TermCounts& seed, const TermCounts& cand, const CollectionStats& stats,
                 const ScoringParams& params) {
    double score = 0.0;
    for_shared_terms(seed, cand, [&](std::size_t, TermId t, std::uint32_t cs, std::uint32_t cd) {
        score += qlm_addend(cs, cd, cand.length(), stats.term_probability(t), params.lambda);
    });
    return score;
}

double sdr_score(const TermCounts& seed, const TermCounts& cand, const CollectionStats& stats,
                 const ScoringParams& params, std::span<const double> weights) {
    if (weights.size() != seed.unique_terms()) {
        throw Error(ErrorKind::Contract, "sdr_score: expected " + std::to_string(seed.unique_terms()) +
                                             " term weights, got " + std::to_string(weights.size()));
    }
    double score = 0.0;
    for_shared_terms(seed, cand, [&](std::size_t i, TermId t, std::uint32_t cs, std::uint32_t cd) {
        if (!std::isfinite(weights[i])) throw Error(ErrorKind::Contract, "sdr_score: missing term weight");
        score += weights[i] * qlm_addend(cs, cd, cand.length(), stats.term_probability(t), params.lambda);
    });
    return score;
}

double bm25_score(const TermCounts& seed, const TermCounts& cand, const CollectionStats& stats,
                  const ScoringParams& params) {
    const double n = static_cast<double>(stats.num_docs());
    const double avg = stats.avg_doc_length();
    const double len_ratio = avg > 0.0 ? static_cast<double>(cand.length()) / avg : 0.0;
    const double k1 = params.bm25_k1, b = params.bm25_b;
    double score = 0.0;
    for_shared_terms(seed, cand, [&](std::size_t, TermId t, std::uint32_t, std::uint32_t cd) {
        const double df = stats.doc_freq(t);
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        score += idf * (cd * (k1 + 1.0)) / (cd + k1 * (1.0 - b + b * len_ratio));
    });
    return score;
}

double aes_score(std::span<const std::string> seed_tokens, std::span<const std::string> cand_tokens,
                 const EmbeddingTable& table) {
    auto s = aes_vector(seed_tokens, table);
    auto c = aes_vector(cand_tokens, table);
    if (!s.found() || !c.found()) return 0.0;
    return cosine(std::span<const double>(s.values), std::span<const double>(c.values));
}

ScoredList minmax(const ScoredList& scores) {
    if (scores.empty()) throw Error(ErrorKind::Contract, "minmax of an empty list");
    double lo = scores.entries().front().score, hi = lo;
    for (const auto& e : scores.entries()) {
        lo = std::min(lo, e.score);
        hi = std::max(hi, e.score);
    }
    std::vector<ScoredDoc> out;
    out.reserve(scores.size());
    for (const auto& e : scores.entries()) {
        out.push_back({e.doc_id, hi > lo ? (e.score - lo) / (hi - lo) : 0.0});
    }
    return ScoredList(std::move(out));
}

ScoredList interpolate(const ScoredList& sdr, const ScoredList& aes, double alpha) {
    if (sdr.size() != aes.size()) throw Error(ErrorKind::Contract, "interpolate: document sets differ");
    auto aes_scores = aes.score_map();
    std::vector<ScoredDoc> out;
    out.reserve(sdr.size());
    for (const auto& e : sdr.entries()) {
        auto it = aes_scores.find(e.doc_id);
        if (it == aes_scores.end()) {
            throw Error(ErrorKind::Contract, "interpolate: " + e.doc_id + " missing from AES scores");
        }
        out.push_back({e.doc_id, (1.0 - alpha) * e.score + alpha * it->second});
    }
    return ScoredList(std::move(out));
}

// ---------------------------------------------------------------------------

SeedQuery make_seed(const IndexedCorpus& corpus, std::span<const std::string> member_ids) {
    if (member_ids.empty()) throw Error(ErrorKind::Contract, "seed needs at least one member");
    SeedQuery seed;
    for (const auto& id : member_ids) {
        if (!corpus.contains(id)) throw Error(ErrorKind::Contract, "seed member " + id + " is not in the corpus");
        const auto& doc = corpus.at(id);
        if (!seed.key.empty()) seed.key += '+';
        seed.key += id;
        seed.member_ids.push_back(id);
        seed.bow += doc.bow;
        seed.boc += doc.boc;
        seed.tokens_bow.insert(seed.tokens_bow.end(), doc.embed_tokens.begin(), doc.embed_tokens.end());
        seed.tokens_boc.insert(seed.tokens_boc.end(), doc.embed_tokens_boc.begin(),
                               doc.embed_tokens_boc.end());
    }
    return seed;
}

CandidatePool make_pool(const IndexedCorpus& corpus, const Topic& topic,
                        std::span<const std::string> exclude, Representation repr) {
    std::unordered_set<std::string> excluded(exclude.begin(), exclude.end());
    CandidatePool pool;
    pool.topic_id = topic.topic_id;
    pool.representation = repr;
    for (const auto& id : topic.candidate_ids) {
        if (excluded.count(id)) continue;
        if (!corpus.contains(id)) {
            throw Error(ErrorKind::Contract, "topic " + topic.topic_id + ": candidate " + id + " is not in the corpus");
        }
        pool.doc_ids.push_back(id);
        pool.counts.push_back(&corpus.at(id).counts(repr));
    }
    if (pool.doc_ids.empty()) {
        throw Error(ErrorKind::EmptyTopic, "topic " + topic.topic_id + " has no candidates left to rank");
    }
    pool.stats = build_stats(pool.counts);
    return pool;
}

std::uint64_t term_sample_key(std::uint64_t key, std::size_t term_index) {
    return splitmix64(key ^ splitmix64(static_cast<std::uint64_t>(term_index)));
}

std::uint64_t sample_key(const ScoringParams& params, std::string_view topic_id, std::string_view seed_key) {
    return splitmix64(params.rng_seed ^ splitmix64(fnv1a(topic_id) ^ splitmix64(fnv1a(seed_key))));
}

TermWeights sdr_term_weights(const CandidatePool& pool, const TermCounts& seed,
                             const ScoringParams& params, std::uint64_t key) {
    const auto seed_vec = tfidf(seed, pool.stats);
    const std::size_t n = pool.counts.size();
    std::vector<double> sims(n);
    // postings[i] lists the candidates containing the i-th seed term, ascending.
    std::vector<std::vector<std::size_t>> postings(seed.unique_terms());
    for (std::size_t j = 0; j < n; ++j) {
        sims[j] = cosine(tfidf(*pool.counts[j], pool.stats), seed_vec);
        for_shared_terms(seed, *pool.counts[j],
                         [&](std::size_t i, TermId, std::uint32_t, std::uint32_t) { postings[i].push_back(j); });
    }
    TermWeights weights(seed.unique_terms());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        weights[i] = phi_from_partition(postings[i], sims, params, term_sample_key(key, i));
    }
    return weights;
}

namespace {

template <typename ScoreFn>
ScoredList score_pool(const CandidatePool& pool, ScoreFn&& fn) {
    std::vector<ScoredDoc> out;
    out.reserve(pool.doc_ids.size());
    for (std::size_t j = 0; j < pool.doc_ids.size(); ++j) out.push_back({pool.doc_ids[j], fn(*pool.counts[j])});
    return ScoredList(std::move(out));
}

}  // namespace

ScoredList rank_qlm(const CandidatePool& pool, const TermCounts& seed, const ScoringParams& params) {
    return score_pool(pool, [&](const TermCounts& c) { return qlm_score(seed, c, pool.stats, params); });
}

ScoredList rank_sdr(const CandidatePool& pool, const TermCounts& seed, std::span<const double> weights,
                    const ScoringParams& params) {
    return score_pool(pool, [&](const TermCounts& c) { return sdr_score(seed, c, pool.stats, params, weights); });
}

ScoredList rank_bm25(const CandidatePool& pool, const TermCounts& seed, const ScoringParams& params) {
    return score_pool(pool, [&](const TermCounts& c) { return bm25_score(seed, c, pool.stats, params); });
}

AesCache build_aes_cache(const IndexedCorpus& corpus, const EmbeddingTable& table, Representation repr,
                         std::span<const std::string> doc_ids) {
    AesCache cache;
    for (const auto& id : doc_ids) {
        if (cache.count(id)) continue;
        cache.emplace(id, aes_vector(corpus.at(id).tokens(repr), table));
    }
    return cache;
}

ScoredList rank_aes(const RankingContext& ctx, const CandidatePool& pool, const SeedQuery& seed) {
    if (ctx.embeddings == nullptr) throw Error(ErrorKind::Config, "embeddings: required for AES methods");
    const auto repr = pool.representation;
    const auto* cache = repr == Representation::Bow ? ctx.aes_bow : ctx.aes_boc;
    const auto seed_vec = aes_vector(seed.tokens(repr), *ctx.embeddings);
    std::vector<ScoredDoc> out;
    out.reserve(pool.doc_ids.size());
    for (const auto& id : pool.doc_ids) {
        double score = 0.0;
        const AesVector* cand = nullptr;
        AesVector local;
        if (cache != nullptr) {
            if (auto it = cache->find(id); it != cache->end()) cand = &it->second;
        }
        if (cand == nullptr) {
            local = aes_vector(ctx.corpus->at(id).tokens(repr), *ctx.embeddings);
            cand = &local;
        }
        if (seed_vec.found() && cand->found()) {
            score = cosine(std::span<const double>(seed_vec.values), std::span<const double>(cand->values));
        }
        out.push_back({id, score});
    }
    return ScoredList(std::move(out));
}

std::string run_tag(Method method, Representation repr) {
    return std::string(to_string(method)) + "-" + std::string(to_string(repr));
}

ScoredList score_topic(const RankingContext& ctx, const Topic& topic, const SeedQuery& seed, Method method,
                       Representation repr, const ScoringParams& params) {
    if (ctx.corpus == nullptr) throw Error(ErrorKind::Contract, "ranking context has no corpus");
    auto pool = make_pool(*ctx.corpus, topic, seed.member_ids, repr);
    const auto& query = seed.counts(repr);
    auto sdr = [&] {
        auto weights = sdr_term_weights(pool, query, params, sample_key(params, topic.topic_id, seed.key));
        return rank_sdr(pool, query, weights, params);
    };
    switch (method) {
        case Method::Qlm: return rank_qlm(pool, query, params);
        case Method::Bm25: return rank_bm25(pool, query, params);
        case Method::Sdr: return sdr();
        case Method::Aes: return rank_aes(ctx, pool, seed);
        case Method::SdrAes:
            return interpolate(minmax(sdr()), minmax(rank_aes(ctx, pool, seed)), params.alpha);
    }
    throw Error(ErrorKind::Contract, "unknown method");
}

RankedRun rank(const RankingContext& ctx, const Topic& topic, const SeedQuery& seed, Method method,
               Representation repr, const ScoringParams& params) {
    return to_run(score_topic(ctx, topic, seed, method, repr, params), topic.topic_id, run_tag(method, repr));
}

}  // namespace seedrank
