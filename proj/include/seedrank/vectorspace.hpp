#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seedrank/corpus_io.hpp"
#include "seedrank/textproc.hpp"

namespace seedrank {

// Statistics of one topic's candidate set. Lookups for terms never seen in the
// collection return zero.
class CollectionStats {
public:
    std::size_t num_docs() const noexcept { return doc_lengths_.size(); }
    std::uint32_t doc_freq(TermId t) const { return t < doc_freq_.size() ? doc_freq_[t] : 0; }
    std::uint64_t collection_count(TermId t) const {
        return t < collection_counts_.size() ? collection_counts_[t] : 0;
    }
    std::uint64_t total_tokens() const noexcept { return total_tokens_; }
    std::span<const std::uint64_t> doc_lengths() const noexcept { return doc_lengths_; }
    double avg_doc_length() const noexcept { return avg_doc_length_; }
    // Maximum-likelihood p(t|C).
    double term_probability(TermId t) const;
    // Terms with non-zero collection count, ascending.
    std::vector<TermId> terms() const;

    friend CollectionStats build_stats(std::span<const TermCounts* const> candidates);

private:
    std::vector<std::uint32_t> doc_freq_;
    std::vector<std::uint64_t> collection_counts_;
    std::vector<std::uint64_t> doc_lengths_;
    std::uint64_t total_tokens_ = 0;
    double avg_doc_length_ = 0.0;
};

// Throws EmptyCollection for an empty candidate list.
CollectionStats build_stats(std::span<const TermCounts* const> candidates);
CollectionStats build_stats(std::span<const TermCounts> candidates);

class TfIdfVector {
public:
    using Entry = std::pair<TermId, double>;

    TfIdfVector() = default;
    // Entries must be sorted by term; zero weights are dropped.
    explicit TfIdfVector(std::vector<Entry> weights);

    std::span<const Entry> weights() const noexcept { return weights_; }
    double norm() const noexcept { return norm_; }
    bool empty() const noexcept { return weights_.empty(); }

private:
    std::vector<Entry> weights_;
    double norm_ = 0.0;
};

// weight(t) = c(t, doc) * ln(N / df(t)); terms unseen in the collection are dropped.
TfIdfVector tfidf(const TermCounts& doc, const CollectionStats& stats);

// Cosine similarity; 0 when either vector has zero norm.
double cosine(const TfIdfVector& u, const TfIdfVector& v);
double cosine(std::span<const double> u, std::span<const double> v);

struct AesVector {
    std::vector<double> values;
    // Number of tokens that had an embedding; 0 means the vector is all zero.
    std::size_t hits = 0;

    bool found() const noexcept { return hits > 0; }
};

// Occurrence-weighted mean of token embeddings. Each token is looked up as-is,
// then lowercased.
AesVector aes_vector(std::span<const std::string> tokens, const EmbeddingTable& table);

}  // namespace seedrank
