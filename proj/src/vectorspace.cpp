#include "seedrank/vectorspace.hpp"

#include <cmath>

#include "seedrank/error.hpp"
#include "strings.hpp"

namespace seedrank {

double CollectionStats::term_probability(TermId t) const {
    if (total_tokens_ == 0) return 0.0;
    return static_cast<double>(collection_count(t)) / static_cast<double>(total_tokens_);
}

std::vector<TermId> CollectionStats::terms() const {
    std::vector<TermId> out;
    for (TermId t = 0; t < collection_counts_.size(); ++t) {
        if (collection_counts_[t] > 0) out.push_back(t);
    }
    return out;
}

CollectionStats build_stats(std::span<const TermCounts* const> candidates) {
    if (candidates.empty()) throw Error(ErrorKind::EmptyCollection, "cannot build statistics over zero documents");
    CollectionStats stats;
    TermId max_term = 0;
    for (const auto* doc : candidates) {
        if (!doc->empty()) max_term = std::max(max_term, doc->entries().back().first);
    }
    stats.doc_freq_.assign(static_cast<std::size_t>(max_term) + 1, 0);
    stats.collection_counts_.assign(static_cast<std::size_t>(max_term) + 1, 0);
    stats.doc_lengths_.reserve(candidates.size());
    for (const auto* doc : candidates) {
        for (const auto& [term, count] : doc->entries()) {
            ++stats.doc_freq_[term];
            stats.collection_counts_[term] += count;
        }
        stats.doc_lengths_.push_back(doc->length());
        stats.total_tokens_ += doc->length();
    }
    stats.avg_doc_length_ =
        static_cast<double>(stats.total_tokens_) / static_cast<double>(candidates.size());
    return stats;
}

CollectionStats build_stats(std::span<const TermCounts> candidates) {
    std::vector<const TermCounts*> ptrs;
    ptrs.reserve(candidates.size());
    for (const auto& c : candidates) ptrs.push_back(&c);
    return build_stats(ptrs);
}

TfIdfVector::TfIdfVector(std::vector<Entry> weights) {
    double sq = 0.0;
    weights_.reserve(weights.size());
    for (const auto& e : weights) {
        if (e.second == 0.0) continue;
        weights_.push_back(e);
        sq += e.second * e.second;
    }
    norm_ = std::sqrt(sq);
}

TfIdfVector tfidf(const TermCounts& doc, const CollectionStats& stats) {
    std::vector<TfIdfVector::Entry> weights;
    weights.reserve(doc.unique_terms());
    const double n = static_cast<double>(stats.num_docs());
    for (const auto& [term, count] : doc.entries()) {
        auto df = stats.doc_freq(term);
        if (df == 0) continue;
        weights.emplace_back(term, count * std::log(n / df));
    }
    return TfIdfVector(std::move(weights));
}

double cosine(const TfIdfVector& u, const TfIdfVector& v) {
    if (u.norm() == 0.0 || v.norm() == 0.0) return 0.0;
    auto a = u.weights(), b = v.weights();
    double dot = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) {
            ++i;
        } else if (b[j].first < a[i].first) {
            ++j;
        } else {
            dot += a[i++].second * b[j++].second;
        }
    }
    return dot / (u.norm() * v.norm());
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw Error(ErrorKind::Contract, "cosine of vectors with different dimensions");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

AesVector aes_vector(std::span<const std::string> tokens, const EmbeddingTable& table) {
    AesVector out;
    out.values.assign(table.dimension(), 0.0);
    for (const auto& token : tokens) {
        auto vec = table.find(token);
        if (vec.empty()) vec = table.find(lowercase_utf8(token));
        if (vec.empty()) continue;
        for (std::size_t d = 0; d < vec.size(); ++d) out.values[d] += vec[d];
        ++out.hits;
    }
    if (out.hits > 0) {
        for (auto& x : out.values) x /= static_cast<double>(out.hits);
    }
    return out;
}

}  // namespace seedrank
