#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "seedrank/corpus_io.hpp"

namespace seedrank {

enum class PipelineVariant {
    Ours,  // strip punctuation, split on non-alphanumeric runs
    Lee,   // split on whitespace only
};

enum class Representation { Bow, Boc };

std::string_view to_string(PipelineVariant v) noexcept;
std::string_view to_string(Representation r) noexcept;
PipelineVariant parse_variant(std::string_view s);
Representation parse_representation(std::string_view s);

using StopwordSet = std::unordered_set<std::string>;

// The 179-word English list shipped with NLTK 3.6.
const StopwordSet& default_stopwords();
StopwordSet load_stopwords(const std::filesystem::path& path);

struct PipelineConfig {
    PipelineVariant variant = PipelineVariant::Ours;
    StopwordSet stopwords = default_stopwords();
    // When false tokens keep their case; stopword matching is still done on the
    // lowercased form. Only embedding lookups use this.
    bool lowercase = true;
    bool include_title = true;
};

std::vector<std::string> tokenize(std::string_view text, const PipelineConfig& config);

// Title and abstract joined by a space, or just the abstract when titles are off.
std::string document_text(const Document& doc, const PipelineConfig& config);

using TermId = std::uint32_t;

// Interns term strings. Not thread-safe for writes; treat as frozen once indexing is done.
class Vocabulary {
public:
    TermId intern(std::string_view term);
    std::optional<TermId> find(std::string_view term) const;
    const std::string& term(TermId id) const { return terms_.at(id); }
    std::size_t size() const noexcept { return terms_.size(); }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };
    std::unordered_map<std::string, TermId, Hash, std::equal_to<>> ids_;
    std::vector<std::string> terms_;
};

// Sparse bag of terms, sorted by TermId, no zero entries.
class TermCounts {
public:
    using Entry = std::pair<TermId, std::uint32_t>;

    TermCounts() = default;
    // Entries may be unsorted and repeated; they are merged.
    explicit TermCounts(std::vector<Entry> entries);
    static TermCounts from_tokens(std::span<const std::string> tokens, Vocabulary& vocab);

    std::span<const Entry> entries() const noexcept { return entries_; }
    std::uint64_t length() const noexcept { return length_; }
    std::size_t unique_terms() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::uint32_t count(TermId term) const;
    bool contains(TermId term) const { return count(term) > 0; }

    TermCounts& operator+=(const TermCounts& other);
    bool operator==(const TermCounts&) const = default;

private:
    std::vector<Entry> entries_;
    std::uint64_t length_ = 0;
};

TermCounts bow(const Document& doc, const PipelineConfig& config, Vocabulary& vocab);
TermCounts boc(const TermCounts& bow_counts, const Lexicon& lexicon, const Vocabulary& vocab);

// Per-document representations for a whole corpus, built once and then read-only.
struct IndexedDocument {
    TermCounts bow;
    TermCounts boc;
    // Case-preserved tokens for embedding lookup, after stopword removal.
    std::vector<std::string> embed_tokens;
    // Same tokens restricted to the lexicon.
    std::vector<std::string> embed_tokens_boc;

    const TermCounts& counts(Representation r) const { return r == Representation::Bow ? bow : boc; }
    const std::vector<std::string>& tokens(Representation r) const {
        return r == Representation::Bow ? embed_tokens : embed_tokens_boc;
    }
};

class IndexedCorpus {
public:
    IndexedCorpus(const Corpus& corpus, PipelineConfig config, Lexicon lexicon);

    const IndexedDocument& at(const std::string& doc_id) const;
    bool contains(const std::string& doc_id) const { return docs_.count(doc_id) > 0; }
    const Vocabulary& vocabulary() const noexcept { return vocab_; }
    const PipelineConfig& config() const noexcept { return config_; }
    const Lexicon& lexicon() const noexcept { return lexicon_; }
    std::size_t size() const noexcept { return docs_.size(); }

private:
    PipelineConfig config_;
    Lexicon lexicon_;
    Vocabulary vocab_;
    std::unordered_map<std::string, IndexedDocument> docs_;
};

}  // namespace seedrank
