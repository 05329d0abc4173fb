#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace seedrank {

struct Document {
    std::string doc_id;
    std::string title;
    std::string abstract;

    bool operator==(const Document&) const = default;
};

using Corpus = std::map<std::string, Document>;

// Relevance grades for one topic, keyed by doc_id.
using Qrels = std::unordered_map<std::string, int>;

struct Topic {
    std::string topic_id;
    std::vector<std::string> candidate_ids;
    std::unordered_map<std::string, int> judgments;
    // Judged doc_ids in order of first appearance in the qrels file.
    std::vector<std::string> judged_order;

    int grade(const std::string& doc_id) const;
    bool is_relevant(const std::string& doc_id) const { return grade(doc_id) >= 1; }
    // Relevant ids in qrels order; this is the seed pool.
    std::vector<std::string> relevant_ids() const;
    std::size_t num_relevant() const;
    // Candidates that are not judged relevant (unjudged count as irrelevant).
    std::vector<std::string> irrelevant_ids() const;
    Qrels qrels() const { return Qrels(judgments.begin(), judgments.end()); }
};

struct TopicSet {
    std::vector<Topic> topics;
    // Judged ids that were missing from a topic's candidate list and got appended.
    std::size_t added_candidates = 0;
};

class Lexicon {
public:
    Lexicon() = default;
    explicit Lexicon(std::span<const std::string> tokens);

    // Lowercases and ignores empty tokens; splits on whitespace.
    void insert(std::string_view token);
    bool contains(std::string_view token) const { return terms_.find(token) != terms_.end(); }
    bool empty() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }
    const std::set<std::string, std::less<>>& terms() const noexcept { return terms_; }

    bool operator==(const Lexicon&) const = default;

private:
    std::set<std::string, std::less<>> terms_;
};

struct RunEntry {
    std::string topic_id;
    std::string doc_id;
    std::size_t rank = 0;
    double score = 0.0;
    std::string tag;

    bool operator==(const RunEntry&) const = default;
};

// One ranking of a topic's candidates, in rank order.
struct RankedRun {
    std::string topic_id;
    std::string tag;
    std::vector<RunEntry> entries;

    std::vector<std::string> doc_ids() const;
    bool operator==(const RankedRun&) const = default;
};

class EmbeddingTable {
public:
    explicit EmbeddingTable(std::size_t dimension);

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return index_.size(); }
    void add(std::string token, std::span<const float> vector);
    // Empty span when the token is absent.
    std::span<const float> find(std::string_view token) const;

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };
    std::size_t dimension_;
    std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
    std::vector<float> data_;
};

Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view text);

TopicSet load_topics(const std::filesystem::path& topics_path,
                     const std::filesystem::path& qrels_path);
TopicSet parse_topics(std::string_view topics_text, std::string_view qrels_text);

std::vector<Topic> filter_topics(std::span<const Topic> topics, std::size_t min_relevant);

// Throws Validation when a topic's ranks have gaps or scores increase with rank.
void validate_run(std::span<const RunEntry> entries);
std::string format_run(std::span<const RunEntry> entries);
void write_run(std::span<const RunEntry> entries, const std::filesystem::path& path);
std::vector<RunEntry> parse_run(std::string_view text);
std::vector<RunEntry> load_run(const std::filesystem::path& path);

// topic_id -> Qrels.
std::map<std::string, Qrels> parse_qrels(std::string_view text);
std::map<std::string, Qrels> load_qrels(const std::filesystem::path& path);

Lexicon load_lexicon(const std::filesystem::path& path);
EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable parse_embeddings(std::string_view text);

// POSTs {"texts":[...]} batches to an annotator endpoint and unions the returned
// tokens. Throws Transport on network/HTTP failure and Protocol on a bad body.
Lexicon fetch_annotations(const std::string& endpoint, std::span<const Document> documents,
                          std::size_t batch_size = 32);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace seedrank
