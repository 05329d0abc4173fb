#include "seedrank/textproc.hpp"

#include <algorithm>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "seedrank/error.hpp"
#include "strings.hpp"

namespace seedrank {

namespace {

void append_utf8(std::string& out, UChar32 c) {
    char buf[U8_MAX_LENGTH];
    int32_t len = 0;
    UBool error = false;
    U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, c, error);
    if (!error) out.append(buf, static_cast<std::size_t>(len));
}

// Letters, numbers and combining marks form words; everything else (punctuation,
// symbols, whitespace, invalid bytes) separates them.
bool is_word_char(UChar32 c) {
    if (c < 0) return false;
    if (u_ispunct(c)) return false;
    auto mask = U_GET_GC_MASK(c);
    return (mask & (U_GC_L_MASK | U_GC_N_MASK | U_GC_M_MASK)) != 0;
}

}  // namespace

std::string lowercase_utf8(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    const auto* s = reinterpret_cast<const uint8_t*>(text.data());
    const auto n = static_cast<int32_t>(text.size());
    int32_t i = 0;
    while (i < n) {
        int32_t start = i;
        UChar32 c;
        U8_NEXT(s, i, n, c);
        if (c < 0) {
            out.append(text.data() + start, static_cast<std::size_t>(i - start));
        } else if (c < 0x80) {
            out.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c));
        } else {
            append_utf8(out, u_tolower(c));
        }
    }
    return out;
}

std::string_view to_string(PipelineVariant v) noexcept {
    return v == PipelineVariant::Ours ? "ours" : "lee";
}

std::string_view to_string(Representation r) noexcept {
    return r == Representation::Bow ? "BOW" : "BOC";
}

PipelineVariant parse_variant(std::string_view s) {
    auto l = lowercase_utf8(s);
    if (l == "ours") return PipelineVariant::Ours;
    if (l == "lee") return PipelineVariant::Lee;
    throw Error(ErrorKind::Config, "unknown pipeline variant '" + std::string(s) + "'");
}

Representation parse_representation(std::string_view s) {
    auto l = lowercase_utf8(s);
    if (l == "bow") return Representation::Bow;
    if (l == "boc") return Representation::Boc;
    throw Error(ErrorKind::Config, "unknown representation '" + std::string(s) + "'");
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
    StopwordSet out;
    const auto text = read_file(path);
    for (auto line : detail::split_lines(text)) {
        auto t = detail::trim(line);
        if (!t.empty()) out.insert(lowercase_utf8(t));
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text, const PipelineConfig& config) {
    std::vector<std::string> out;
    auto emit = [&](std::string raw) {
        auto lower = lowercase_utf8(raw);
        if (config.stopwords.count(lower)) return;
        out.push_back(config.lowercase ? std::move(lower) : std::move(raw));
    };

    if (config.variant == PipelineVariant::Lee) {
        for (auto tok : detail::split_ws(text)) emit(std::string(tok));
        return out;
    }

    const auto* s = reinterpret_cast<const uint8_t*>(text.data());
    const auto n = static_cast<int32_t>(text.size());
    int32_t i = 0;
    int32_t word_start = -1;
    while (i < n) {
        int32_t start = i;
        UChar32 c;
        U8_NEXT(s, i, n, c);
        if (is_word_char(c)) {
            if (word_start < 0) word_start = start;
        } else if (word_start >= 0) {
            emit(std::string(text.substr(word_start, start - word_start)));
            word_start = -1;
        }
    }
    if (word_start >= 0) emit(std::string(text.substr(word_start)));
    return out;
}

std::string document_text(const Document& doc, const PipelineConfig& config) {
    if (!config.include_title) return doc.abstract;
    return doc.title + " " + doc.abstract;
}

// ---------------------------------------------------------------------------

TermId Vocabulary::intern(std::string_view term) {
    if (auto it = ids_.find(term); it != ids_.end()) return it->second;
    auto id = static_cast<TermId>(terms_.size());
    terms_.emplace_back(term);
    ids_.emplace(terms_.back(), id);
    return id;
}

std::optional<TermId> Vocabulary::find(std::string_view term) const {
    if (auto it = ids_.find(term); it != ids_.end()) return it->second;
    return std::nullopt;
}

TermCounts::TermCounts(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end());
    for (const auto& [term, count] : entries) {
        if (count == 0) continue;
        if (!entries_.empty() && entries_.back().first == term) {
            entries_.back().second += count;
        } else {
            entries_.emplace_back(term, count);
        }
        length_ += count;
    }
}

TermCounts TermCounts::from_tokens(std::span<const std::string> tokens, Vocabulary& vocab) {
    std::vector<Entry> entries;
    entries.reserve(tokens.size());
    for (const auto& t : tokens) entries.emplace_back(vocab.intern(t), 1u);
    return TermCounts(std::move(entries));
}

std::uint32_t TermCounts::count(TermId term) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), term,
                               [](const Entry& e, TermId t) { return e.first < t; });
    return it != entries_.end() && it->first == term ? it->second : 0;
}

TermCounts& TermCounts::operator+=(const TermCounts& other) {
    std::vector<Entry> merged;
    merged.reserve(entries_.size() + other.entries_.size());
    auto a = entries_.cbegin();
    auto b = other.entries_.cbegin();
    while (a != entries_.cend() || b != other.entries_.cend()) {
        if (b == other.entries_.cend() || (a != entries_.cend() && a->first < b->first)) {
            merged.push_back(*a++);
        } else if (a == entries_.cend() || b->first < a->first) {
            merged.push_back(*b++);
        } else {
            merged.emplace_back(a->first, a->second + b->second);
            ++a;
            ++b;
        }
    }
    entries_ = std::move(merged);
    length_ += other.length_;
    return *this;
}

TermCounts bow(const Document& doc, const PipelineConfig& config, Vocabulary& vocab) {
    auto tokens = tokenize(document_text(doc, config), config);
    return TermCounts::from_tokens(tokens, vocab);
}

TermCounts boc(const TermCounts& bow_counts, const Lexicon& lexicon, const Vocabulary& vocab) {
    std::vector<TermCounts::Entry> kept;
    for (const auto& e : bow_counts.entries()) {
        if (lexicon.contains(vocab.term(e.first))) kept.push_back(e);
    }
    return TermCounts(std::move(kept));
}

// ---------------------------------------------------------------------------

IndexedCorpus::IndexedCorpus(const Corpus& corpus, PipelineConfig config, Lexicon lexicon)
    : config_(std::move(config)), lexicon_(std::move(lexicon)) {
    auto raw_config = config_;
    raw_config.lowercase = false;
    docs_.reserve(corpus.size());
    for (const auto& [id, doc] : corpus) {
        IndexedDocument indexed;
        auto text = document_text(doc, config_);
        auto raw = tokenize(text, raw_config);
        std::vector<std::string> lowered;
        lowered.reserve(raw.size());
        for (const auto& t : raw) {
            lowered.push_back(config_.lowercase ? lowercase_utf8(t) : t);
        }
        indexed.bow = TermCounts::from_tokens(lowered, vocab_);
        indexed.boc = boc(indexed.bow, lexicon_, vocab_);
        for (std::size_t k = 0; k < raw.size(); ++k) {
            if (lexicon_.contains(lowered[k])) indexed.embed_tokens_boc.push_back(raw[k]);
        }
        indexed.embed_tokens = std::move(raw);
        docs_.emplace(id, std::move(indexed));
    }
}

const IndexedDocument& IndexedCorpus::at(const std::string& doc_id) const {
    auto it = docs_.find(doc_id);
    if (it == docs_.end()) throw Error(ErrorKind::Contract, "document " + doc_id + " is not in the corpus");
    return it->second;
}

}  // namespace seedrank
