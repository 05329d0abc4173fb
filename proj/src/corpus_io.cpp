#include "seedrank/corpus_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "seedrank/error.hpp"
#include "strings.hpp"

namespace seedrank {

namespace {

std::string at_line(std::size_t line_no, std::string_view what) {
    return "line " + std::to_string(line_no) + ": " + std::string(what);
}

}  // namespace

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Parse: return "parse";
        case ErrorKind::DuplicateId: return "duplicate_id";
        case ErrorKind::MissingTopic: return "missing_topic";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Transport: return "transport";
        case ErrorKind::Protocol: return "protocol";
        case ErrorKind::EmptyCollection: return "empty_collection";
        case ErrorKind::EmptyTopic: return "empty_topic";
        case ErrorKind::Contract: return "contract";
        case ErrorKind::InsufficientSeeds: return "insufficient_seeds";
        case ErrorKind::InsufficientDocuments: return "insufficient_documents";
        case ErrorKind::UndefinedMetric: return "undefined_metric";
        case ErrorKind::DegenerateTest: return "degenerate_test";
        case ErrorKind::Config: return "config";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Topic

int Topic::grade(const std::string& doc_id) const {
    auto it = judgments.find(doc_id);
    return it == judgments.end() ? 0 : it->second;
}

std::vector<std::string> Topic::relevant_ids() const {
    std::vector<std::string> out;
    for (const auto& id : judged_order) {
        if (grade(id) >= 1) out.push_back(id);
    }
    return out;
}

std::size_t Topic::num_relevant() const {
    return static_cast<std::size_t>(std::count_if(
        judgments.begin(), judgments.end(), [](const auto& kv) { return kv.second >= 1; }));
}

std::vector<std::string> Topic::irrelevant_ids() const {
    std::vector<std::string> out;
    for (const auto& id : candidate_ids) {
        if (!is_relevant(id)) out.push_back(id);
    }
    return out;
}

std::vector<std::string> RankedRun::doc_ids() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.doc_id);
    return out;
}

// ---------------------------------------------------------------------------
// Lexicon

Lexicon::Lexicon(std::span<const std::string> tokens) {
    for (const auto& t : tokens) insert(t);
}

void Lexicon::insert(std::string_view token) {
    for (auto part : detail::split_ws(token)) {
        terms_.insert(lowercase_utf8(part));
    }
}

// ---------------------------------------------------------------------------
// EmbeddingTable

EmbeddingTable::EmbeddingTable(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw Error(ErrorKind::Parse, "embedding dimension must be positive");
}

void EmbeddingTable::add(std::string token, std::span<const float> vector) {
    if (vector.size() != dimension_) {
        throw Error(ErrorKind::Contract, "embedding for '" + token + "' has dimension " +
                                             std::to_string(vector.size()) + ", expected " +
                                             std::to_string(dimension_));
    }
    auto [it, inserted] = index_.try_emplace(std::move(token), data_.size() / dimension_);
    if (inserted) {
        data_.insert(data_.end(), vector.begin(), vector.end());
    } else {
        std::copy(vector.begin(), vector.end(), data_.begin() + it->second * dimension_);
    }
}

std::span<const float> EmbeddingTable::find(std::string_view token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return {};
    return {data_.data() + it->second * dimension_, dimension_};
}

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Corpus

Corpus parse_corpus(std::string_view text) {
    Corpus corpus;
    std::size_t line_no = 0;
    for (auto line : detail::split_lines(text)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::Parse, at_line(line_no, e.what()));
        }
        if (!record.is_object()) throw Error(ErrorKind::Parse, at_line(line_no, "expected an object"));
        Document doc;
        try {
            doc.doc_id = record.at("doc_id").get<std::string>();
            doc.title = record.at("title").get<std::string>();
            doc.abstract = record.at("abstract").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Parse, at_line(line_no, e.what()));
        }
        if (doc.doc_id.empty()) throw Error(ErrorKind::Parse, at_line(line_no, "empty doc_id"));
        auto id = doc.doc_id;
        if (!corpus.emplace(id, std::move(doc)).second) {
            throw Error(ErrorKind::DuplicateId, at_line(line_no, "duplicate doc_id " + id));
        }
    }
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
    return parse_corpus(read_file(path));
}

// ---------------------------------------------------------------------------
// Topics and qrels

namespace {

struct QrelsLine {
    std::string topic_id;
    std::string doc_id;
    int grade;
};

std::vector<QrelsLine> parse_qrels_lines(std::string_view text) {
    std::vector<QrelsLine> out;
    std::size_t line_no = 0;
    for (auto line : detail::split_lines(text)) {
        ++line_no;
        auto fields = detail::split_ws(line);
        if (fields.empty()) continue;
        if (fields.size() != 4) {
            throw Error(ErrorKind::Parse, at_line(line_no, "qrels line needs 4 fields"));
        }
        int grade = 0;
        auto g = fields[3];
        auto [ptr, ec] = std::from_chars(g.data(), g.data() + g.size(), grade);
        if (ec != std::errc{} || ptr != g.data() + g.size() || grade < 0) {
            throw Error(ErrorKind::Parse,
                        at_line(line_no, "grade '" + std::string(g) + "' is not a non-negative integer"));
        }
        out.push_back({std::string(fields[0]), std::string(fields[2]), grade});
    }
    return out;
}

// Accepts either CLEF TAR topic files ("Topic:" headers with a "Pids:" block)
// or plain lines of "topic_id doc_id [doc_id ...]".
std::vector<Topic> parse_topic_file(std::string_view text) {
    std::vector<Topic> topics;
    std::unordered_map<std::string, std::size_t> index;
    auto topic_for = [&](std::string_view id) -> Topic& {
        auto [it, inserted] = index.try_emplace(std::string(id), topics.size());
        if (inserted) {
            topics.emplace_back();
            topics.back().topic_id = std::string(id);
        }
        return topics[it->second];
    };

    bool clef = false;
    for (auto line : detail::split_lines(text)) {
        if (detail::starts_with(detail::trim(line), "Topic:")) {
            clef = true;
            break;
        }
    }

    std::vector<std::unordered_set<std::string>> seen;
    auto add_candidate = [&](Topic& topic, std::string_view doc_id) {
        std::size_t ti = index.at(topic.topic_id);
        if (seen.size() <= ti) seen.resize(ti + 1);
        if (seen[ti].insert(std::string(doc_id)).second) topic.candidate_ids.emplace_back(doc_id);
    };

    if (clef) {
        Topic* current = nullptr;
        bool in_pids = false;
        for (auto raw : detail::split_lines(text)) {
            auto line = detail::trim(raw);
            if (detail::starts_with(line, "Topic:")) {
                current = &topic_for(detail::trim(line.substr(6)));
                in_pids = false;
            } else if (detail::starts_with(line, "Pids:")) {
                in_pids = true;
            } else if (detail::starts_with(line, "Title:") || detail::starts_with(line, "Query:")) {
                in_pids = false;
            } else if (in_pids && current != nullptr && !line.empty()) {
                add_candidate(*current, line);
            }
        }
    } else {
        for (auto line : detail::split_lines(text)) {
            auto fields = detail::split_ws(line);
            if (fields.empty()) continue;
            auto& topic = topic_for(fields[0]);
            for (std::size_t i = 1; i < fields.size(); ++i) add_candidate(topic, fields[i]);
        }
    }
    return topics;
}

}  // namespace

TopicSet parse_topics(std::string_view topics_text, std::string_view qrels_text) {
    TopicSet out;
    out.topics = parse_topic_file(topics_text);
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::unordered_set<std::string>> members(out.topics.size());
    for (std::size_t i = 0; i < out.topics.size(); ++i) {
        index.emplace(out.topics[i].topic_id, i);
        members[i].insert(out.topics[i].candidate_ids.begin(), out.topics[i].candidate_ids.end());
    }

    for (auto& q : parse_qrels_lines(qrels_text)) {
        auto it = index.find(q.topic_id);
        if (it == index.end()) {
            throw Error(ErrorKind::MissingTopic,
                        "topic " + q.topic_id + " is in qrels but not in the topic file");
        }
        auto& topic = out.topics[it->second];
        auto [jt, inserted] = topic.judgments.try_emplace(q.doc_id, q.grade);
        if (inserted) {
            topic.judged_order.push_back(q.doc_id);
        } else {
            jt->second = q.grade;
        }
        if (members[it->second].insert(q.doc_id).second) {
            topic.candidate_ids.push_back(q.doc_id);
            ++out.added_candidates;
        }
    }
    return out;
}

TopicSet load_topics(const std::filesystem::path& topics_path,
                     const std::filesystem::path& qrels_path) {
    return parse_topics(read_file(topics_path), read_file(qrels_path));
}

std::map<std::string, Qrels> parse_qrels(std::string_view text) {
    std::map<std::string, Qrels> out;
    for (auto& q : parse_qrels_lines(text)) out[q.topic_id][q.doc_id] = q.grade;
    return out;
}

std::map<std::string, Qrels> load_qrels(const std::filesystem::path& path) {
    return parse_qrels(read_file(path));
}

std::vector<Topic> filter_topics(std::span<const Topic> topics, std::size_t min_relevant) {
    std::vector<Topic> out;
    std::copy_if(topics.begin(), topics.end(), std::back_inserter(out),
                 [&](const Topic& t) { return t.num_relevant() >= min_relevant; });
    return out;
}

// ---------------------------------------------------------------------------
// Runs

void validate_run(std::span<const RunEntry> entries) {
    struct Cursor {
        std::size_t next_rank = 1;
        double last_score = 0.0;
    };
    std::unordered_map<std::string, Cursor> topics;
    for (const auto& e : entries) {
        auto [it, fresh] = topics.try_emplace(e.topic_id);
        auto& cur = it->second;
        if (e.rank != cur.next_rank) {
            throw Error(ErrorKind::Validation, "topic " + e.topic_id + ": expected rank " +
                                                   std::to_string(cur.next_rank) + ", got " +
                                                   std::to_string(e.rank));
        }
        if (!fresh && e.score > cur.last_score) {
            throw Error(ErrorKind::Validation,
                        "topic " + e.topic_id + ": score increases at rank " + std::to_string(e.rank));
        }
        if (e.doc_id.empty() || e.tag.empty()) {
            throw Error(ErrorKind::Validation, "topic " + e.topic_id + ": empty doc_id or tag");
        }
        ++cur.next_rank;
        cur.last_score = e.score;
    }
}

std::string format_run(std::span<const RunEntry> entries) {
    validate_run(entries);
    std::string out;
    char buf[64];
    for (const auto& e : entries) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, e.score);
        out += e.topic_id;
        out += " Q0 ";
        out += e.doc_id;
        out += ' ';
        out += std::to_string(e.rank);
        out += ' ';
        out.append(buf, end);
        out += ' ';
        out += e.tag;
        out += '\n';
    }
    return out;
}

void write_run(std::span<const RunEntry> entries, const std::filesystem::path& path) {
    write_file_atomic(path, format_run(entries));
}

std::vector<RunEntry> parse_run(std::string_view text) {
    std::vector<RunEntry> out;
    std::size_t line_no = 0;
    for (auto line : detail::split_lines(text)) {
        ++line_no;
        auto f = detail::split_ws(line);
        if (f.empty()) continue;
        if (f.size() != 6) throw Error(ErrorKind::Parse, at_line(line_no, "run line needs 6 fields"));
        RunEntry e;
        e.topic_id = std::string(f[0]);
        e.doc_id = std::string(f[2]);
        e.tag = std::string(f[5]);
        auto [rp, rec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), e.rank);
        if (rec != std::errc{} || rp != f[3].data() + f[3].size() || e.rank == 0) {
            throw Error(ErrorKind::Parse, at_line(line_no, "bad rank '" + std::string(f[3]) + "'"));
        }
        auto [sp, sec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), e.score);
        if (sec != std::errc{} || sp != f[4].data() + f[4].size()) {
            throw Error(ErrorKind::Parse, at_line(line_no, "bad score '" + std::string(f[4]) + "'"));
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<RunEntry> load_run(const std::filesystem::path& path) {
    return parse_run(read_file(path));
}

// ---------------------------------------------------------------------------
// Lexicon and embeddings

Lexicon load_lexicon(const std::filesystem::path& path) {
    Lexicon lex;
    const auto text = read_file(path);
    for (auto line : detail::split_lines(text)) lex.insert(line);
    return lex;
}

EmbeddingTable parse_embeddings(std::string_view text) {
    auto lines = detail::split_lines(text);
    std::size_t i = 0;
    while (i < lines.size() && detail::trim(lines[i]).empty()) ++i;
    if (i == lines.size()) throw Error(ErrorKind::Parse, "embedding file is empty");
    auto header = detail::split_ws(lines[i]);
    std::size_t vocab = 0, dim = 0;
    if (header.size() != 2 ||
        std::from_chars(header[0].data(), header[0].data() + header[0].size(), vocab).ec != std::errc{} ||
        std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim).ec != std::errc{} ||
        dim == 0) {
        throw Error(ErrorKind::Parse, at_line(i + 1, "expected header 'vocab_size dimension'"));
    }
    EmbeddingTable table(dim);
    std::vector<float> row(dim);
    std::size_t rows = 0;
    for (++i; i < lines.size(); ++i) {
        auto f = detail::split_ws(lines[i]);
        if (f.empty()) continue;
        if (f.size() != dim + 1) {
            throw Error(ErrorKind::Parse, at_line(i + 1, "expected " + std::to_string(dim) +
                                                             " values, got " +
                                                             std::to_string(f.size() - 1)));
        }
        for (std::size_t d = 0; d < dim; ++d) {
            auto s = f[d + 1];
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), row[d]);
            if (ec != std::errc{} || p != s.data() + s.size()) {
                throw Error(ErrorKind::Parse, at_line(i + 1, "bad value '" + std::string(s) + "'"));
            }
        }
        table.add(std::string(f[0]), row);
        ++rows;
    }
    if (rows != vocab) {
        throw Error(ErrorKind::Parse, "header declares " + std::to_string(vocab) + " rows, found " +
                                          std::to_string(rows));
    }
    return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
    return parse_embeddings(read_file(path));
}

}  // namespace seedrank
