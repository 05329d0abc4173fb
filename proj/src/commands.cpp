#include "seedrank/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <memory>
#include <unordered_set>

#include <json.hpp>

#include "seedrank/error.hpp"
#include "seedrank/experiments.hpp"
#include "strings.hpp"

namespace seedrank {

namespace fs = std::filesystem;

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "corpus",        "topics",      "qrels",        "lexicon",         "embeddings", "stopwords",
        "output_dir",    "annotator",   "method",       "representation",  "variant",    "include_title",
        "lambda",        "alpha",       "bm25_k1",      "bm25_b",          "undersample_cap",
        "rng_seed",      "fraction",    "repetitions",  "min_relevant",    "threads",
    };
    return keys;
}

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
    throw Error(ErrorKind::Config, key + ": invalid value '" + value + "' (" + why + ")");
}

double parse_real(const std::string& key, const std::string& value) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || p != value.data() + value.size()) bad_value(key, value, "expected a number");
    return out;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& value) {
    Int out = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || p != value.data() + value.size()) {
        bad_value(key, value, "expected a non-negative integer");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "expected true or false");
}

}  // namespace

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
    try {
        if (key == "corpus") c.corpus = value;
        else if (key == "topics") c.topics = value;
        else if (key == "qrels") c.qrels = value;
        else if (key == "lexicon") c.lexicon = value;
        else if (key == "embeddings") c.embeddings = value;
        else if (key == "stopwords") c.stopwords = value;
        else if (key == "output_dir") c.output_dir = value;
        else if (key == "annotator") c.annotator = value;
        else if (key == "method") c.method = parse_method(value);
        else if (key == "representation") c.representation = parse_representation(value);
        else if (key == "variant") c.variant = parse_variant(value);
        else if (key == "include_title") c.include_title = parse_bool(key, value);
        else if (key == "lambda") c.params.lambda = parse_real(key, value);
        else if (key == "alpha") c.params.alpha = parse_real(key, value);
        else if (key == "bm25_k1") c.params.bm25_k1 = parse_real(key, value);
        else if (key == "bm25_b") c.params.bm25_b = parse_real(key, value);
        else if (key == "undersample_cap") c.params.undersample_cap = parse_int<std::size_t>(key, value);
        else if (key == "rng_seed") c.params.rng_seed = parse_int<std::uint64_t>(key, value);
        else if (key == "fraction") c.fraction = parse_real(key, value);
        else if (key == "repetitions") c.repetitions = parse_int<std::size_t>(key, value);
        else if (key == "min_relevant") c.min_relevant = parse_int<std::size_t>(key, value);
        else if (key == "threads") c.threads = parse_int<std::size_t>(key, value);
        else throw Error(ErrorKind::Config, key + ": unknown configuration key");
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config && !detail::starts_with(e.what(), key + ":")) {
            throw Error(ErrorKind::Config, key + ": " + e.what());
        }
        throw;
    }
}

RunConfig config_from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
    RunConfig config;
    for (const auto& [key, value] : doc.items()) {
        set_config_value(config, key, value.is_string() ? value.get<std::string>() : value.dump());
    }
    return config;
}

RunConfig load_config(const fs::path& path) {
    return config_from_json_text(read_file(path));
}

void apply_env_overrides(RunConfig& config, const std::string& prefix) {
    for (const auto& key : config_keys()) {
        auto name = prefix + key;
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::toupper(ch); });
        if (const char* v = std::getenv(name.c_str())) set_config_value(config, key, v);
    }
}

void validate_config(const RunConfig& c, Command command) {
    auto require_file = [](const char* field, const fs::path& p) {
        if (p.empty()) throw Error(ErrorKind::Config, std::string(field) + ": required");
        if (!fs::is_regular_file(p)) {
            throw Error(ErrorKind::Config, std::string(field) + ": file not found: " + p.string());
        }
    };
    auto optional_file = [&](const char* field, const fs::path& p) {
        if (!p.empty()) require_file(field, p);
    };
    if (command == Command::Eval || command == Command::Compare) return;

    require_file("corpus", c.corpus);
    require_file("topics", c.topics);
    require_file("qrels", c.qrels);
    optional_file("stopwords", c.stopwords);
    optional_file("lexicon", c.lexicon);
    if (command != Command::Analyze && c.representation == Representation::Boc && c.lexicon.empty() &&
        c.annotator.empty()) {
        throw Error(ErrorKind::Config, "lexicon: required for representation BOC (or set annotator)");
    }
    if (command != Command::Analyze && needs_embeddings(c.method)) {
        if (c.embeddings.empty()) {
            throw Error(ErrorKind::Config,
                        "embeddings: required for method " + std::string(to_string(c.method)));
        }
        require_file("embeddings", c.embeddings);
    }
    c.params.validate();
    if (!(c.fraction > 0.0 && c.fraction <= 1.0)) throw Error(ErrorKind::Config, "fraction: must be in (0,1]");
    if (c.repetitions == 0) throw Error(ErrorKind::Config, "repetitions: must be positive");
    if (c.min_relevant == 0) throw Error(ErrorKind::Config, "min_relevant: must be positive");
    if (c.threads == 0) throw Error(ErrorKind::Config, "threads: must be positive");
    if (c.output_dir.empty()) throw Error(ErrorKind::Config, "output_dir: required");
}

// ---------------------------------------------------------------------------

namespace {

// Everything a command needs, loaded once. Not movable: ctx points into it.
struct Workspace {
    Corpus corpus;
    std::vector<Topic> topics;
    std::unique_ptr<IndexedCorpus> index;
    std::unique_ptr<EmbeddingTable> embeddings;
    AesCache aes;
    RankingContext ctx;
    std::vector<std::string> warnings;

    Workspace() = default;
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;
};

std::unique_ptr<Workspace> load_workspace(const RunConfig& c, Command command, std::size_t min_relevant) {
    validate_config(c, command);
    auto ws = std::make_unique<Workspace>();
    ws->corpus = load_corpus(c.corpus);
    auto topic_set = load_topics(c.topics, c.qrels);
    if (topic_set.added_candidates > 0) {
        ws->warnings.push_back(std::to_string(topic_set.added_candidates) +
                               " judged documents were missing from topic candidate lists and were added");
    }

    std::size_t missing = 0;
    for (auto& topic : topic_set.topics) {
        auto known = [&](const std::string& id) { return ws->corpus.count(id) > 0; };
        auto before = topic.candidate_ids.size();
        std::erase_if(topic.candidate_ids, [&](const std::string& id) { return !known(id); });
        missing += before - topic.candidate_ids.size();
        std::erase_if(topic.judged_order, [&](const std::string& id) { return !known(id); });
        std::erase_if(topic.judgments, [&](const auto& kv) { return !known(kv.first); });
    }
    if (missing > 0) {
        ws->warnings.push_back(std::to_string(missing) + " candidates are absent from the corpus and were dropped");
    }
    auto kept = filter_topics(topic_set.topics, min_relevant);
    if (kept.size() < topic_set.topics.size()) {
        ws->warnings.push_back(std::to_string(topic_set.topics.size() - kept.size()) + " topics have fewer than " +
                               std::to_string(min_relevant) + " relevant studies and were skipped");
    }
    ws->topics = std::move(kept);

    PipelineConfig pipeline;
    pipeline.variant = c.variant;
    pipeline.include_title = c.include_title;
    if (!c.stopwords.empty()) pipeline.stopwords = load_stopwords(c.stopwords);

    Lexicon lexicon;
    if (!c.lexicon.empty()) {
        lexicon = load_lexicon(c.lexicon);
    } else if (!c.annotator.empty()) {
        std::vector<Document> docs;
        for (const auto& [id, d] : ws->corpus) docs.push_back(d);
        lexicon = fetch_annotations(c.annotator, docs);
    }
    if (lexicon.empty() && (c.representation == Representation::Boc || command == Command::Analyze)) {
        ws->warnings.push_back("lexicon is empty; BOC representations are empty");
    }
    ws->index = std::make_unique<IndexedCorpus>(ws->corpus, std::move(pipeline), std::move(lexicon));
    ws->ctx.corpus = ws->index.get();

    if (command != Command::Analyze && needs_embeddings(c.method)) {
        ws->embeddings = std::make_unique<EmbeddingTable>(load_embeddings(c.embeddings));
        std::vector<std::string> ids;
        for (const auto& t : ws->topics) ids.insert(ids.end(), t.candidate_ids.begin(), t.candidate_ids.end());
        ws->aes = build_aes_cache(*ws->index, *ws->embeddings, c.representation, ids);
        ws->ctx.embeddings = ws->embeddings.get();
        (c.representation == Representation::Bow ? ws->ctx.aes_bow : ws->ctx.aes_boc) = &ws->aes;
    }
    return ws;
}

std::string file_safe(std::string s) {
    for (auto& ch : s) {
        if (ch == '/' || ch == '\\' || ch == ':') ch = '_';
    }
    return s;
}

void emit(CommandResult& result, const fs::path& path, const std::string& contents) {
    write_file_atomic(path, contents);
    result.written.push_back(path);
}

void emit_run(CommandResult& result, const fs::path& path, const RankedRun& run) {
    write_run(run.entries, path);
    result.written.push_back(path);
}

std::string method_dir(const RunConfig& c) {
    auto tag = run_tag(c.method, c.representation);
    if (c.representation == Representation::Bow && c.variant == PipelineVariant::Lee) tag += "-LEE";
    return file_safe(tag);
}

}  // namespace

CommandResult cmd_rank(const RunConfig& c) {
    auto ws = load_workspace(c, Command::Rank, std::max<std::size_t>(2, c.min_relevant));
    CommandResult result;
    result.warnings = ws->warnings;
    auto single = loocv_single(ws->ctx, ws->topics, c.method, c.representation, c.params, c.threads);
    const auto dir = c.output_dir / "runs" / method_dir(c);
    for (std::size_t i = 0; i < single.runs.size(); ++i) {
        emit_run(result, dir / file_safe(single.runs[i].topic_id) / (file_safe(single.seeds[i]) + ".run"),
                 single.runs[i]);
    }
    emit(result, c.output_dir / "metrics.csv", single.report.to_csv());
    result.topics_processed = ws->topics.size();
    return result;
}

CommandResult cmd_multi(const RunConfig& c) {
    auto ws = load_workspace(c, Command::Multi, std::max<std::size_t>(3, c.min_relevant));
    CommandResult result;
    result.warnings = ws->warnings;
    auto multi = run_multi(ws->ctx, ws->topics, c.method, c.representation, c.params, c.fraction, c.threads);
    const auto tag = method_dir(c);
    for (std::size_t i = 0; i < multi.groups.size(); ++i) {
        const auto topic = file_safe(multi.groups[i].topic_id);
        const auto name = "w" + std::to_string(multi.groups[i].window_index) + ".run";
        emit_run(result, c.output_dir / "runs" / ("multi-" + tag) / topic / name, multi.multi_runs[i]);
        emit_run(result, c.output_dir / "runs" / ("oracle-" + tag) / topic / name, multi.oracle[i].run);
    }
    emit(result, c.output_dir / "multi_metrics.csv", multi.multi_report.to_csv());
    emit(result, c.output_dir / "oracle_metrics.csv", multi.oracle_report.to_csv());
    emit(result, c.output_dir / "comparison.csv", multi.comparison_csv());
    result.topics_processed = ws->topics.size();
    return result;
}

CommandResult cmd_analyze(const RunConfig& c) {
    auto ws = load_workspace(c, Command::Analyze, std::max<std::size_t>(2, c.min_relevant));
    CommandResult result;
    result.warnings = ws->warnings;

    std::vector<Representation> reprs{Representation::Bow};
    if (!ws->index->lexicon().empty()) reprs.push_back(Representation::Boc);

    std::string intra = "topic_id,representation,rel_mean,irrel_mean\n";
    std::string common = "topic_id,representation,term,fraction\n";
    std::string hist = "topic_id,representation,bin_low,bin_high,terms\n";
    std::string vocab = "representation,vocabulary_size\n";

    std::vector<IntraSimilarity> sims(ws->topics.size() * reprs.size());
    std::vector<TermCommonality> comms(sims.size());
    parallel_for(sims.size(), c.threads, [&](std::size_t i) {
        const auto& topic = ws->topics[i / reprs.size()];
        const auto repr = reprs[i % reprs.size()];
        sims[i] = intra_similarity(*ws->index, topic, repr, c.repetitions, c.params.rng_seed);
        comms[i] = term_commonality(*ws->index, topic, repr);
    });

    for (std::size_t i = 0; i < sims.size(); ++i) {
        const auto& tid = ws->topics[i / reprs.size()].topic_id;
        const std::string r(to_string(reprs[i % reprs.size()]));
        intra += tid + ',' + r + ',' + detail::format_double(sims[i].rel_mean) + ',' +
                 detail::format_double(sims[i].irrel_mean) + '\n';
        for (const auto& [term, f] : comms[i].fractions) {
            common += tid + ',' + r + ',' + term + ',' + detail::format_double(f) + '\n';
        }
        for (std::size_t b = 0; b < comms[i].histogram.size(); ++b) {
            hist += tid + ',' + r + ',' + detail::format_double(b / 10.0) + ',' +
                    detail::format_double((b + 1) / 10.0) + ',' + std::to_string(comms[i].histogram[b]) + '\n';
        }
    }

    for (auto repr : reprs) {
        std::unordered_set<TermId> terms;
        for (const auto& topic : ws->topics) {
            for (const auto& id : topic.candidate_ids) {
                for (const auto& e : ws->index->at(id).counts(repr).entries()) terms.insert(e.first);
            }
        }
        vocab += std::string(to_string(repr)) + ',' + std::to_string(terms.size()) + '\n';
    }

    const auto dir = c.output_dir / "analysis";
    emit(result, dir / "intra_similarity.csv", intra);
    emit(result, dir / "term_commonality.csv", common);
    emit(result, dir / "commonality_histogram.csv", hist);
    emit(result, dir / "vocabulary.csv", vocab);
    result.topics_processed = ws->topics.size();
    return result;
}

std::string cmd_eval(const fs::path& run_path, const fs::path& qrels_path, const std::vector<std::size_t>& cutoffs) {
    auto entries = load_run(run_path);
    auto qrels = load_qrels(qrels_path);
    auto per_topic = evaluate_runs(entries, qrels, cutoffs);
    ExperimentReport report;
    for (const auto& [topic, metrics] : per_topic) report.add(topic, "run", metrics);
    report.finalize();
    return report.to_csv();
}

// ---------------------------------------------------------------------------

namespace {

// metric -> topic -> per-topic mean, metrics in first-seen order.
struct TopicMeans {
    std::vector<std::string> metrics;
    std::map<std::string, std::map<std::string, double>> values;
};

TopicMeans read_topic_means(const std::string& csv, const std::string& label) {
    TopicMeans out;
    std::size_t line_no = 0;
    for (auto line : detail::split_lines(csv)) {
        ++line_no;
        if (line_no == 1 || detail::trim(line).empty()) continue;
        std::vector<std::string_view> f;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                f.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (f.size() != 4) {
            throw Error(ErrorKind::Parse, label + " line " + std::to_string(line_no) + ": expected 4 fields");
        }
        if (f[1] != "mean" || f[0] == "all") continue;
        double v = 0.0;
        auto [p, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), v);
        if (ec != std::errc{} || p != f[3].data() + f[3].size()) {
            throw Error(ErrorKind::Parse, label + " line " + std::to_string(line_no) + ": bad value");
        }
        std::string metric(f[2]);
        if (!out.values.count(metric)) out.metrics.push_back(metric);
        out.values[metric][std::string(f[0])] = v;
    }
    return out;
}

}  // namespace

std::string compare_metric_csv(const std::string& csv_a, const std::string& csv_b, const CompareOptions& o) {
    auto a = read_topic_means(csv_a, o.name_a);
    auto b = read_topic_means(csv_b, o.name_b);
    std::string out = "method_a,method_b,metric,t,p,p_adjusted,significant\n";
    for (const auto& metric : a.metrics) {
        auto bt = b.values.find(metric);
        if (bt == b.values.end()) continue;
        const auto& va = a.values.at(metric);
        const auto& vb = bt->second;
        std::vector<double> xa, xb;
        for (const auto& [topic, v] : va) {
            auto it = vb.find(topic);
            if (it == vb.end()) {
                throw Error(ErrorKind::Contract, metric + ": topic " + topic + " is missing from " + o.name_b);
            }
            xa.push_back(v);
            xb.push_back(it->second);
        }
        if (vb.size() != va.size()) {
            throw Error(ErrorKind::Contract, metric + ": " + o.name_b + " has topics missing from " + o.name_a);
        }
        out += o.name_a + ',' + o.name_b + ',' + metric + ',';
        try {
            auto res = paired_t_test(xa, xb);
            const double adj = bonferroni(res.p, o.comparisons);
            out += detail::format_double(res.t) + ',' + detail::format_double(res.p) + ',' +
                   detail::format_double(adj) + ',' + (adj < o.significance ? "true" : "false") + '\n';
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateTest) throw;
            out += "nan,nan,nan,false\n";
        }
    }
    return out;
}

std::string cmd_compare(const fs::path& metrics_a, const fs::path& metrics_b, const CompareOptions& options) {
    return compare_metric_csv(read_file(metrics_a), read_file(metrics_b), options);
}

}  // namespace seedrank
