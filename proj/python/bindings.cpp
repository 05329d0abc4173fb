#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "seedrank/commands.hpp"
#include "seedrank/corpus_io.hpp"
#include "seedrank/error.hpp"
#include "seedrank/evaluation.hpp"
#include "seedrank/experiments.hpp"
#include "seedrank/scoring.hpp"
#include "seedrank/textproc.hpp"

namespace py = pybind11;
using namespace seedrank;

namespace {

RunConfig config_from_dict(const py::dict& d) {
    RunConfig c;
    for (auto [k, v] : d) {
        auto key = py::str(k).cast<std::string>();
        std::string value;
        if (py::isinstance<py::bool_>(v)) value = v.cast<bool>() ? "true" : "false";
        else value = py::str(v).cast<std::string>();
        set_config_value(c, key, value);
    }
    return c;
}

py::dict result_dict(const CommandResult& r) {
    py::dict out;
    std::vector<std::string> written;
    for (auto& p : r.written) written.push_back(p.string());
    out["written"] = written;
    out["warnings"] = r.warnings;
    out["topics_processed"] = r.topics_processed;
    return out;
}

std::vector<RunEntry> as_run(const std::vector<std::string>& ranked) {
    std::vector<RunEntry> run;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        run.push_back({"q", ranked[i], i + 1, static_cast<double>(ranked.size() - i), "py"});
    }
    return run;
}

Qrels as_qrels(const std::map<std::string, int>& q) { return Qrels(q.begin(), q.end()); }

// Ranks candidates against the seed documents. documents: (doc_id, title, abstract).
std::vector<std::pair<std::string, double>> rank_documents(
    const std::vector<std::tuple<std::string, std::string, std::string>>& documents,
    const std::vector<std::string>& seed_ids, const std::vector<std::string>& candidate_ids,
    const std::string& method, const std::string& representation, const std::vector<std::string>& lexicon,
    const std::string& variant, double lambda, double alpha, std::uint64_t rng_seed, bool undersample,
    const std::optional<std::filesystem::path>& embeddings) {
    Corpus corpus;
    for (const auto& [id, title, abstract] : documents) {
        if (!corpus.emplace(id, Document{id, title, abstract}).second) {
            throw Error(ErrorKind::DuplicateId, "duplicate doc_id " + id);
        }
    }
    PipelineConfig pc;
    pc.variant = parse_variant(variant);
    IndexedCorpus index(corpus, pc, Lexicon(lexicon));
    Topic topic;
    topic.topic_id = "q";
    topic.candidate_ids = candidate_ids;
    ScoringParams params;
    params.lambda = lambda;
    params.alpha = alpha;
    params.rng_seed = rng_seed;
    params.undersample = undersample;
    params.validate();

    std::optional<EmbeddingTable> table;
    AesCache cache;
    RankingContext ctx;
    ctx.corpus = &index;
    const auto m = parse_method(method);
    const auto repr = parse_representation(representation);
    if (needs_embeddings(m)) {
        if (!embeddings) throw Error(ErrorKind::Config, "embeddings: required for method " + method);
        table.emplace(load_embeddings(*embeddings));
        ctx.embeddings = &*table;
        cache = build_aes_cache(index, *table, repr, candidate_ids);
        (repr == Representation::Bow ? ctx.aes_bow : ctx.aes_boc) = &cache;
    }
    auto scored = score_topic(ctx, topic, make_seed(index, seed_ids), m, repr, params);
    std::vector<std::pair<std::string, double>> out;
    for (const auto& e : scored.entries()) out.emplace_back(e.doc_id, e.score);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Seed-driven ranking of candidate studies";

    static py::exception<Error> error(m, "SeedrankError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
        }
    });

    m.def("tokenize",
          [](const std::string& text, const std::string& variant, bool lowercase) {
              PipelineConfig c;
              c.variant = parse_variant(variant);
              c.lowercase = lowercase;
              return tokenize(text, c);
          },
          py::arg("text"), py::arg("variant") = "OURS", py::arg("lowercase") = true);

    m.def("load_corpus", [](const std::filesystem::path& p) {
        std::map<std::string, std::tuple<std::string, std::string>> out;
        for (auto& [id, d] : load_corpus(p)) out[id] = {d.title, d.abstract};
        return out;
    });

    m.def("rank_documents", &rank_documents, py::arg("documents"), py::arg("seed_ids"), py::arg("candidate_ids"),
          py::arg("method") = "SDR", py::arg("representation") = "BOW",
          py::arg("lexicon") = std::vector<std::string>{}, py::arg("variant") = "OURS", py::arg("lambda_") = 0.7,
          py::arg("alpha") = 0.3, py::arg("rng_seed") = 42, py::arg("undersample") = false,
          py::arg("embeddings") = std::nullopt);

    m.def("average_precision", [](const std::vector<std::string>& ranked, const std::map<std::string, int>& q) {
        return average_precision(as_run(ranked), as_qrels(q));
    });
    m.def("precision_at", [](const std::vector<std::string>& ranked, const std::map<std::string, int>& q,
                             std::size_t k) { return precision_at(as_run(ranked), as_qrels(q), k); });
    m.def("recall_at", [](const std::vector<std::string>& ranked, const std::map<std::string, int>& q,
                          std::size_t k) { return recall_at(as_run(ranked), as_qrels(q), k); });
    m.def("ndcg_at", [](const std::vector<std::string>& ranked, const std::map<std::string, int>& q,
                        std::size_t k) { return ndcg_at(as_run(ranked), as_qrels(q), k); });
    m.def("evaluate", [](const std::vector<std::string>& ranked, const std::map<std::string, int>& q) {
        std::vector<std::pair<std::string, double>> out;
        auto ms = evaluate(as_run(ranked), as_qrels(q));
        for (auto& kv : ms.values()) out.push_back(kv);
        return out;
    });

    m.def("paired_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
        auto r = paired_t_test(a, b);
        return py::make_tuple(r.t, r.p, r.df);
    });
    m.def("bonferroni", &bonferroni, py::arg("p"), py::arg("comparisons"));

    m.def("make_groups",
          [](const std::string& topic_id, const std::vector<std::string>& pool, double fraction) {
              std::vector<std::vector<std::string>> out;
              for (auto& g : make_groups(topic_id, pool, fraction)) out.push_back(g.member_ids);
              return out;
          },
          py::arg("topic_id"), py::arg("seed_pool"), py::arg("fraction") = 0.2);

    m.def("cmd_rank", [](const py::dict& d) { return result_dict(cmd_rank(config_from_dict(d))); });
    m.def("cmd_multi", [](const py::dict& d) { return result_dict(cmd_multi(config_from_dict(d))); });
    m.def("cmd_analyze", [](const py::dict& d) { return result_dict(cmd_analyze(config_from_dict(d))); });
    m.def("cmd_eval",
          [](const std::filesystem::path& run, const std::filesystem::path& qrels, std::vector<std::size_t> cutoffs) {
              return cmd_eval(run, qrels, cutoffs);
          },
          py::arg("run"), py::arg("qrels"), py::arg("cutoffs") = std::vector<std::size_t>{10, 100, 1000});
    m.def("cmd_compare",
          [](const std::filesystem::path& a, const std::filesystem::path& b, const std::string& name_a,
             const std::string& name_b, std::size_t comparisons, double significance) {
              return cmd_compare(a, b, CompareOptions{name_a, name_b, comparisons, significance});
          },
          py::arg("metrics_a"), py::arg("metrics_b"), py::arg("name_a") = "a", py::arg("name_b") = "b",
          py::arg("comparisons") = 1, py::arg("significance") = 0.05);
}
