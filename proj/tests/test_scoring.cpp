#include <doctest.h>

#include <cmath>
#include <random>

#include "seedrank/corpus_io.hpp"
#include "seedrank/error.hpp"
#include "seedrank/scoring.hpp"
#include "support/reference.hpp"

using namespace seedrank;

namespace {

const double kLn2 = std::log(2.0);
const double kLn3 = std::log(3.0);

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Io;
}

std::vector<const TermCounts*> ptrs(const std::vector<TermCounts>& v) {
    std::vector<const TermCounts*> out;
    for (auto& x : v) out.push_back(&x);
    return out;
}

// Corpus of space-separated words; every doc is a candidate of topic T.
struct Hand {
    Corpus corpus;
    Topic topic;
    std::unique_ptr<IndexedCorpus> index;
    RankingContext ctx;

    Hand(std::vector<std::pair<std::string, std::string>> docs, std::vector<std::string> relevant) {
        topic.topic_id = "T";
        for (auto& [id, text] : docs) {
            corpus[id] = Document{id, "", text};
            topic.candidate_ids.push_back(id);
        }
        for (auto& id : relevant) {
            topic.judgments[id] = 1;
            topic.judged_order.push_back(id);
        }
        PipelineConfig cfg;
        cfg.stopwords.clear();
        index = std::make_unique<IndexedCorpus>(corpus, cfg, Lexicon{});
        ctx.corpus = index.get();
    }

    ref::Bag bag(const std::string& id) const {
        ref::Bag b;
        std::istringstream in(corpus.at(id).abstract);
        for (std::string w; in >> w;) b[w]++;
        return b;
    }
};

}  // namespace

TEST_CASE("gamma") {
    TfIdfVector s({{0, 1.0}, {1, 2.0}});
    std::vector<TfIdfVector> self{s};
    CHECK(gamma(self, s) == doctest::Approx(1.0));
    CHECK(gamma(std::vector<TfIdfVector>{}, s) == 0.0);
    std::vector<double> sims{std::sqrt(0.5), 0.0};
    CHECK(gamma(sims) == doctest::Approx(0.3536).epsilon(1e-4));
    // vectors with cosines 0.7071 and 0 to the seed
    TfIdfVector seed({{0, 1.0}, {1, 1.0}});
    std::vector<TfIdfVector> d{TfIdfVector({{0, 1.0}}), TfIdfVector({{2, 1.0}})};
    CHECK(gamma(d, seed) == doctest::Approx(std::sqrt(0.5) / 2).epsilon(1e-12));
}

TEST_CASE("phi on the two-candidate example") {
    // seed {a,b}; d1={a}, d2={b}; a=0, b=1
    std::vector<TermCounts> cands{TermCounts({{0, 1}}), TermCounts({{1, 1}})};
    auto p = ptrs(cands);
    auto stats = build_stats(p);
    TermCounts seed({{0, 1}, {1, 1}});
    auto sv = tfidf(seed, stats);
    std::vector<TfIdfVector> cv{tfidf(cands[0], stats), tfidf(cands[1], stats)};
    CHECK(cosine(cv[0], sv) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    const double fa = phi(0, seed, sv, p, cv, ScoringParams{});
    CHECK(std::abs(fa - kLn2) < 1e-9);
    CHECK(std::abs(phi(1, seed, sv, p, cv, ScoringParams{}) - kLn2) < 1e-9);

    // term in the seed but in no candidate
    TermCounts seed2({{0, 1}, {1, 1}, {2, 4}});
    CHECK(phi(2, seed2, tfidf(seed2, stats), p, cv, ScoringParams{}) == 0.0);
    CHECK(kind_of([&] { phi(5, seed, sv, p, cv, ScoringParams{}); }) == ErrorKind::Contract);
}

TEST_CASE("phi from gammas") {
    CHECK(phi_from_gammas(0.4, 0.2) == doctest::Approx(kLn3).epsilon(1e-12));
    CHECK(phi_from_gammas(0.0, 0.3) == 0.0);
    CHECK(phi_from_gammas(0.0, 0.0) == 0.0);
    CHECK(phi_from_gammas(0.3, 0.0) == kLn2);
    CHECK(phi_from_gammas(0.25, 0.25) == kLn2);
}

TEST_CASE("qlm score by hand") {
    // cand {a:2, b:8}, other doc {c:10}: L=10, p(a|C)=2/20=0.1
    std::vector<TermCounts> docs{TermCounts({{0, 2}, {1, 8}}), TermCounts({{2, 10}})};
    auto stats = build_stats(docs);
    ScoringParams p;
    p.lambda = 0.5;
    TermCounts seed({{0, 1}});
    CHECK(std::abs(qlm_score(seed, docs[0], stats, p) - kLn3) < 1e-9);
    CHECK(qlm_score(seed, docs[1], stats, p) == 0.0);
    p.lambda = 1.0 - 1e-12;
    CHECK(qlm_score(seed, docs[0], stats, p) < 1e-9);
}

TEST_CASE("qlm is non-decreasing in the candidate term count") {
    // stats and candidate length held fixed; only c(t, cand) moves
    std::vector<TermCounts> docs{TermCounts({{0, 10}, {1, 30}}), TermCounts({{0, 3}, {2, 9}})};
    auto stats = build_stats(docs);
    TermCounts seed({{0, 2}, {2, 1}});
    ScoringParams p;
    double prev = -1.0;
    for (std::uint32_t c = 1; c < 40; ++c) {
        const double s = qlm_score(seed, TermCounts({{0, c}, {1, 40 - c}}), stats, p);
        CHECK(s >= prev);
        prev = s;
    }
}

TEST_CASE("sdr score") {
    std::vector<TermCounts> docs{TermCounts({{0, 2}, {1, 8}}), TermCounts({{2, 10}})};
    auto stats = build_stats(docs);
    ScoringParams p;
    p.lambda = 0.5;
    TermCounts seed({{0, 1}});
    std::vector<double> w{kLn2};
    CHECK(sdr_score(seed, docs[0], stats, p, w) == doctest::Approx(0.7614).epsilon(1e-4));
    CHECK(std::abs(sdr_score(seed, docs[0], stats, p, w) - kLn2 * kLn3) < 1e-12);
    std::vector<double> zero{0.0};
    CHECK(sdr_score(seed, docs[0], stats, p, zero) == 0.0);
    std::vector<double> missing{};
    CHECK(kind_of([&] { sdr_score(seed, docs[0], stats, p, missing); }) == ErrorKind::Contract);
    std::vector<double> nan{std::nan("")};
    CHECK(kind_of([&] { sdr_score(seed, docs[0], stats, p, nan); }) == ErrorKind::Contract);

    TermCounts seed3({{0, 3}, {1, 1}, {2, 2}});
    std::vector<double> ones(3, 1.0);
    for (auto& d : docs) CHECK(sdr_score(seed3, d, stats, p, ones) == qlm_score(seed3, d, stats, p));
}

TEST_CASE("bm25 by hand") {
    std::vector<TermCounts> docs{TermCounts({{0, 1}, {1, 1}}), TermCounts({{2, 1}, {3, 1}})};
    auto stats = build_stats(docs);
    TermCounts seed({{0, 1}});
    CHECK(std::abs(bm25_score(seed, docs[0], stats, ScoringParams{}) - kLn2) < 1e-12);
    CHECK(bm25_score(seed, docs[1], stats, ScoringParams{}) == 0.0);

    std::vector<TermCounts> lens{TermCounts({{0, 1}}), TermCounts({{0, 1}, {1, 7}}), TermCounts({{2, 1}})};
    auto s2 = build_stats(lens);
    ScoringParams b0;
    b0.bm25_b = 0.0;
    CHECK(bm25_score(seed, lens[0], s2, b0) == bm25_score(seed, lens[1], s2, b0));
    CHECK(bm25_score(seed, lens[0], s2, ScoringParams{}) > bm25_score(seed, lens[1], s2, ScoringParams{}));
}

TEST_CASE("aes score") {
    auto table = parse_embeddings("3 2\na 1 0\nb 0 1\nc 1 1\n");
    std::vector<std::string> ab{"a", "b"}, a{"a"}, c{"c"}, oov{"zz"};
    CHECK(aes_score(ab, ab, table) == doctest::Approx(1.0));
    CHECK(aes_score(oov, ab, table) == 0.0);
    CHECK(aes_score(a, c, table) == doctest::Approx(0.7071).epsilon(1e-4));
    CHECK(aes_score(a, ab, table) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("minmax") {
    auto m = minmax(ScoredList({{"x", 2}, {"y", 4}, {"z", 6}})).score_map();
    CHECK(m["x"] == 0.0);
    CHECK(m["y"] == 0.5);
    CHECK(m["z"] == 1.0);
    for (auto& e : minmax(ScoredList({{"x", 3}, {"y", 3}})).entries()) CHECK(e.score == 0.0);
    CHECK(minmax(ScoredList({{"x", 5}})).entries()[0].score == 0.0);
    CHECK(kind_of([] { minmax(ScoredList{}); }) == ErrorKind::Contract);
}

TEST_CASE("interpolate") {
    ScoredList sdr({{"d", 1.0}, {"e", 0.0}}), aes({{"d", 0.0}, {"e", 1.0}});
    auto m = interpolate(sdr, aes, 0.3).score_map();
    CHECK(m["d"] == doctest::Approx(0.7));
    CHECK(interpolate(sdr, aes, 0.0).doc_ids() == sdr.doc_ids());
    CHECK(interpolate(sdr, aes, 1.0).doc_ids() == aes.doc_ids());
    CHECK(kind_of([&] { interpolate(sdr, ScoredList({{"d", 0.0}, {"f", 1.0}}), 0.3); }) == ErrorKind::Contract);
    CHECK(kind_of([&] { interpolate(sdr, ScoredList({{"d", 0.0}}), 0.3); }) == ErrorKind::Contract);
}

TEST_CASE("scored lists break ties by doc id") {
    ScoredList l({{"b", 1.0}, {"c", 2.0}, {"a", 1.0}});
    CHECK(l.doc_ids() == std::vector<std::string>{"c", "a", "b"});
    auto run = to_run(l, "T", "x");
    CHECK(run.entries[2].rank == 3);
    CHECK(run.entries[0].score == 2.0);
}

TEST_CASE("params validation") {
    ScoringParams p;
    CHECK_NOTHROW(p.validate());
    for (double l : {0.0, 1.0, -0.1}) {
        p = {};
        p.lambda = l;
        CHECK(kind_of([&] { p.validate(); }) == ErrorKind::Config);
    }
    p = {};
    p.alpha = 1.5;
    CHECK(kind_of([&] { p.validate(); }) == ErrorKind::Config);
    p = {};
    p.undersample_cap = 0;
    CHECK(kind_of([&] { p.validate(); }) == ErrorKind::Config);
    CHECK(parse_method("SDR+AES") == Method::SdrAes);
    CHECK(parse_method("sdr") == Method::Sdr);
    CHECK(kind_of([] { parse_method("tfidf"); }) == ErrorKind::Config);
}

TEST_CASE("rank: only the sharing candidate scores") {
    Hand h({{"s", "heart valve"}, {"d1", "heart murmur"}, {"d2", "kidney stone"}}, {"s"});
    std::vector<std::string> sid{"s"};
    auto seed = make_seed(*h.index, sid);
    for (auto m : {Method::Qlm, Method::Sdr, Method::Bm25}) {
        auto run = rank(h.ctx, h.topic, seed, m, Representation::Bow, ScoringParams{});
        REQUIRE(run.entries.size() == 2);
        CHECK(run.entries[0].doc_id == "d1");
        CHECK(run.entries[1].score == 0.0);
    }
}

TEST_CASE("rank: four candidates against the brute-force reference") {
    Hand h({{"s", "heart rate heart valve"},
            {"c1", "heart valve surgery outcome"},
            {"c2", "rate variability heart"},
            {"c3", "heart heart rate monitor monitor"},
            {"c4", "kidney stone valve"}},
           {"s"});
    std::vector<std::string> names{"c1", "c2", "c3", "c4"};
    std::vector<ref::Bag> coll;
    for (auto& n : names) coll.push_back(h.bag(n));
    auto seed_bag = h.bag("s");

    std::vector<std::string> sid{"s"};
    auto seed = make_seed(*h.index, sid);
    for (bool sdr : {true, false}) {
        std::vector<double> expect;
        for (auto& c : coll) expect.push_back(ref::score(seed_bag, c, coll, 0.7, sdr));
        auto run = rank(h.ctx, h.topic, seed, sdr ? Method::Sdr : Method::Qlm, Representation::Bow, ScoringParams{});
        CHECK(run.doc_ids() == ref::order(names, expect));
        for (auto& e : run.entries) {
            auto i = std::find(names.begin(), names.end(), e.doc_id) - names.begin();
            CHECK(std::abs(e.score - expect[i]) < 1e-9);
        }
    }
    std::vector<double> bm;
    for (auto& c : coll) bm.push_back(ref::bm25(seed_bag, c, coll, 1.2, 0.75));
    auto run = rank(h.ctx, h.topic, seed, Method::Bm25, Representation::Bow, ScoringParams{});
    CHECK(run.doc_ids() == ref::order(names, bm));
}

TEST_CASE("seeds are excluded before statistics") {
    Hand h({{"s", "alpha beta"}, {"d1", "alpha"}, {"d2", "beta gamma"}}, {"s"});
    std::vector<std::string> sid{"s"};
    auto pool = make_pool(*h.index, h.topic, sid, Representation::Bow);
    CHECK(pool.doc_ids == std::vector<std::string>{"d1", "d2"});
    CHECK(pool.stats.num_docs() == 2);
    CHECK(pool.stats.total_tokens() == 3);

    Hand lone({{"s", "alpha"}}, {"s"});
    CHECK(kind_of([&] { make_pool(*lone.index, lone.topic, sid, Representation::Bow); }) == ErrorKind::EmptyTopic);

    auto bad = h.topic;
    bad.candidate_ids.push_back("ghost");
    CHECK(kind_of([&] { make_pool(*h.index, bad, sid, Representation::Bow); }) == ErrorKind::Contract);
}

TEST_CASE("term weights agree with phi evaluated one term at a time") {
    std::mt19937 rng(21);
    for (int r = 0; r < 20; ++r) {
        std::vector<std::pair<std::string, std::string>> docs;
        for (int d = 0; d < 12; ++d) {
            std::string t;
            for (int k = 0; k < 8; ++k) t += "w" + std::to_string(rng() % 15) + " ";
            docs.emplace_back("d" + std::to_string(d), t);
        }
        Hand h(docs, {"d0"});
        std::vector<std::string> sid{"d0"};
        auto seed = make_seed(*h.index, sid);
        auto pool = make_pool(*h.index, h.topic, sid, Representation::Bow);
        ScoringParams p;
        auto w = sdr_term_weights(pool, seed.bow, p, 0);
        auto sv = tfidf(seed.bow, pool.stats);
        std::vector<TfIdfVector> cv;
        for (auto* c : pool.counts) cv.push_back(tfidf(*c, pool.stats));
        REQUIRE(w.size() == seed.bow.unique_terms());
        for (std::size_t i = 0; i < w.size(); ++i) {
            const auto t = seed.bow.entries()[i].first;
            CHECK(std::abs(w[i] - phi(t, seed.bow, sv, pool.counts, cv, p)) < 1e-12);
            // and the string-map reference
            std::vector<ref::Bag> coll;
            for (auto& id : pool.doc_ids) coll.push_back(h.bag(id));
            CHECK(std::abs(w[i] - ref::phi(h.index->vocabulary().term(t), h.bag("d0"), coll)) < 1e-9);
        }
    }
}

TEST_CASE("under-sampling is deterministic and exact when partitions fit") {
    std::vector<std::pair<std::string, std::string>> docs;
    std::mt19937 rng(4);
    for (int d = 0; d < 60; ++d) {
        std::string t;
        for (int k = 0; k < 6; ++k) t += "w" + std::to_string(rng() % 10) + " ";
        docs.emplace_back("d" + std::to_string(d), t);
    }
    Hand h(docs, {"d0"});
    std::vector<std::string> sid{"d0"};
    auto seed = make_seed(*h.index, sid);
    auto pool = make_pool(*h.index, h.topic, sid, Representation::Bow);
    ScoringParams exact, big, small;
    big.undersample = true;
    big.undersample_cap = 1000;
    small.undersample = true;
    small.undersample_cap = 5;
    CHECK(sdr_term_weights(pool, seed.bow, exact, 1) == sdr_term_weights(pool, seed.bow, big, 1));
    auto a = sdr_term_weights(pool, seed.bow, small, 7);
    CHECK(a == sdr_term_weights(pool, seed.bow, small, 7));
    for (double x : a) CHECK(x >= 0.0);
    bool differs = false;
    for (std::uint64_t k = 8; k < 20 && !differs; ++k) differs = sdr_term_weights(pool, seed.bow, small, k) != a;
    CHECK(differs);
}

TEST_CASE("aes ranking needs embeddings") {
    Hand h({{"s", "alpha"}, {"d1", "alpha"}}, {"s"});
    std::vector<std::string> sid{"s"};
    auto seed = make_seed(*h.index, sid);
    CHECK(kind_of([&] { rank(h.ctx, h.topic, seed, Method::Aes, Representation::Bow, ScoringParams{}); }) ==
          ErrorKind::Config);

    auto table = parse_embeddings("3 2\nalpha 1 0\nbeta 0 1\ngamma 1 1\n");
    Hand g({{"s", "alpha"}, {"d1", "beta"}, {"d2", "gamma"}, {"d3", "alpha alpha"}}, {"s"});
    g.ctx.embeddings = &table;
    auto sq = make_seed(*g.index, sid);
    auto run = rank(g.ctx, g.topic, sq, Method::Aes, Representation::Bow, ScoringParams{});
    CHECK(run.doc_ids() == std::vector<std::string>{"d3", "d2", "d1"});
    CHECK(run.entries[1].score == doctest::Approx(std::sqrt(0.5)));

    // cached vectors give the same run
    std::vector<std::string> ids{"d1", "d2", "d3"};
    auto cache = build_aes_cache(*g.index, table, Representation::Bow, ids);
    g.ctx.aes_bow = &cache;
    CHECK(rank(g.ctx, g.topic, sq, Method::Aes, Representation::Bow, ScoringParams{}) == run);

    auto both = rank(g.ctx, g.topic, sq, Method::SdrAes, Representation::Bow, ScoringParams{});
    CHECK(both.entries.size() == 3);
    CHECK(both.tag == "SDR+AES-BOW");
}
