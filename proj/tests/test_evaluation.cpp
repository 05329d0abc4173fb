#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "seedrank/error.hpp"
#include "seedrank/evaluation.hpp"
#include "support/reference.hpp"

using namespace seedrank;

namespace {

std::vector<RunEntry> run_of(const std::vector<std::string>& ids) {
    std::vector<RunEntry> out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out.push_back({"T", ids[i], i + 1, double(ids.size() - i), "x"});
    }
    return out;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Io;
}

}  // namespace

TEST_CASE("average precision by hand") {
    Qrels q{{"a", 1}, {"c", 1}, {"b", 0}};
    auto run = run_of({"a", "b", "c"});
    CHECK(average_precision(run, q) == doctest::Approx(0.8333).epsilon(1e-4));
    CHECK(std::abs(average_precision(run, q) - 5.0 / 6) < 1e-12);
    CHECK(average_precision(run_of({"a", "c", "b"}), q) == 1.0);
    CHECK(average_precision(run_of({"a"}), q) == 0.5);
    CHECK(kind_of([&] { average_precision(run, Qrels{{"a", 0}}); }) == ErrorKind::UndefinedMetric);
}

TEST_CASE("graded judgments count as relevant") {
    Qrels q{{"a", 2}, {"b", 0}};
    CHECK(average_precision(run_of({"b", "a"}), q) == 0.5);
}

TEST_CASE("precision and recall") {
    Qrels q;
    std::vector<std::string> ids;
    for (int i = 0; i < 12; ++i) ids.push_back("d" + std::to_string(i));
    q["d2"] = 1;
    q["d7"] = 1;
    q["d11"] = 1;
    CHECK(precision_at(run_of(ids), q, 10) == doctest::Approx(0.2));
    CHECK(recall_at(run_of(ids), q, 10) == doctest::Approx(2.0 / 3));

    Qrels five;
    for (int i = 0; i < 5; ++i) five["d" + std::to_string(i * 20)] = 1;
    std::vector<std::string> many;
    for (int i = 0; i < 150; ++i) many.push_back("d" + std::to_string(i));
    CHECK(recall_at(run_of(many), five, 100) == 1.0);

    Qrels one{{"x", 1}};
    CHECK(precision_at(run_of({"y", "x", "z"}), one, 10) == doctest::Approx(0.1));
    CHECK(kind_of([&] { recall_at(run_of({"x"}), Qrels{}, 10); }) == ErrorKind::UndefinedMetric);
}

TEST_CASE("ndcg by hand") {
    Qrels q{{"a", 1}, {"c", 1}};
    auto v = ndcg_at(run_of({"a", "b", "c"}), q, 3);
    CHECK(v == doctest::Approx(0.9197).epsilon(1e-4));
    CHECK(std::abs(v - 1.5 / (1 + 1 / std::log2(3.0))) < 1e-12);
    CHECK(ndcg_at(run_of({"a", "c", "b"}), q, 3) == doctest::Approx(1.0));
    CHECK(ndcg_at(run_of({"b", "x", "y", "a"}), q, 3) == 0.0);
}

TEST_CASE("last relevant and work saved") {
    Qrels q{{"d2", 1}};
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("d" + std::to_string(i));
    CHECK(last_rel_percent(run_of(ids), q) == doctest::Approx(0.3));
    CHECK(wss(run_of(ids), q) == doctest::Approx(0.7));
    CHECK(wss(run_of(ids), Qrels{{"d9", 1}}) == 0.0);
    auto four = run_of({"a", "b", "c", "d"});
    CHECK(last_rel_percent(four, Qrels{{"a", 1}}) == 0.25);
    CHECK(wss(four, Qrels{{"a", 1}}) == 0.75);
    CHECK(kind_of([&] { last_rel_percent(four, Qrels{{"zz", 1}}); }) == ErrorKind::UndefinedMetric);
}

TEST_CASE("evaluate names and omissions") {
    Qrels q{{"a", 1}, {"zz", 1}};
    auto m = evaluate(run_of({"a", "b"}), q);
    std::vector<std::string> names;
    for (auto& [n, v] : m.values()) names.push_back(n);
    CHECK(names == std::vector<std::string>{"MAP", "P@10", "P@100", "P@1000", "R@10", "R@100", "R@1000",
                                            "nDCG@10", "nDCG@100", "nDCG@1000", "LastRel%", "WSS"});
    auto none = evaluate(run_of({"b"}), q);
    CHECK_FALSE(none.get("LastRel%").has_value());
    CHECK_FALSE(none.get("WSS").has_value());
    CHECK(none.at("MAP") == 0.0);
}

TEST_CASE("metrics are rank-determined") {
    Qrels q{{"a", 1}, {"c", 1}};
    auto run = run_of({"a", "b", "c"});
    auto moved = run;
    for (auto& e : moved) e.score = std::exp(e.score) * 10 + 3;
    CHECK(evaluate(run, q) == evaluate(moved, q));
}

TEST_CASE("reversed perfect ranking minimises AP and nDCG") {
    std::vector<std::string> ids{"a", "b", "c", "d", "e", "f"};
    Qrels q{{"a", 1}, {"b", 1}};
    auto rev = run_of({"f", "e", "d", "c", "b", "a"});
    const double min_ap = average_precision(rev, q), min_ndcg = ndcg_at(rev, q, 6);
    std::sort(ids.begin(), ids.end());
    do {
        auto r = run_of(ids);
        CHECK(average_precision(r, q) >= min_ap - 1e-15);
        CHECK(ndcg_at(r, q, 6) >= min_ndcg - 1e-15);
    } while (std::next_permutation(ids.begin(), ids.end()));
}

TEST_CASE("random small runs match the brute-force reference") {
    std::mt19937 rng(77);
    for (int r = 0; r < 200; ++r) {
        const int n = 1 + rng() % 8;
        std::vector<std::string> ids;
        std::vector<int> rel;
        Qrels q;
        for (int i = 0; i < n; ++i) {
            ids.push_back("d" + std::to_string(i));
            rel.push_back(rng() % 2);
            if (rel.back()) q[ids.back()] = 1;
            else if (rng() % 2) q[ids.back()] = 0;
        }
        const int extra = rng() % 3;  // relevant but not retrieved
        for (int i = 0; i < extra; ++i) q["u" + std::to_string(i)] = 1;
        int R = extra;
        for (int x : rel) R += x;
        if (R == 0) continue;
        auto run = run_of(ids);
        CHECK(std::abs(average_precision(run, q) - ref::ap(rel, R)) < 1e-9);
        for (std::size_t k : {1, 3, 5, 10}) {
            CHECK(std::abs(precision_at(run, q, k) - ref::p_at(rel, k)) < 1e-9);
            CHECK(std::abs(recall_at(run, q, k) - ref::r_at(rel, R, k)) < 1e-9);
            CHECK(std::abs(ndcg_at(run, q, k) - ref::ndcg(rel, R, k)) < 1e-9);
        }
        if (std::count(rel.begin(), rel.end(), 1) > 0) {
            CHECK(last_rel_percent(run, q) + wss(run, q) == 1.0);
        }
    }
}

TEST_CASE("paired t-test") {
    std::vector<double> a{3.0, 5.0}, b{2.0, 2.0};
    auto r = paired_t_test(a, b);
    CHECK(r.t == doctest::Approx(2.0));
    CHECK(r.df == 1);
    // t with one degree of freedom is Cauchy: p = 1 - 2 atan(t) / pi
    CHECK(std::abs(r.p - (1.0 - 2.0 * std::atan(2.0) / std::numbers::pi)) < 1e-12);
    CHECK(r.p == doctest::Approx(0.2952).epsilon(1e-4));

    // sign flips with argument order, p does not
    auto s = paired_t_test(b, a);
    CHECK(s.t == doctest::Approx(-2.0));
    CHECK(s.p == doctest::Approx(r.p));

    // df = 2: p = 1 - t / sqrt(2 + t^2)
    std::vector<double> c{1.0, 2.0, 6.0}, z{0.0, 0.0, 0.0};
    auto u = paired_t_test(c, z);
    CHECK(std::abs(u.p - (1.0 - u.t / std::sqrt(2.0 + u.t * u.t))) < 1e-12);

    CHECK(kind_of([&] { paired_t_test(a, a); }) == ErrorKind::DegenerateTest);
    std::vector<double> one{1.0};
    CHECK(kind_of([&] { paired_t_test(one, one); }) == ErrorKind::Contract);
    CHECK(kind_of([&] { paired_t_test(a, c); }) == ErrorKind::Contract);
}

TEST_CASE("bonferroni") {
    CHECK(bonferroni(0.01, 5) == doctest::Approx(0.05));
    CHECK(bonferroni(0.3, 5) == 1.0);
    CHECK(bonferroni(0.3, 1) == 0.3);
}
