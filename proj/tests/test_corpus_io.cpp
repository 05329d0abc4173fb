#include <doctest.h>

#include <filesystem>

#include "seedrank/corpus_io.hpp"
#include "seedrank/error.hpp"

using namespace seedrank;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Io;
}

std::filesystem::path tmpdir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("seedrank_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("corpus lines parse into documents") {
    auto c = parse_corpus(R"({"doc_id":"123","title":"A","abstract":"B"})");
    REQUIRE(c.size() == 1);
    CHECK(c.at("123") == Document{"123", "A", "B"});
}

TEST_CASE("duplicate doc ids are rejected") {
    auto text = "{\"doc_id\":\"123\",\"title\":\"A\",\"abstract\":\"B\"}\n"
                "{\"doc_id\":\"123\",\"title\":\"C\",\"abstract\":\"D\"}\n";
    CHECK(kind_of([&] { parse_corpus(text); }) == ErrorKind::DuplicateId);
}

TEST_CASE("empty abstract is accepted") {
    auto c = parse_corpus(R"({"doc_id":"9","title":"T","abstract":""})");
    CHECK(c.at("9").abstract.empty());
}

TEST_CASE("malformed corpus line reports its line number") {
    auto text = "{\"doc_id\":\"1\",\"title\":\"A\",\"abstract\":\"B\"}\n{not json\n";
    try {
        parse_corpus(text);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK(kind_of([] { parse_corpus(R"({"doc_id":"","title":"A","abstract":"B"})"); }) == ErrorKind::Parse);
}

TEST_CASE("loading the same corpus twice gives equal maps") {
    auto dir = tmpdir("corpus");
    write_file_atomic(dir / "c.jsonl", "{\"doc_id\":\"1\",\"title\":\"A\",\"abstract\":\"B\"}\n"
                                       "{\"doc_id\":\"2\",\"title\":\"\\u00e9\",\"abstract\":\"x\"}\n");
    CHECK(load_corpus(dir / "c.jsonl") == load_corpus(dir / "c.jsonl"));
    CHECK(load_corpus(dir / "c.jsonl").at("2").title == "\xc3\xa9");
    CHECK(kind_of([&] { load_corpus(dir / "missing.jsonl"); }) == ErrorKind::Io);
}

TEST_CASE("topics attach qrels") {
    auto ts = parse_topics("T1 d1 d2\n", "T1 0 d1 1\n");
    REQUIRE(ts.topics.size() == 1);
    const auto& t = ts.topics[0];
    CHECK(t.topic_id == "T1");
    CHECK(t.relevant_ids() == std::vector<std::string>{"d1"});
    CHECK(t.candidate_ids == std::vector<std::string>{"d1", "d2"});
    CHECK(ts.added_candidates == 0);
}

TEST_CASE("qrels errors") {
    CHECK(kind_of([] { parse_topics("T1 d1 d2\n", "T1 0 d1 -1\n"); }) == ErrorKind::Parse);
    CHECK(kind_of([] { parse_topics("T1 d1 d2\n", "T1 0 d1 x\n"); }) == ErrorKind::Parse);
    CHECK(kind_of([] { parse_topics("T1 d1 d2\n", "T9 0 d1 1\n"); }) == ErrorKind::MissingTopic);
}

TEST_CASE("judged ids missing from the candidate list are appended and counted") {
    auto ts = parse_topics("T1 d1\n", "T1 0 d1 1\nT1 0 d5 0\nT1 0 d6 2\n");
    CHECK(ts.topics[0].candidate_ids == std::vector<std::string>{"d1", "d5", "d6"});
    CHECK(ts.added_candidates == 2);
    CHECK(ts.topics[0].relevant_ids() == std::vector<std::string>{"d1", "d6"});
}

TEST_CASE("seed pool follows qrels order") {
    auto ts = parse_topics("T1 a b c d\n", "T1 0 c 1\nT1 0 a 1\nT1 0 b 0\nT1 0 d 1\n");
    CHECK(ts.topics[0].relevant_ids() == std::vector<std::string>{"c", "a", "d"});
    CHECK(ts.topics[0].irrelevant_ids() == std::vector<std::string>{"b"});
}

TEST_CASE("CLEF style topic files") {
    auto text = "Topic: CD001\n\nTitle: Something\n\nQuery:\nfoo AND bar\n\nPids:\n    111\n    222\n    333\n"
                "Topic: CD002\nPids:\n 444\n";
    auto ts = parse_topics(text, "CD001 0 222 1\nCD002 0 444 1\n");
    REQUIRE(ts.topics.size() == 2);
    CHECK(ts.topics[0].candidate_ids == std::vector<std::string>{"111", "222", "333"});
    CHECK(ts.topics[1].candidate_ids == std::vector<std::string>{"444"});
}

TEST_CASE("filter_topics") {
    std::vector<Topic> topics;
    for (int n : {0, 1, 2, 5}) {
        Topic t;
        t.topic_id = "T" + std::to_string(n);
        for (int i = 0; i < 6; ++i) {
            auto id = t.topic_id + "d" + std::to_string(i);
            t.candidate_ids.push_back(id);
            t.judgments[id] = i < n ? 1 : 0;
            t.judged_order.push_back(id);
        }
        topics.push_back(t);
    }
    auto two = filter_topics(topics, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0].topic_id == "T2");
    CHECK(two[1].topic_id == "T5");
    auto three = filter_topics(topics, 3);
    REQUIRE(three.size() == 1);
    CHECK(three[0].topic_id == "T5");
    CHECK(filter_topics(std::vector<Topic>{}, 2).empty());

    // idempotent and monotone
    for (std::size_t k = 1; k <= 6; ++k) {
        auto once = filter_topics(topics, k);
        auto twice = filter_topics(once, k);
        REQUIRE(once.size() == twice.size());
        for (std::size_t i = 0; i < once.size(); ++i) CHECK(once[i].topic_id == twice[i].topic_id);
        CHECK(filter_topics(topics, k + 1).size() <= once.size());
    }
}

TEST_CASE("run format and round trip") {
    std::vector<RunEntry> one{{"T1", "d1", 1, 2.5, "sdr"}};
    CHECK(format_run(one) == "T1 Q0 d1 1 2.5 sdr\n");

    std::vector<RunEntry> run{{"T1", "d1", 1, 2.5, "sdr"},
                              {"T1", "d2", 2, 0.1 + 0.2, "sdr"},
                              {"T1", "d3", 3, -1e-300, "sdr"}};
    auto dir = tmpdir("run");
    write_run(run, dir / "a" / "b.run");
    CHECK(load_run(dir / "a" / "b.run") == run);
    CHECK(parse_run(format_run(run)) == run);
}

TEST_CASE("run validation") {
    std::vector<RunEntry> gap{{"T1", "d1", 1, 2.0, "x"}, {"T1", "d2", 3, 1.0, "x"}};
    CHECK(kind_of([&] { validate_run(gap); }) == ErrorKind::Validation);
    auto dir = tmpdir("badrun");
    CHECK(kind_of([&] { write_run(gap, dir / "x.run"); }) == ErrorKind::Validation);
    CHECK_FALSE(std::filesystem::exists(dir / "x.run"));

    std::vector<RunEntry> rising{{"T1", "d1", 1, 1.0, "x"}, {"T1", "d2", 2, 2.0, "x"}};
    CHECK(kind_of([&] { validate_run(rising); }) == ErrorKind::Validation);

    // ranks restart per topic
    std::vector<RunEntry> two{{"T1", "d1", 1, 1.0, "x"}, {"T2", "d1", 1, 5.0, "x"}};
    CHECK_NOTHROW(validate_run(two));

    CHECK(kind_of([] { parse_run("T1 Q0 d1 one 2.5 x\n"); }) == ErrorKind::Parse);
    CHECK(kind_of([] { parse_run("T1 Q0 d1 1 2.5\n"); }) == ErrorKind::Parse);
}

TEST_CASE("lexicon lowercases and dedups") {
    auto dir = tmpdir("lex");
    write_file_atomic(dir / "l.txt", "Heart\nheart\n\n  MRI \n");
    auto lex = load_lexicon(dir / "l.txt");
    CHECK(lex.size() == 2);
    CHECK(lex.contains("heart"));
    CHECK(lex.contains("mri"));
    write_file_atomic(dir / "empty.txt", "");
    CHECK(load_lexicon(dir / "empty.txt").empty());
}

TEST_CASE("embeddings") {
    auto t = parse_embeddings("2 2\na 1 0\nb 0 1\n");
    CHECK(t.dimension() == 2);
    CHECK(t.size() == 2);
    REQUIRE(t.find("a").size() == 2);
    CHECK(t.find("a")[0] == 1.0f);
    CHECK(t.find("b")[1] == 1.0f);
    CHECK(t.find("c").empty());
    CHECK(kind_of([] { parse_embeddings("2 3\na 1 0 0 0\n"); }) == ErrorKind::Parse);
    CHECK(kind_of([] { parse_embeddings("2 3\na 1 0 0\n"); }) == ErrorKind::Parse);  // row count
    CHECK(kind_of([] { parse_embeddings("x\n"); }) == ErrorKind::Parse);
}

TEST_CASE("atomic writes leave no temp files") {
    auto dir = tmpdir("atomic");
    write_file_atomic(dir / "f.txt", "one");
    write_file_atomic(dir / "f.txt", "two");
    CHECK(read_file(dir / "f.txt") == "two");
    std::size_t n = 0;
    for ([[maybe_unused]] auto& e : std::filesystem::directory_iterator(dir)) ++n;
    CHECK(n == 1);
}
