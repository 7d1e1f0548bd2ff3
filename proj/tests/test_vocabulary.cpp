#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "ssnb/errors.hpp"
#include "ssnb/vocabulary.hpp"
#include "test_util.hpp"

using namespace ssnb;
using testutil::TempDir;

namespace {

LabeledCorpus empty_labeled() {
    LabeledCorpus c;
    c.class_names = {"positive", "negative"};
    return c;
}

}  // namespace

TEST_CASE("build_word_pool segments: shuffled labeled, novel unlabeled, fallback") {
    auto labeled = testutil::make_labeled({"positive", "negative"}, {{"a b", 0}});
    auto unlabeled = testutil::make_unlabeled({"b c"});
    std::vector<std::string> fallback = {"d"};

    auto pool = build_word_pool(labeled, empty_labeled(), unlabeled, fallback, 42);

    REQUIRE(pool.size() == 4);
    CHECK(pool.labeled_end == 2);
    CHECK(pool.unlabeled_end == 3);
    std::vector<std::string> head(pool.words.begin(), pool.words.begin() + 2);
    std::sort(head.begin(), head.end());
    CHECK(head == std::vector<std::string>{"a", "b"});
    CHECK(pool.words[2] == "c");
    CHECK(pool.words[3] == "d");
}

TEST_CASE("build_word_pool of empty inputs is empty") {
    auto pool = build_word_pool(empty_labeled(), empty_labeled(), UnlabeledCorpus{}, {}, 0);
    CHECK(pool.size() == 0);
    CHECK(pool.labeled_end == 0);
    CHECK(pool.unlabeled_end == 0);
}

TEST_CASE("build_word_pool holds each distinct word exactly once") {
    auto labeled = testutil::make_labeled({"positive", "negative"},
                                          {{"alpha beta alpha", 0}, {"beta gamma", 1}});
    auto test = testutil::make_labeled({"positive", "negative"}, {{"gamma delta", 0}});
    auto unlabeled = testutil::make_unlabeled({"delta epsilon alpha", "epsilon zeta"});
    std::vector<std::string> fallback = {"zeta", "eta", "eta"};

    auto pool = build_word_pool(labeled, test, unlabeled, fallback, 9);

    std::set<std::string> distinct(pool.words.begin(), pool.words.end());
    CHECK(distinct.size() == pool.size());
    CHECK(distinct == std::set<std::string>{"alpha", "beta", "gamma", "delta", "epsilon", "zeta",
                                            "eta"});
    // test words count as labeled-segment words
    CHECK(pool.labeled_end == 4);   // alpha beta gamma delta
    CHECK(pool.unlabeled_end == 6); // + epsilon zeta
}

TEST_CASE("build_word_pool is seed-deterministic and seed-sensitive") {
    std::vector<std::pair<std::string, int>> docs;
    for (int i = 0; i < 26; ++i)
        docs.emplace_back("w" + std::string(1, char('a' + i)), i % 2);
    auto labeled = testutil::make_labeled({"positive", "negative"}, docs);

    auto p1 = build_word_pool(labeled, empty_labeled(), {}, {}, 5);
    auto p2 = build_word_pool(labeled, empty_labeled(), {}, {}, 5);
    auto p3 = build_word_pool(labeled, empty_labeled(), {}, {}, 6);
    CHECK(p1.words == p2.words);
    CHECK(p1.words != p3.words);

    std::vector<std::string> s1 = p1.words, s3 = p3.words;
    std::sort(s1.begin(), s1.end());
    std::sort(s3.begin(), s3.end());
    CHECK(s1 == s3);  // same words, different order
}

TEST_CASE("truncate keeps the first V pool words with dense indices") {
    OrderedWordPool pool;
    pool.words = {"a", "b", "c"};
    pool.labeled_end = 3;
    pool.unlabeled_end = 3;

    auto vocab = truncate(pool, 2);
    REQUIRE(vocab.size() == 2);
    CHECK(vocab.words == std::vector<std::string>{"a", "b"});
    CHECK(vocab.index.at("a") == 0);
    CHECK(vocab.index.at("b") == 1);
    CHECK(vocab.index.count("c") == 0);

    CHECK(truncate(pool, 3).size() == 3);
    CHECK_THROWS_WITH_AS(truncate(pool, 4), doctest::Contains("fallback wordlist"),
                         validation_error);
}

TEST_CASE("vectorize counts vocabulary words and skips everything else") {
    auto vocab = Vocabulary::from_words({"up", "down", "flat"});
    Sentence s;
    s.id = "x";
    s.tokens = {"up", "up", "down"};

    CHECK(vectorize_dense(s, vocab) == std::vector<uint32_t>{2, 1, 0});

    auto sparse = vectorize(s, vocab);
    REQUIRE(sparse.entries.size() == 2);
    CHECK(sparse.entries[0] == std::pair<uint32_t, uint32_t>{0, 2});
    CHECK(sparse.entries[1] == std::pair<uint32_t, uint32_t>{1, 1});

    s.tokens = {"up", "sideways"};
    CHECK(vectorize_dense(s, vocab) == std::vector<uint32_t>{1, 0, 0});
    CHECK(vectorize(s, vocab).total() == 1);
}

TEST_CASE("vectorized mass never exceeds the token count, equality iff no OOV") {
    auto vocab = Vocabulary::from_words({"gain", "loss"});
    Sentence all_in;
    all_in.tokens = {"gain", "loss", "gain"};
    CHECK(vectorize(all_in, vocab).total() == all_in.tokens.size());

    Sentence with_oov;
    with_oov.tokens = {"gain", "mystery"};
    CHECK(vectorize(with_oov, vocab).total() < with_oov.tokens.size());
}

TEST_CASE("truncations nest: counts at V are a prefix of counts at V + k") {
    OrderedWordPool pool;
    pool.words = {"a", "b", "c", "d", "e"};
    pool.labeled_end = pool.unlabeled_end = 5;
    Sentence s;
    s.tokens = {"e", "a", "c", "a", "d", "q"};

    auto full = vectorize_dense(s, truncate(pool, 5));
    for (uint32_t v = 0; v <= 5; ++v) {
        auto part = vectorize_dense(s, truncate(pool, v));
        REQUIRE(part.size() == v);
        for (uint32_t w = 0; w < v; ++w) CHECK(part[w] == full[w]);
    }
}

TEST_CASE("vectorize_corpus carries labels, class names and vocab size") {
    auto labeled = testutil::make_labeled({"positive", "negative"}, {{"up up", 0}, {"down", 1}});
    auto vocab = Vocabulary::from_words({"up", "down"});
    auto vec = vectorize_corpus(labeled, vocab);
    REQUIRE(vec.size() == 2);
    CHECK(vec.labels == std::vector<int>{0, 1});
    CHECK(vec.class_names == labeled.class_names);
    CHECK(vec.vocab_size == 2);

    auto unl = vectorize_corpus(testutil::make_unlabeled({"down down"}), vocab);
    CHECK(unl.vocab_size == 2);
    CHECK(unl.docs[0].total() == 2);
}

TEST_CASE("synthetic_wordlist is distinct, sized and prefixed") {
    auto words = synthetic_wordlist(800, "q");
    REQUIRE(words.size() == 800);
    CHECK(words[0] == "qaaa");
    CHECK(words[1] == "qaab");
    std::set<std::string> distinct(words.begin(), words.end());
    CHECK(distinct.size() == words.size());
    for (const auto& w : words) CHECK(w.rfind("q", 0) == 0);

    auto other = synthetic_wordlist(3, "zz");
    CHECK(other[0].rfind("zz", 0) == 0);
}

TEST_CASE("load_wordlist reads one word per line, skipping blanks") {
    TempDir tmp;
    auto path = tmp.file("words.txt");
    testutil::write_file(path, "alpha\n\nbeta\ngamma\n\n");
    CHECK(load_wordlist(path) == std::vector<std::string>{"alpha", "beta", "gamma"});
    CHECK_THROWS_AS(load_wordlist(tmp.file("missing.txt")), io_error);
}
