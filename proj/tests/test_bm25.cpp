#include <doctest.h>

#include <cmath>
#include <sstream>

#include "claimmatch/bm25.hpp"
#include "claimmatch/error.hpp"
#include "claimmatch/random.hpp"
#include "oracles.hpp"

using namespace claimmatch;

namespace {

Bm25Index three_docs(Bm25Params params = {}) {
    std::vector<IndexUnit> units = {{"d1", "d1", "cat sat"}, {"d2", "d2", "cat cat hat"}, {"d3", "d3", "dog ran far"}};
    return Bm25Index::build(units, params, Granularity::full_article);
}

std::vector<std::string> terms(std::initializer_list<const char*> t) { return {t.begin(), t.end()}; }

}  // namespace

TEST_SUITE("bm25") {
    TEST_CASE("three document fixture") {
        auto idx = three_docs();
        CHECK(idx.n_units() == 3);
        CHECK(idx.avg_dl() == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
        CHECK(idx.doc_freq("cat") == 2);
        CHECK(idx.idf("cat") == doctest::Approx(0.470004).epsilon(1e-6));
        CHECK(idx.idf("unseen") == doctest::Approx(std::log(8.0)).epsilon(1e-12));
        // 0.470004 * 2.2 / (1 + 1.2 * (0.25 + 0.75 * 2 / (8/3)))
        CHECK(std::abs(idx.score(terms({"cat"}), "d1") - 0.5235) < 1e-4);
        CHECK(idx.score(terms({"dog"}), "d1") == 0.0);
        CHECK(idx.score({}, "d1") == 0.0);
        CHECK_THROWS_AS(idx.score(terms({"cat"}), "nope"), Error);
    }

    TEST_CASE("search cat hat") {
        auto r = three_docs().search("cat hat", 2);
        REQUIRE(r.entries.size() == 2);
        CHECK(r.entries[0].article_id == "d2");
        CHECK(r.entries[1].article_id == "d1");
        CHECK(three_docs().search("cat", 50).entries.size() == 2);
        CHECK(three_docs().search("zebra", 5).entries.empty());
    }

    TEST_CASE("single document") {
        std::vector<IndexUnit> units = {{"d", "d", "a"}};
        auto idx = Bm25Index::build(units, {}, Granularity::full_article);
        CHECK(idx.avg_dl() == 1.0);
        REQUIRE(idx.postings("a").size() == 1);
        CHECK(idx.postings("a")[0].tf == 1);
    }

    TEST_CASE("idf positive and strictly decreasing in df") {
        std::vector<IndexUnit> units;
        for (int i = 0; i < 10; ++i) {
            std::string text;
            for (int t = 0; t <= i; ++t) text += "t" + std::to_string(t) + " ";
            units.push_back({"d" + std::to_string(i), "d" + std::to_string(i), text});
        }
        auto idx = Bm25Index::build(units, {}, Granularity::full_article);
        double prev = 1e9;
        for (int t = 9; t >= 0; --t) {  // df(t_k) = 10 - k
            double v = idx.idf("t" + std::to_string(t));
            CHECK(v > 0.0);
            CHECK(v < prev);
            prev = v;
        }
    }

    TEST_CASE("paragraph units and max pooling") {
        Article a{"A", Lang::en, std::nullopt, {"alpha beta", "gamma", "delta alpha alpha"}};
        Article b{"B", Lang::en, std::nullopt, {"alpha zeta zeta zeta zeta"}};
        std::vector<const Article*> arts = {&a, &b};
        auto units = make_units(arts, Granularity::paragraph, ChunkConfig{512, false});
        REQUIRE(units.size() == 4);
        CHECK(units[0].unit_id == "A#0");
        CHECK(units[2].article_id == "A");
        auto idx = Bm25Index::build(units, {}, Granularity::paragraph);
        auto r = idx.search("alpha", 10);
        REQUIRE(r.entries.size() == 2);
        double best_a = std::max({idx.score(terms({"alpha"}), "A#0"), idx.score(terms({"alpha"}), "A#2")});
        CHECK(r.entries[0].article_id == "A");
        CHECK(r.entries[0].score == best_a);
    }

    TEST_CASE("paragraph order does not change article ranking") {
        Rng rng(3);
        for (int iter = 0; iter < 30; ++iter) {
            std::vector<Article> arts;
            for (int i = 0; i < 6; ++i) {
                Article a{"a" + std::to_string(i), Lang::en, std::nullopt, {}};
                for (int p = 0; p < 4; ++p) {
                    std::string s;
                    for (std::size_t w = 0, n = 1 + rng.below(6); w < n; ++w) s += "w" + std::to_string(rng.below(8)) + " ";
                    a.body.push_back(s);
                }
                arts.push_back(a);
            }
            auto shuffled = arts;
            for (auto& a : shuffled) rng.shuffle(std::span<std::string>(a.body));
            auto rank = [](const std::vector<Article>& as) {
                std::vector<const Article*> ptrs;
                for (auto& a : as) ptrs.push_back(&a);
                auto idx = Bm25Index::build(make_units(ptrs, Granularity::paragraph, ChunkConfig{512, false}), {},
                                            Granularity::paragraph);
                return idx.search("w1 w3 w5", 10).entries;
            };
            CHECK(rank(arts) == rank(shuffled));
        }
    }

    TEST_CASE("property: additivity over disjoint term sets") {
        Rng rng(11);
        for (int iter = 0; iter < 100; ++iter) {
            std::vector<IndexUnit> units;
            for (int d = 0; d < 8; ++d) {
                std::string s;
                for (std::size_t w = 0, n = 1 + rng.below(10); w < n; ++w) s += "v" + std::to_string(rng.below(12)) + " ";
                units.push_back({"d" + std::to_string(d), "d" + std::to_string(d), s});
            }
            auto idx = Bm25Index::build(units, {}, Granularity::full_article);
            std::vector<std::string> q1, q2, both;
            for (int t = 0; t < 12; ++t) {
                auto& side = rng.below(2) ? q1 : q2;
                if (rng.below(3)) continue;
                side.push_back("v" + std::to_string(t));
                both.push_back("v" + std::to_string(t));
            }
            for (auto& u : units) {
                CHECK(idx.score(both, u.unit_id) ==
                      doctest::Approx(idx.score(q1, u.unit_id) + idx.score(q2, u.unit_id)).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("b = 0 ignores document length") {
        std::vector<IndexUnit> units = {{"short", "short", "x y"}, {"long", "long", "x y z z z z z z z z"}};
        auto idx = Bm25Index::build(units, Bm25Params{1.2, 0.0}, Granularity::full_article);
        CHECK(idx.score(terms({"x"}), "short") == idx.score(terms({"x"}), "long"));
    }

    TEST_CASE("b = 1 with doubled tf and dl at equal avgdl keeps the score") {
        std::vector<IndexUnit> a = {{"d1", "d1", "x y"}, {"d2", "d2", "z z z z w w"}};
        std::vector<IndexUnit> b = {{"d1", "d1", "x y x y"}, {"d2", "d2", "z z w w"}};
        auto ia = Bm25Index::build(a, Bm25Params{1.2, 1.0}, Granularity::full_article);
        auto ib = Bm25Index::build(b, Bm25Params{1.2, 1.0}, Granularity::full_article);
        REQUIRE(ia.avg_dl() == ib.avg_dl());
        CHECK(ia.score(terms({"x"}), "d1") == doctest::Approx(ib.score(terms({"x"}), "d1")).epsilon(1e-12));
    }

    TEST_CASE("search matches the brute-force oracle") {
        Rng rng(424242);
        for (int iter = 0; iter < 100; ++iter) {
            const std::size_t n_docs = 1 + rng.below(20), vocab = 1 + rng.below(15);
            std::vector<IndexUnit> units;
            std::vector<std::pair<std::string, std::vector<std::string>>> docs;
            for (std::size_t d = 0; d < n_docs; ++d) {
                std::vector<std::string> toks;
                std::string s;
                for (std::size_t w = 0, n = 1 + rng.below(12); w < n; ++w) {
                    toks.push_back("t" + std::to_string(rng.below(vocab)));
                    s += toks.back() + " ";
                }
                std::string id = "doc" + std::to_string(d);
                units.push_back({id, id, s});
                docs.emplace_back(id, toks);
            }
            auto idx = Bm25Index::build(units, {}, Granularity::full_article);
            std::vector<std::string> q;
            std::string qs;
            for (std::size_t w = 0, n = 1 + rng.below(4); w < n; ++w) {
                q.push_back("t" + std::to_string(rng.below(vocab + 2)));
                qs += q.back() + " ";
            }
            auto expected = oracle::bm25_rank(docs, q, 1.2, 0.75);
            auto got = idx.search(qs, 1000).entries;
            REQUIRE(got.size() == expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].score == doctest::Approx(expected[i].score).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("save and load") {
        auto idx = three_docs();
        std::stringstream buf;
        idx.save(buf);
        auto back = Bm25Index::load(buf);
        CHECK(back.n_units() == 3);
        CHECK(back.avg_dl() == idx.avg_dl());
        CHECK(back.search("cat hat", 3).entries == idx.search("cat hat", 3).entries);

        std::stringstream wrong(R"({"format":"claimmatch-bm25","version":99})");
        CHECK_THROWS_AS(Bm25Index::load(wrong), Error);
    }

    TEST_CASE("build errors") {
        std::vector<IndexUnit> none;
        CHECK_THROWS_AS(Bm25Index::build(none, {}, Granularity::full_article), Error);
        std::vector<IndexUnit> dup = {{"d", "d", "x"}, {"d", "d", "y"}};
        CHECK_THROWS_AS(Bm25Index::build(dup, {}, Granularity::full_article), Error);
        std::vector<IndexUnit> ok = {{"d", "d", "x"}};
        CHECK_THROWS_AS(Bm25Index::build(ok, Bm25Params{1.2, 1.5}, Granularity::full_article), Error);
        CHECK_THROWS_AS(three_docs().search("cat", 0), Error);
    }
}
