#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "claimmatch/corpus.hpp"
#include "claimmatch/error.hpp"
#include "claimmatch/textproc.hpp"
#include "gen.hpp"

using namespace claimmatch;

namespace {

const char* kMinimal =
    R"({"kind":"tweet","id":"t1","lang":"en","text":"dam broke"})"
    "\n"
    R"({"kind":"tweet","id":"t2","lang":"en","text":"the dam is broken","link_preview":"Kerala floods"})"
    "\n"
    R"({"kind":"article","id":"a1","lang":"en","title":"Dam rumour","body":["No dam broke.","Officials deny."]})"
    "\n"
    R"({"kind":"pair","tweet_id":"t1","article_id":"a1","label":"match"})"
    "\n"
    R"({"kind":"pair","tweet_id":"t2","article_id":"a1","label":"match"})"
    "\n";

Corpus parse(const std::string& text) {
    std::istringstream in(text);
    return ingest_corpus(in);
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::data);
        return e.what();
    }
    return "";
}

Article make_article(std::vector<std::string> body, std::optional<std::string> title = std::nullopt) {
    Article a;
    a.id = "a";
    a.title = std::move(title);
    a.body = std::move(body);
    return a;
}

}  // namespace

TEST_SUITE("corpus") {
    TEST_CASE("minimal corpus") {
        Corpus c = parse(kMinimal);
        CHECK(c.tweets().size() == 2);
        CHECK(c.articles().size() == 1);
        CHECK(c.pairs().size() == 2);
        REQUIRE(c.partitions().size() == 1);
        CHECK(c.partitions().begin()->first == "en-en");
        CHECK(c.positive_keys("en-en").size() == 2);

        auto r = validate_corpus(c);
        CHECK(r.partitions.size() == 1);
        CHECK(r.n_pairs == 2);
        CHECK(r.orphan_tweets.empty());
        CHECK(r.orphan_articles.empty());
        CHECK(r.duplicate_pairs.empty());
    }

    TEST_CASE("dangling reference names id and line") {
        std::string bad = std::string(kMinimal) + R"({"kind":"pair","tweet_id":"t1","article_id":"a99","label":"match"})" + "\n";
        std::string msg = error_of(bad);
        CHECK(msg.find("a99") != std::string::npos);
        CHECK(msg.find("line 6") != std::string::npos);
    }

    TEST_CASE("malformed input") {
        CHECK(error_of("{not json\n").find("line 1") != std::string::npos);
        CHECK(error_of(R"({"kind":"tweet","id":"t","lang":"fr","text":"x"})").find("fr") != std::string::npos);
        CHECK(!error_of(R"({"kind":"tweet","id":"t","lang":"en","text":"   "})").empty());
        CHECK(!error_of(R"({"kind":"article","id":"a","lang":"en","body":["  "]})").empty());
        CHECK(!error_of(R"({"kind":"article","id":"a","lang":"en","body":"text"})").empty());
        CHECK(!error_of(R"({"kind":"widget"})").empty());
        // duplicate ids
        CHECK(!error_of(std::string(kMinimal) + R"({"kind":"tweet","id":"t1","lang":"en","text":"again"})").empty());
        // ingested corpora hold positives only
        CHECK(!error_of(std::string(kMinimal) +
                        R"({"kind":"pair","tweet_id":"t1","article_id":"a1","label":"not_match"})")
                   .empty());
    }

    TEST_CASE("unknown fields are ignored with a warning") {
        std::vector<std::string> warnings;
        auto prev = set_warning_sink([&](const std::string& w) { warnings.push_back(w); });
        Corpus c = parse(R"({"kind":"tweet","id":"t","lang":"en","text":"x","extra":1})"
                         "\n"
                         R"({"kind":"tweet","id":"u","lang":"en","text":"y","extra":2})");
        set_warning_sink(prev);
        CHECK(c.tweets().size() == 2);
        CHECK(warnings.size() == 1);
    }

    TEST_CASE("orphans and duplicates") {
        std::string text = std::string(kMinimal) +
                           R"({"kind":"article","id":"a2","lang":"en","body":["unused"]})" + "\n" +
                           R"({"kind":"pair","tweet_id":"t1","article_id":"a1","label":"match"})" + "\n" +
                           R"({"kind":"pair","tweet_id":"t1","article_id":"a1","label":"match"})" + "\n";
        auto r = validate_corpus(parse(text));
        CHECK(r.orphan_articles == std::vector<std::string>{"a2"});
        CHECK(r.duplicate_pairs.size() == 1);
        CHECK(r.n_pairs == 4);
    }

    TEST_CASE("round trip") {
        Corpus c = parse(kMinimal);
        std::ostringstream out;
        write_corpus(c, out);
        Corpus d = parse(out.str());
        REQUIRE(d.tweets().size() == c.tweets().size());
        for (std::size_t i = 0; i < c.tweets().size(); ++i) {
            CHECK(d.tweets()[i].id == c.tweets()[i].id);
            CHECK(d.tweets()[i].text == c.tweets()[i].text);
            CHECK(d.tweets()[i].link_preview == c.tweets()[i].link_preview);
        }
        CHECK(d.articles()[0].body == c.articles()[0].body);
        CHECK(d.articles()[0].title == c.articles()[0].title);
        CHECK(d.pairs().size() == c.pairs().size());
        std::ostringstream again;
        write_corpus(d, again);
        CHECK(again.str() == out.str());
    }

    TEST_CASE("query_text") {
        Tweet t{"t", Lang::en, "dam broke", std::nullopt};
        CHECK(query_text(t) == "dam broke");
        t.link_preview = "Kerala floods: officials deny";
        CHECK(query_text(t) == "dam broke Kerala floods: officials deny");
        t = {"t", Lang::en, "x  ", std::string("y")};
        CHECK(query_text(t) == "x y");
        t.link_preview = "   ";
        CHECK(query_text(t) == "x  ");
    }

    TEST_CASE("property: query_text keeps the tweet text as prefix") {
        Rng rng(77);
        for (int i = 0; i < 300; ++i) {
            Tweet t{"t", Lang::en, "x" + gen::unicode_text(rng, rng.below(10), false), std::nullopt};
            if (rng.below(2)) t.link_preview = gen::unicode_text(rng, rng.below(6), false);
            const std::string q = query_text(t);
            const std::string_view head = rtrim(t.text);
            CHECK(q.compare(0, head.size(), head) == 0);
            if (!t.link_preview || trim(*t.link_preview).empty()) CHECK(q == t.text);
        }
    }

    TEST_CASE("chunking examples") {
        ChunkConfig cfg;
        cfg.include_title = false;

        std::string ten;
        for (int i = 0; i < 10; ++i) ten += "tok ";
        auto one = chunk_article(make_article({ten}), cfg);
        REQUIRE(one.size() == 1);
        CHECK(one[0].token_count == 10);

        std::string thousand;
        for (int i = 0; i < 1000; ++i) thousand += "same ";
        auto two = chunk_article(make_article({thousand}), cfg);
        REQUIRE(two.size() == 2);
        CHECK(two[0].token_count == 512);
        CHECK(two[1].token_count == 488);
        CHECK(two[0].text + two[1].text == thousand);

        auto three = chunk_article(make_article({"one.", "two.", "three."}), cfg);
        REQUIRE(three.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) CHECK(three[i].chunk_index == i);
    }

    TEST_CASE("title becomes paragraph zero") {
        auto a = make_article({"body text"}, "Headline here");
        auto with = chunk_article(a, ChunkConfig{512, true});
        REQUIRE(with.size() == 2);
        CHECK(with[0].text == "Headline here");
        CHECK(chunk_article(a, ChunkConfig{512, false}).size() == 1);
        CHECK(article_text(a) == "Headline here\n\nbody text");
        CHECK(article_text(a, false) == "body text");
    }

    TEST_CASE("long paragraphs split at sentence ends") {
        ChunkConfig cfg{6, false};
        auto chunks = chunk_article(make_article({"a b c. d e f. g h i j k l m n. o."}), cfg);
        std::vector<std::string> texts;
        for (auto& c : chunks) texts.push_back(c.text);
        CHECK(texts == std::vector<std::string>{"a b c. d e f. ", "g h i j k l ", "m n. o."});
    }

    TEST_CASE("devanagari sentence marks split too") {
        ChunkConfig cfg{3, false};
        auto chunks = chunk_article(make_article({"एक दो। तीन चार॥ पांच"}), cfg);
        REQUIRE(chunks.size() == 2);
        CHECK(chunks[0].text == "एक दो। ");
        CHECK(chunks[1].text == "तीन चार॥ पांच");
    }

    TEST_CASE("property: partition counts sum to the pair count") {
        Rng rng(5);
        const Lang langs[] = {Lang::en, Lang::hi, Lang::es, Lang::pt};
        for (int iter = 0; iter < 50; ++iter) {
            std::vector<Tweet> tweets;
            std::vector<Article> articles;
            std::vector<Pair> pairs;
            const std::size_t nt = 1 + rng.below(15), na = 1 + rng.below(10);
            for (std::size_t i = 0; i < nt; ++i) tweets.push_back({"t" + std::to_string(i), langs[rng.below(4)], "x", {}});
            for (std::size_t i = 0; i < na; ++i) articles.push_back(Article{"a" + std::to_string(i), langs[rng.below(4)], {}, {"y"}});
            const std::size_t np = rng.below(30);
            for (std::size_t i = 0; i < np; ++i) {
                pairs.push_back({tweets[rng.below(nt)].id, articles[rng.below(na)].id, Label::match,
                                 PairSource::ingested, std::nullopt});
            }
            Corpus c = Corpus::from_parts(tweets, articles, pairs);
            std::size_t sum = 0;
            for (const auto& [tag, part] : c.partitions()) sum += part.pairs.size();
            CHECK(sum == np);
            auto r = validate_corpus(c);
            std::size_t rsum = 0;
            for (const auto& p : r.partitions) rsum += p.pairs;
            CHECK(rsum == np);
        }
    }

    TEST_CASE("property: chunk bound and reconstruction") {
        Rng rng(99);
        for (int iter = 0; iter < 300; ++iter) {
            std::vector<std::string> body;
            for (std::size_t p = 0, n = 1 + rng.below(4); p < n; ++p) {
                body.push_back("p " + gen::unicode_text(rng, 1 + rng.below(400)));
            }
            const std::size_t limit = 1 + rng.below(40);
            auto chunks = chunk_article(make_article(body), ChunkConfig{limit, false});
            std::vector<std::string> rebuilt(body.size());
            for (const auto& c : chunks) {
                CHECK(c.token_count <= limit);
                CHECK(c.token_count == token_count(c.text));
                rebuilt[c.paragraph_index] += c.text;
            }
            CHECK(rebuilt == body);
        }
    }

    TEST_CASE("datasets round trip through jsonl") {
        Corpus c = parse(kMinimal);
        LabeledDataset ds{"en-en",
                          {{"t1", "a1", Label::match, PairSource::ingested, std::nullopt},
                           {"t2", "a1", Label::match, PairSource::ingested, std::nullopt}}};
        std::ostringstream out;
        write_dataset(ds, out);
        std::istringstream in(out.str());
        auto back = read_dataset(in, c);
        CHECK(back.partition == "en-en");
        CHECK(back.pairs.size() == 2);
        CHECK(back.count(Label::match) == 2);
    }
}
