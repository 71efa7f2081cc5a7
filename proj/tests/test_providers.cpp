#include <doctest.h>

#include <cmath>

#include "claimmatch/dense.hpp"
#include "claimmatch/error.hpp"
#include "claimmatch/providers.hpp"
#include "claimmatch/random.hpp"
#include "fake_service.hpp"
#include "oracles.hpp"

using namespace claimmatch;
using nlohmann::json;

namespace {

// Returns whatever it is told to, for contract checks.
class ScriptedProvider final : public EmbeddingProvider {
public:
    std::vector<Vector> reply;
    std::size_t d = 4;
    mutable std::vector<std::string> seen;
    std::string name() const override { return "scripted"; }
    std::size_t dim() const override { return d; }
    std::size_t max_tokens() const override { return 3; }
    std::vector<Vector> embed(std::span<const std::string> texts) const override {
        seen.assign(texts.begin(), texts.end());
        return reply;
    }
};

std::string random_chars(Rng& rng, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += rng.below(6) == 0 ? ' ' : static_cast<char>('a' + rng.below(26));
    return s;
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::usage;
}

std::string message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("providers") {
    TEST_CASE("hashed embedder basics") {
        HashedEmbedder emb(512);
        std::vector<std::string> texts = {"same text", "same text", "a", "b", ""};
        auto v = embed_batch(emb, texts);
        REQUIRE(v.size() == 5);
        CHECK(v[0] == v[1]);
        CHECK(cosine(v[0], v[1]) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(v[2] != v[3]);
        for (float x : v[4]) CHECK(x == 0.0f);
        CHECK(cosine(v[4], v[0]) == 0.0);
        double norm = 0;
        for (float x : v[0]) norm += double(x) * x;
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-6));
        CHECK_THROWS_AS(HashedEmbedder(4), Error);
    }

    TEST_CASE("hashed embedding ignores case and punctuation") {
        CHECK(hashed_embed("Fake NEWS!!", 256) == hashed_embed("fake news", 256));
    }

    TEST_CASE("batch invariance") {
        HashedEmbedder emb(128);
        Rng rng(8);
        std::vector<std::string> xs, ys, all;
        for (int i = 0; i < 7; ++i) xs.push_back(random_chars(rng, 40));
        for (int i = 0; i < 5; ++i) ys.push_back(random_chars(rng, 40));
        all = xs;
        all.insert(all.end(), ys.begin(), ys.end());
        auto a = embed_batch(emb, xs), b = embed_batch(emb, ys), c = embed_batch(emb, all);
        a.insert(a.end(), b.begin(), b.end());
        CHECK(a == c);
    }

    TEST_CASE("unrelated random strings are nearly orthogonal") {
        Rng rng(2024);
        int small = 0;
        for (int i = 0; i < 1000; ++i) {
            auto u = hashed_embed(random_chars(rng, 100), 512);
            auto v = hashed_embed(random_chars(rng, 100), 512);
            if (std::abs(cosine(u, v)) < 0.3) ++small;
        }
        CHECK(small >= 990);
    }

    TEST_CASE("embed_batch contract") {
        ScriptedProvider p;
        std::vector<std::string> two = {"a", "b"};
        p.reply = {Vector(4, 1.0f)};
        CHECK(message_of([&] { embed_batch(p, two); }).find("expected 2 vectors, got 1") != std::string::npos);
        CHECK(kind_of([&] { embed_batch(p, two); }) == ErrorKind::provider);

        p.reply = {Vector(4, 1.0f), Vector(3, 1.0f)};
        CHECK(kind_of([&] { embed_batch(p, two); }) == ErrorKind::provider);

        p.reply = {Vector(4, 1.0f), Vector{1.0f, NAN, 0.0f, 0.0f}};
        CHECK(kind_of([&] { embed_batch(p, two); }) == ErrorKind::provider);

        p.reply = {Vector(4, 1.0f)};
        std::vector<std::string> long_text = {"one two three four five"};
        std::vector<std::string> warnings;
        auto prev = set_warning_sink([&](const std::string& w) { warnings.push_back(w); });
        embed_batch(p, long_text);
        set_warning_sink(prev);
        CHECK(p.seen == std::vector<std::string>{"one two three"});
        CHECK(warnings.size() == 1);

        std::vector<std::string> none;
        CHECK(kind_of([&] { embed_batch(p, none); }) == ErrorKind::usage);
    }

    TEST_CASE("stub translator") {
        StubTranslator tr({{"बांध", "dam"}, {"टूट", "broke"}}, {{Lang::hi, Lang::en}});
        StubTranslator partial({{"बांध", "dam"}}, {{Lang::hi, Lang::en}});
        CHECK(translate(partial, "बांध टूट", Lang::hi, Lang::en) == "dam टूट");
        CHECK(translate(tr, "बांध टूट", Lang::hi, Lang::en) == "dam broke");
        CHECK(translate(tr, "बांध, टूट!", Lang::hi, Lang::en) == "dam, broke!");
        CHECK(translate(tr, "unchanged", Lang::en, Lang::en) == "unchanged");
        CHECK(kind_of([&] { translate(tr, "x", Lang::en, Lang::es); }) == ErrorKind::provider);
    }

    TEST_CASE("http embedding wire protocol") {
        FakeService svc;
        svc.on("/v1/embed", [](const json& req, httplib::Response& res) {
            CHECK(req.at("model") == "tiny");
            json vectors = json::array();
            for (const auto& t : req.at("texts")) {
                const double len = static_cast<double>(t.get<std::string>().size());
                vectors.push_back({len, 1.0, 0.0});
            }
            reply_json(res, {{"dim", 3}, {"vectors", vectors}});
        });
        HttpEmbeddingProvider p({svc.url()}, "tiny");
        CHECK(p.dim() == 3);
        std::vector<std::string> texts = {"ab", "abcd"};
        auto v = embed_batch(p, texts);
        REQUIRE(v.size() == 2);
        CHECK(v[1] == Vector{4.0f, 1.0f, 0.0f});
        CHECK(json::parse(svc.last_body)["texts"] == json{"ab", "abcd"});
    }

    TEST_CASE("http embedding with a path prefix") {
        FakeService svc;
        svc.on("/api/v1/embed", [](const json&, httplib::Response& res) {
            reply_json(res, {{"dim", 2}, {"vectors", {{1.0, 0.0}}}});
        });
        HttpEmbeddingProvider p({svc.url() + "/api/"}, "m", 2);
        CHECK(embed_one(p, "x") == Vector{1.0f, 0.0f});
    }

    TEST_CASE("http embedding failures are provider errors") {
        FakeService svc;
        svc.on("/v1/embed", [](const json& req, httplib::Response& res) {
            const std::string model = req.at("model");
            if (model == "short") {
                reply_json(res, {{"dim", 2}, {"vectors", {{1.0, 0.0}}}});
            } else if (model == "broken") {
                reply_json(res, {{"error", "model not loaded"}}, 503);
            } else if (model == "wrongdim") {
                reply_json(res, {{"dim", 3}, {"vectors", {{1.0, 0.0, 0.0}}}});
            } else {
                res.set_content("not json", "text/plain");
            }
        });
        std::vector<std::string> two = {"a", "b"};
        HttpEmbeddingProvider shorty({svc.url()}, "short", 2);
        CHECK(message_of([&] { embed_batch(shorty, two); }).find("expected 2 vectors, got 1") != std::string::npos);
        HttpEmbeddingProvider broken({svc.url()}, "broken", 2);
        CHECK(message_of([&] { embed_batch(broken, two); }).find("model not loaded") != std::string::npos);
        HttpEmbeddingProvider wrong({svc.url()}, "wrongdim", 2);
        CHECK(kind_of([&] { embed_batch(wrong, two); }) == ErrorKind::provider);
        HttpEmbeddingProvider garbage({svc.url()}, "garbage", 2);
        CHECK(kind_of([&] { embed_batch(garbage, two); }) == ErrorKind::provider);
    }

    TEST_CASE("unreachable service") {
        HttpEmbeddingProvider p({"http://127.0.0.1:1", std::chrono::milliseconds(500)}, "m", 4);
        CHECK(kind_of([&] { embed_one(p, "x"); }) == ErrorKind::provider);
        CHECK(kind_of([&] { HttpEmbeddingProvider({"localhost:80"}, "m"); }) == ErrorKind::usage);
    }

    TEST_CASE("http translation wire protocol") {
        FakeService svc;
        svc.on("/v1/translate", [](const json& req, httplib::Response& res) {
            CHECK(req.at("src") == "hi");
            CHECK(req.at("dst") == "en");
            json out = json::array();
            for (const auto& t : req.at("texts")) out.push_back("EN:" + t.get<std::string>());
            if (req.at("texts").size() == 3) out.erase(out.begin());
            reply_json(res, {{"texts", out}});
        });
        HttpTranslationProvider tr({svc.url()}, {{Lang::hi, Lang::en}});
        CHECK(translate(tr, "नमस्ते", Lang::hi, Lang::en) == "EN:नमस्ते");
        std::vector<std::string> three = {"a", "b", "c"};
        CHECK(kind_of([&] { translate_batch(tr, three, Lang::hi, Lang::en); }) == ErrorKind::provider);
        const int before = svc.requests;
        CHECK(translate(tr, "same", Lang::en, Lang::en) == "same");
        CHECK(svc.requests == before);
        CHECK(kind_of([&] { translate(tr, "x", Lang::es, Lang::en); }) == ErrorKind::provider);
    }
}
