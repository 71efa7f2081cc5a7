#include "synthetic.hpp"

#include <set>

#include "claimmatch/random.hpp"
#include "claimmatch/textproc.hpp"

namespace synth {

namespace cm = claimmatch;

namespace {

std::uint64_t step(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string join(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

template <typename Fn>
std::vector<std::string> unique_words(std::size_t n, std::uint64_t& state, std::set<std::string>& used, Fn make) {
    std::vector<std::string> out;
    while (out.size() < n) {
        std::string w = make(state);
        if (used.insert(w).second) out.push_back(std::move(w));
    }
    return out;
}

}  // namespace

std::string latin_word(std::uint64_t& state) {
    static const char* consonants = "bcdfghjklmnprstvz";
    static const char* vowels = "aeiou";
    std::string w;
    const std::size_t syllables = 3 + step(state) % 2;
    for (std::size_t i = 0; i < syllables; ++i) {
        w += consonants[step(state) % 17];
        w += vowels[step(state) % 5];
    }
    return w;
}

std::string devanagari_word(std::uint64_t& state) {
    std::string w;
    const std::size_t syllables = 2 + step(state) % 2;
    for (std::size_t i = 0; i < syllables; ++i) {
        cm::append_utf8(w, static_cast<char32_t>(0x0915 + step(state) % 37));  // consonant
        if (step(state) % 3 != 0) {
            cm::append_utf8(w, static_cast<char32_t>(0x093E + step(state) % 11));  // vowel sign
        }
    }
    return w;
}

Parts generate(const Options& opt) {
    std::uint64_t state = opt.seed * 0x100000001b3ULL + 17;
    cm::Rng rng(opt.seed);
    std::set<std::string> used;
    const bool hindi = opt.tweet_lang == cm::Lang::hi;

    auto fillers = unique_words(opt.filler_vocabulary, state, used, latin_word);
    auto tweet_fillers = hindi ? unique_words(opt.filler_vocabulary, state, used, devanagari_word) : fillers;

    Parts parts;
    for (std::size_t a = 0; a < opt.n_articles; ++a) {
        auto distinctive = unique_words(opt.distinctive_per_article, state, used, latin_word);
        std::vector<std::string> native;
        if (hindi) {
            native = unique_words(opt.distinctive_per_article, state, used, devanagari_word);
            for (std::size_t i = 0; i < native.size(); ++i) parts.table[native[i]] = distinctive[i];
        } else {
            native = distinctive;
        }

        cm::Article art;
        art.id = opt.prefix + "-a" + std::to_string(1000 + a);
        art.lang = cm::Lang::en;
        art.title = distinctive[0] + " " + fillers[rng.below(fillers.size())] + " " + distinctive[1];
        for (std::size_t p = 0; p < opt.paragraphs; ++p) {
            std::vector<std::string> words;
            const std::size_t n_filler = p == 0 ? 4 : opt.words_per_paragraph;
            for (std::size_t i = 0; i < n_filler; ++i) words.push_back(fillers[rng.below(fillers.size())]);
            if (p == 0) {
                words.insert(words.end(), distinctive.begin(), distinctive.end());
            } else {
                for (std::size_t i = p - 1; i < distinctive.size(); i += opt.paragraphs) words.push_back(distinctive[i]);
            }
            rng.shuffle(std::span<std::string>(words));
            std::string text = join(words);
            text[0] = static_cast<char>(text[0] - 'a' + 'A');
            art.body.push_back(text + ".");
        }
        parts.articles.push_back(art);

        for (std::size_t t = 0; t < opt.tweets_per_article; ++t) {
            std::vector<std::size_t> idx(native.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            rng.shuffle(std::span<std::size_t>(idx));
            std::vector<std::string> words;
            for (std::size_t i = 0; i < opt.planted_per_tweet && i < idx.size(); ++i) words.push_back(native[idx[i]]);
            for (std::size_t i = 0; i < opt.filler_per_tweet; ++i) {
                words.push_back(tweet_fillers[rng.below(tweet_fillers.size())]);
            }
            rng.shuffle(std::span<std::string>(words));

            cm::Tweet tw;
            tw.id = opt.prefix + "-t" + std::to_string(10000 + a * opt.tweets_per_article + t);
            tw.lang = opt.tweet_lang;
            tw.text = join(words);
            parts.tweets.push_back(tw);
            parts.pairs.push_back({tw.id, art.id, cm::Label::match, cm::PairSource::ingested, std::nullopt});
        }
    }
    return parts;
}

void append(Parts& into, Parts from) {
    for (auto& t : from.tweets) into.tweets.push_back(std::move(t));
    for (auto& a : from.articles) into.articles.push_back(std::move(a));
    for (auto& p : from.pairs) into.pairs.push_back(std::move(p));
    into.table.merge(from.table);
}

cm::Corpus build(Parts parts) {
    return cm::Corpus::from_parts(std::move(parts.tweets), std::move(parts.articles), std::move(parts.pairs));
}

}  // namespace synth
