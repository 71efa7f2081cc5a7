// Generated corpora with planted term overlap between each tweet and the
// article it matches.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "claimmatch/corpus.hpp"

namespace synth {

struct Options {
    std::string prefix = "en";  // id prefix, keeps several generated partitions apart
    claimmatch::Lang tweet_lang = claimmatch::Lang::en;
    std::size_t n_articles = 50;
    std::size_t tweets_per_article = 4;
    std::size_t distinctive_per_article = 8;
    std::size_t planted_per_tweet = 5;
    std::size_t filler_per_tweet = 3;
    std::size_t paragraphs = 3;
    std::size_t words_per_paragraph = 20;
    std::size_t filler_vocabulary = 300;
    std::uint64_t seed = 1;
};

// Each article opens with a lead paragraph restating the claim (all of its
// distinctive terms plus a little filler); the remaining paragraphs are
// filler with the distinctive terms sprinkled in once more.
struct Parts {
    std::vector<claimmatch::Tweet> tweets;
    std::vector<claimmatch::Article> articles;
    std::vector<claimmatch::Pair> pairs;
    // Hindi word -> English word for every planted term (Hindi tweets only).
    std::map<std::string, std::string> table;
};

Parts generate(const Options& opt);
void append(Parts& into, Parts from);
claimmatch::Corpus build(Parts parts);

// Random lowercase pseudo-words and Devanagari pseudo-words.
std::string latin_word(std::uint64_t& state);
std::string devanagari_word(std::uint64_t& state);

}  // namespace synth
