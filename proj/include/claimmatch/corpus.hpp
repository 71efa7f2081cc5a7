#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace claimmatch {

enum class Lang { en, hi, es, pt };

std::string_view to_string(Lang lang);
/// Throws a data error for anything outside the supported set.
Lang parse_lang(std::string_view code);

/// (tweet language, article language), rendered as e.g. "hi-en".
struct LangPair {
    Lang tweet = Lang::en;
    Lang article = Lang::en;

    std::string tag() const;
    static LangPair parse(std::string_view tag);

    auto operator<=>(const LangPair&) const = default;
};

struct Tweet {
    std::string id;
    Lang lang = Lang::en;
    std::string text;
    std::optional<std::string> link_preview;
};

struct Article {
    std::string id;
    Lang lang = Lang::en;
    std::optional<std::string> title;
    std::vector<std::string> body;
};

enum class Label { match, not_match };
enum class PairSource { ingested, mined_random, mined_hard };

std::string_view to_string(Label label);
std::string_view to_string(PairSource source);

struct Pair {
    std::string tweet_id;
    std::string article_id;
    Label label = Label::match;
    PairSource source = PairSource::ingested;
    std::optional<double> similarity;  // set for hard negatives

    bool same_key(const Pair& other) const {
        return tweet_id == other.tweet_id && article_id == other.article_id;
    }
};

using PairKey = std::pair<std::string, std::string>;

inline PairKey key_of(const Pair& p) { return {p.tweet_id, p.article_id}; }

/// Members of one language-pair partition. Membership is defined by the
/// pairs: a tweet or article belongs to a partition when some ingested pair
/// of that partition references it. Index lists are sorted by id.
struct Partition {
    LangPair langs;
    std::vector<std::size_t> tweets;
    std::vector<std::size_t> articles;
    std::vector<std::size_t> pairs;  // all pair records, duplicates included
};

/// Validated, immutable collection of tweets, articles and positive pairs.
class Corpus {
public:
    /// Validates invariants and resolves references; throws data errors.
    static Corpus from_parts(std::vector<Tweet> tweets, std::vector<Article> articles,
                             std::vector<Pair> pairs);

    const std::vector<Tweet>& tweets() const { return tweets_; }
    const std::vector<Article>& articles() const { return articles_; }
    const std::vector<Pair>& pairs() const { return pairs_; }

    const Tweet* find_tweet(std::string_view id) const;
    const Article* find_article(std::string_view id) const;
    const Tweet& tweet(std::string_view id) const;
    const Article& article(std::string_view id) const;

    const std::map<std::string, Partition>& partitions() const { return partitions_; }
    const Partition& partition(std::string_view tag) const;

    /// Deduplicated positive keys of a partition, sorted.
    std::vector<PairKey> positive_keys(std::string_view partition_tag) const;

private:
    friend struct CorpusAccess;
    Corpus() = default;

    std::vector<Tweet> tweets_;
    std::vector<Article> articles_;
    std::vector<Pair> pairs_;
    std::unordered_map<std::string, std::size_t> tweet_index_;
    std::unordered_map<std::string, std::size_t> article_index_;
    std::map<std::string, Partition> partitions_;
};

/// Reads the newline-delimited JSON corpus format. Errors carry the 1-based
/// line number. Unknown fields are ignored with a warning.
Corpus ingest_corpus(std::istream& in);
Corpus load_corpus(const std::string& path);

/// Writes the corpus back in the same format; ingest(write(c)) == c.
void write_corpus(const Corpus& corpus, std::ostream& out);

/// Tweet text plus link preview joined by one space; the text's trailing
/// whitespace and the preview's surrounding whitespace are dropped when a
/// preview is present. An empty preview counts as absent.
std::string query_text(const Tweet& tweet);

/// Title (when present and requested) and body paragraphs joined by a blank
/// line.
std::string article_text(const Article& article, bool include_title = true);

inline constexpr std::string_view kParagraphSeparator = "\n\n";

struct ChunkConfig {
    std::size_t token_limit = 512;
    bool include_title = true;  // title becomes paragraph 0
};

struct ParagraphChunk {
    std::string article_id;
    std::size_t chunk_index = 0;
    std::size_t paragraph_index = 0;  // index into the chunked paragraph list
    std::string text;
    std::size_t token_count = 0;
};

/// One chunk per paragraph; paragraphs longer than the limit are split
/// greedily at sentence ends and, for over-long sentences, at token
/// windows. Pieces of a split paragraph are contiguous byte slices, so
/// concatenating them reproduces the paragraph exactly. Paragraphs that are
/// blank after trimming are dropped.
std::vector<ParagraphChunk> chunk_article(const Article& article, const ChunkConfig& cfg);

/// The paragraph list chunk_article works from (title first when included).
std::vector<std::string> chunkable_paragraphs(const Article& article, bool include_title);

struct PartitionCount {
    std::string partition;
    std::size_t pairs = 0;
};

struct ValidationReport {
    std::size_t n_tweets = 0;
    std::size_t n_articles = 0;
    std::size_t n_pairs = 0;
    std::vector<PartitionCount> partitions;
    std::vector<std::string> orphan_tweets;
    std::vector<std::string> orphan_articles;
    std::vector<PairKey> duplicate_pairs;  // each duplicated key listed once

    std::string to_json() const;
    std::string to_text() const;
};

ValidationReport validate_corpus(const Corpus& corpus);

/// Labeled pairs for one partition (or "all" for the pooled mode).
struct LabeledDataset {
    std::string partition;
    std::vector<Pair> pairs;

    std::size_t count(Label label) const;
};

/// Pair records only, in the corpus pair format extended with source and
/// similarity.
void write_dataset(const LabeledDataset& dataset, std::ostream& out);
LabeledDataset read_dataset(std::istream& in, const Corpus& corpus, std::string partition = "");

}  // namespace claimmatch
