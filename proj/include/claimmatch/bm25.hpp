#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "claimmatch/corpus.hpp"
#include "claimmatch/ranking.hpp"

namespace claimmatch {

/// Lucene/Elasticsearch defaults.
struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

enum class Granularity { full_article, paragraph };

Granularity parse_granularity(std::string_view name);  // "article" | "paragraph"
std::string_view to_string(Granularity granularity);

/// A retrievable unit: a whole article or one of its chunks.
struct IndexUnit {
    std::string unit_id;
    std::string article_id;
    std::string text;
};

/// Whole articles (one unit each, unit id = article id) or their chunks
/// (unit id = "<article>#<chunk>").
std::vector<IndexUnit> make_units(std::span<const Article* const> articles, Granularity granularity,
                                  const ChunkConfig& chunk_cfg);

struct Posting {
    std::uint32_t unit = 0;  // dense unit ordinal
    std::uint32_t tf = 0;
};

/// Inverted index with exact Okapi BM25 scoring.
///
///   idf(t)      = ln(1 + (N - df + 0.5) / (df + 0.5))
///   w(t, d)     = idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))
///   score(q, d) = sum of w(t, d) over the distinct terms t of q
///
/// Immutable once built; concurrent searches are safe.
class Bm25Index {
public:
    static Bm25Index build(std::span<const IndexUnit> units, Bm25Params params, Granularity granularity);

    double idf(std::string_view term) const;
    std::size_t doc_freq(std::string_view term) const;

    /// Throws a data error for an unknown unit id.
    double score(std::span<const std::string> query_terms, std::string_view unit_id) const;

    /// Scores every unit sharing a term with the query, max-pools units into
    /// articles and returns the top k.
    RankedList search(std::string_view query_text, std::size_t k, std::string query_id = {}) const;

    Granularity granularity() const { return granularity_; }
    const Bm25Params& params() const { return params_; }
    std::size_t n_units() const { return unit_ids_.size(); }
    double avg_dl() const { return avg_dl_; }
    const std::vector<std::string>& unit_ids() const { return unit_ids_; }
    const std::vector<std::string>& unit_articles() const { return unit_article_; }
    const std::vector<std::uint32_t>& doc_lengths() const { return doc_len_; }
    std::span<const Posting> postings(std::string_view term) const;
    std::size_t vocabulary_size() const { return postings_.size(); }

    /// Versioned JSON document ("claimmatch-bm25", version 1).
    void save(std::ostream& out) const;
    static Bm25Index load(std::istream& in);

private:
    double term_weight(double idf, std::uint32_t tf, std::uint32_t dl) const;
    std::vector<std::string> distinct_terms(std::span<const std::string> terms) const;

    Bm25Params params_;
    Granularity granularity_ = Granularity::full_article;
    std::vector<std::string> unit_ids_;
    std::vector<std::string> unit_article_;
    std::vector<std::uint32_t> doc_len_;
    std::unordered_map<std::string, std::uint32_t> unit_lookup_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    double avg_dl_ = 0.0;
};

inline constexpr int kBm25FormatVersion = 1;

}  // namespace claimmatch
