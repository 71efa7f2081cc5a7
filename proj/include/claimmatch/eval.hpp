#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claimmatch/corpus.hpp"
#include "claimmatch/providers.hpp"
#include "claimmatch/ranking.hpp"

namespace claimmatch {

// ---------------------------------------------------------------------------
// Retrieval metrics

using RelevantSet = std::set<std::string, std::less<>>;
using Qrels = std::map<std::string, RelevantSet, std::less<>>;
using Run = std::map<std::string, RankedList, std::less<>>;

inline const std::vector<std::size_t> kDefaultKs = {1, 5, 10, 20, 50};

/// 1 / rank of the first relevant article, 0 when none is retrieved.
double reciprocal_rank(const RankedList& ranking, const RelevantSet& relevant);

/// sum_{i<=K} P@i * rel_i / min(|relevant|, K); 0 when nothing relevant is
/// in the top K.
double average_precision_at_k(const RankedList& ranking, const RelevantSet& relevant, std::size_t k);

struct RetrievalRow {
    std::string system;
    std::string partition;
    std::size_t n_queries = 0;
    std::map<std::size_t, double> map_at;  // K -> MAP@K
    double mrr = 0.0;
};

/// Means over every qrels query; a query without a ranking scores 0.
/// Throws a data error when the run has a query unknown to the qrels.
RetrievalRow evaluate_retrieval(const Run& run, const Qrels& qrels, std::span<const std::size_t> ks,
                                std::string system = {}, std::string partition = {});

struct RetrievalReport {
    std::vector<std::size_t> ks = kDefaultKs;
    std::vector<RetrievalRow> rows;

    std::string to_json() const;
    std::string to_text() const;
};

/// Relevance judgments from a corpus partition's positive pairs, keyed by
/// tweet id.
Qrels qrels_from_corpus(const Corpus& corpus, std::string_view partition);

/// TREC run lines: "query_id Q0 article_id rank score system".
void write_run(std::ostream& out, const std::vector<RankedList>& rankings, std::string_view system);
/// Reads a run file; rows are re-sorted by rank. Multiple systems are
/// rejected unless `system` selects one.
/// The system name found in the file is stored in found_system when given.
Run read_run(std::istream& in, std::string_view system = {}, std::string* found_system = nullptr);

/// TREC qrels lines: "query_id 0 article_id 1".
void write_qrels(std::ostream& out, const Qrels& qrels);
Qrels read_qrels(std::istream& in);

// ---------------------------------------------------------------------------
// Classification metrics

struct Confusion {
    std::size_t tp = 0;  // match predicted match
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
    double accuracy() const;
    double f1_match() const;      // "match" as the positive class
    double f1_not_match() const;  // "not_match" as the positive class
};

/// F1 from raw counts; 0 when the class is never predicted or never present.
double f1_score(std::size_t tp, std::size_t fp, std::size_t fn);

struct Fold {
    std::vector<std::size_t> train;  // indices into the dataset's pairs
    std::vector<std::size_t> test;
};

enum class SplitMode { stratified, group_by_article };

SplitMode parse_split_mode(std::string_view name);
std::string_view to_string(SplitMode mode);

/// Stratified: each label's records are seeded-shuffled and dealt round
/// robin, so folds differ in size by at most one and keep the label ratio.
/// Group mode keeps every pair of one article in the same test fold.
std::vector<Fold> kfold_split(const LabeledDataset& dataset, std::size_t k, std::uint64_t seed,
                              SplitMode mode = SplitMode::stratified);

struct MatchExample {
    std::string tweet_text;
    std::string article_text;
    Label label = Label::match;
};

/// Scores (tweet, fact-check) pairs in [0, 1]; label = match iff
/// score >= threshold.
class PairScorer {
public:
    virtual ~PairScorer() = default;

    virtual std::string name() const = 0;
    virtual double threshold() const = 0;
    virtual std::vector<double> score_batch(std::span<const MatchExample> examples) const = 0;

    /// Called with each fold's training split before it is scored. The
    /// default keeps the scorer unchanged.
    virtual void fit(std::span<const MatchExample> /*train*/) {}

    double score(const std::string& tweet_text, const std::string& article_text) const;
    Label predict(double score) const { return score >= threshold() ? Label::match : Label::not_match; }
};

/// (cosine + 1) / 2 of provider embeddings. With calibration enabled, fit()
/// picks the threshold that maximizes training accuracy.
class CosineScorer final : public PairScorer {
public:
    CosineScorer(const EmbeddingProvider& provider, double threshold = 0.5, bool calibrate = false);

    std::string name() const override;
    double threshold() const override { return threshold_; }
    std::vector<double> score_batch(std::span<const MatchExample> examples) const override;
    void fit(std::span<const MatchExample> train) override;

    bool calibrating() const { return calibrate_; }

private:
    const EmbeddingProvider& provider_;
    double initial_threshold_;
    double threshold_;
    bool calibrate_;
};

/// Threshold that maximizes accuracy on (score, label) data. Candidates are
/// midpoints between consecutive distinct scores plus the two extremes;
/// the lowest best candidate wins.
double best_threshold(std::span<const double> scores, std::span<const Label> labels);

struct FoldMetrics {
    std::size_t n = 0;
    double threshold = 0.0;
    Confusion confusion;
};

struct MatchRow {
    std::string partition;
    std::size_t n_pairs = 0;
    std::vector<FoldMetrics> folds;

    struct Stat {
        double mean = 0.0;
        double stddev = 0.0;  // sample standard deviation over folds
    };
    Stat accuracy() const;
    Stat f1_match() const;
    Stat f1_not_match() const;
};

struct MatchReport {
    std::string scorer;
    std::vector<MatchRow> rows;

    std::string to_json() const;
    std::string to_text() const;
};

std::vector<MatchExample> match_examples(const Corpus& corpus, const LabeledDataset& dataset,
                                         bool include_title = true);

MatchRow evaluate_matcher(PairScorer& scorer, const std::vector<MatchExample>& examples,
                          std::span<const Fold> folds, std::string partition = {});

}  // namespace claimmatch
