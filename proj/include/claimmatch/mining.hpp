#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claimmatch/corpus.hpp"
#include "claimmatch/providers.hpp"

namespace claimmatch {

enum class MiningStrategy { random, hard };

MiningStrategy parse_strategy(std::string_view name);
std::string_view to_string(MiningStrategy strategy);

struct MiningConfig {
    MiningStrategy strategy = MiningStrategy::random;
    double similarity_ceiling = 0.7;  // hard negatives must score strictly below
    std::size_t negatives_per_positive = 1;
    std::uint64_t seed = 0;
    bool include_title = true;  // article side of the similarity matrix
};

/// Uniform sample (without replacement) of non-positive (tweet, article)
/// pairs inside one partition. Count is ratio * |positives|, or every
/// candidate when fewer exist.
std::vector<Pair> mine_random(const Corpus& corpus, std::string_view partition, const MiningConfig& cfg);

/// Embeds every partition tweet (query text) and article (full text,
/// truncated by the provider limit), drops positives and pairs at or above
/// the ceiling, and keeps the most similar remaining pairs.
std::vector<Pair> mine_hard(const Corpus& corpus, std::string_view partition, const EmbeddingProvider& provider,
                            const MiningConfig& cfg);

/// Selection step of mine_hard over a precomputed similarity matrix
/// (rows = tweets, columns = articles). Sorted by similarity descending,
/// ties by (tweet_id, article_id).
std::vector<Pair> select_hard_negatives(std::span<const std::string> tweet_ids,
                                        std::span<const std::string> article_ids,
                                        const std::vector<std::vector<double>>& similarity,
                                        const std::set<PairKey>& positives, double ceiling, std::size_t count);

/// Negatives for a partition with the configured strategy. The provider may
/// be null for random mining.
std::vector<Pair> mine(const Corpus& corpus, std::string_view partition, const EmbeddingProvider* provider,
                       const MiningConfig& cfg);

/// Merges and seeds-shuffles. Throws a data error naming the first pair
/// present on both sides or repeated within the merge.
LabeledDataset assemble(std::vector<Pair> positives, std::vector<Pair> negatives, std::uint64_t seed,
                        std::string partition = {});

/// Deduplicated positive pairs of a partition, as Pair records.
std::vector<Pair> positive_pairs(const Corpus& corpus, std::string_view partition);

}  // namespace claimmatch
