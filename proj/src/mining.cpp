#include "claimmatch/mining.hpp"

#include <algorithm>
#include <unordered_set>

#include "claimmatch/dense.hpp"
#include "claimmatch/error.hpp"
#include "claimmatch/random.hpp"

namespace claimmatch {

MiningStrategy parse_strategy(std::string_view name) {
    if (name == "random") return MiningStrategy::random;
    if (name == "hard") return MiningStrategy::hard;
    throw usage_error("unknown mining strategy '" + std::string(name) + "' (expected random or hard)");
}

std::string_view to_string(MiningStrategy strategy) {
    return strategy == MiningStrategy::random ? "random" : "hard";
}

std::vector<Pair> positive_pairs(const Corpus& corpus, std::string_view partition) {
    std::vector<Pair> out;
    for (const auto& [t, a] : corpus.positive_keys(partition)) out.push_back(Pair{t, a, Label::match, PairSource::ingested, std::nullopt});
    return out;
}

namespace {

struct PartitionView {
    std::vector<std::string> tweet_ids;
    std::vector<std::string> article_ids;
    std::set<PairKey> positives;
};

PartitionView view_of(const Corpus& corpus, std::string_view partition, const MiningConfig& cfg) {
    if (cfg.negatives_per_positive < 1) throw usage_error("negatives_per_positive must be at least 1");
    const Partition& part = corpus.partition(partition);
    PartitionView v;
    for (std::size_t i : part.tweets) v.tweet_ids.push_back(corpus.tweets()[i].id);
    for (std::size_t i : part.articles) v.article_ids.push_back(corpus.articles()[i].id);
    auto keys = corpus.positive_keys(partition);
    v.positives.insert(keys.begin(), keys.end());
    if (v.article_ids.size() < 2) {
        throw data_error("partition " + std::string(partition) + " has fewer than 2 articles; cannot mine negatives");
    }
    if (v.tweet_ids.size() * v.article_ids.size() <= v.positives.size()) {
        throw data_error("partition " + std::string(partition) + " has no non-matching (tweet, article) pair");
    }
    return v;
}

}  // namespace

std::vector<Pair> mine_random(const Corpus& corpus, std::string_view partition, const MiningConfig& cfg) {
    PartitionView v = view_of(corpus, partition, cfg);
    const std::size_t n_t = v.tweet_ids.size();
    const std::size_t n_a = v.article_ids.size();
    const std::size_t available = n_t * n_a - v.positives.size();
    const std::size_t wanted = std::min(available, cfg.negatives_per_positive * v.positives.size());
    Rng rng(cfg.seed);

    auto make = [&](std::size_t t, std::size_t a) {
        return Pair{v.tweet_ids[t], v.article_ids[a], Label::not_match, PairSource::mined_random, std::nullopt};
    };
    std::vector<Pair> out;
    out.reserve(wanted);
    if (wanted * 2 <= available) {
        // Sparse draw: rejection sampling on the grid.
        std::unordered_set<std::uint64_t> taken;
        while (out.size() < wanted) {
            std::uint64_t cell = rng.below(static_cast<std::uint64_t>(n_t) * n_a);
            std::size_t t = cell / n_a;
            std::size_t a = cell % n_a;
            if (v.positives.count({v.tweet_ids[t], v.article_ids[a]})) continue;
            if (!taken.insert(cell).second) continue;
            out.push_back(make(t, a));
        }
    } else {
        std::vector<std::uint64_t> cells;
        cells.reserve(available);
        for (std::size_t t = 0; t < n_t; ++t) {
            for (std::size_t a = 0; a < n_a; ++a) {
                if (!v.positives.count({v.tweet_ids[t], v.article_ids[a]})) cells.push_back(t * n_a + a);
            }
        }
        rng.shuffle(std::span<std::uint64_t>(cells));
        for (std::size_t i = 0; i < wanted; ++i) out.push_back(make(cells[i] / n_a, cells[i] % n_a));
    }
    return out;
}

std::vector<Pair> select_hard_negatives(std::span<const std::string> tweet_ids,
                                        std::span<const std::string> article_ids,
                                        const std::vector<std::vector<double>>& similarity,
                                        const std::set<PairKey>& positives, double ceiling, std::size_t count) {
    if (similarity.size() != tweet_ids.size()) throw usage_error("similarity matrix row count mismatch");
    std::vector<Pair> candidates;
    for (std::size_t t = 0; t < tweet_ids.size(); ++t) {
        if (similarity[t].size() != article_ids.size()) throw usage_error("similarity matrix column count mismatch");
        for (std::size_t a = 0; a < article_ids.size(); ++a) {
            const double sim = similarity[t][a];
            if (!(sim < ceiling)) continue;
            if (positives.count({tweet_ids[t], article_ids[a]})) continue;
            candidates.push_back(Pair{tweet_ids[t], article_ids[a], Label::not_match, PairSource::mined_hard, sim});
        }
    }
    auto better = [](const Pair& x, const Pair& y) {
        if (*x.similarity != *y.similarity) return *x.similarity > *y.similarity;
        if (x.tweet_id != y.tweet_id) return x.tweet_id < y.tweet_id;
        return x.article_id < y.article_id;
    };
    if (count < candidates.size()) {
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(count),
                          candidates.end(), better);
        candidates.resize(count);
    } else {
        std::sort(candidates.begin(), candidates.end(), better);
    }
    return candidates;
}

std::vector<Pair> mine_hard(const Corpus& corpus, std::string_view partition, const EmbeddingProvider& provider,
                            const MiningConfig& cfg) {
    if (!(cfg.similarity_ceiling > 0.0 && cfg.similarity_ceiling <= 1.0)) {
        throw usage_error("similarity ceiling must be in (0, 1], got " + std::to_string(cfg.similarity_ceiling));
    }
    PartitionView v = view_of(corpus, partition, cfg);
    std::vector<std::string> tweet_texts;
    for (const auto& id : v.tweet_ids) tweet_texts.push_back(query_text(corpus.tweet(id)));
    std::vector<std::string> article_texts;
    for (const auto& id : v.article_ids) article_texts.push_back(article_text(corpus.article(id), cfg.include_title));

    auto sim = pairwise_similarities(tweet_texts, article_texts, provider);
    const std::size_t wanted = cfg.negatives_per_positive * v.positives.size();
    auto out = select_hard_negatives(v.tweet_ids, v.article_ids, sim, v.positives, cfg.similarity_ceiling, wanted);
    if (out.empty()) {
        warn("partition " + std::string(partition) + ": no candidate pair scores below the similarity ceiling " +
             std::to_string(cfg.similarity_ceiling));
    } else if (out.size() < wanted) {
        warn("partition " + std::string(partition) + ": only " + std::to_string(out.size()) + " of " +
             std::to_string(wanted) + " hard negatives available below the ceiling");
    }
    return out;
}

std::vector<Pair> mine(const Corpus& corpus, std::string_view partition, const EmbeddingProvider* provider,
                       const MiningConfig& cfg) {
    if (cfg.strategy == MiningStrategy::random) return mine_random(corpus, partition, cfg);
    if (!provider) throw usage_error("hard negative mining needs an embedding provider");
    return mine_hard(corpus, partition, *provider, cfg);
}

LabeledDataset assemble(std::vector<Pair> positives, std::vector<Pair> negatives, std::uint64_t seed,
                        std::string partition) {
    LabeledDataset ds;
    ds.partition = std::move(partition);
    std::set<PairKey> seen;
    for (Pair& p : positives) {
        p.label = Label::match;
        if (!seen.insert(key_of(p)).second) {
            throw data_error("duplicate positive pair (" + p.tweet_id + ", " + p.article_id + ")");
        }
    }
    for (Pair& p : negatives) {
        p.label = Label::not_match;
        if (!seen.insert(key_of(p)).second) {
            throw data_error("pair (" + p.tweet_id + ", " + p.article_id +
                             ") appears as both positive and negative, or twice among negatives");
        }
    }
    ds.pairs = std::move(positives);
    ds.pairs.insert(ds.pairs.end(), std::make_move_iterator(negatives.begin()),
                    std::make_move_iterator(negatives.end()));
    Rng rng(seed);
    rng.shuffle(std::span<Pair>(ds.pairs));
    return ds;
}

}  // namespace claimmatch
