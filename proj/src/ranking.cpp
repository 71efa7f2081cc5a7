#include "claimmatch/ranking.hpp"

#include <algorithm>
#include <map>

#include "claimmatch/error.hpp"

namespace claimmatch {

Pooling parse_pooling(std::string_view name) {
    if (name == "max") return Pooling::max;
    if (name == "sum") return Pooling::sum;
    if (name == "mean") return Pooling::mean;
    throw usage_error("unknown pooling '" + std::string(name) + "' (expected max, sum or mean)");
}

std::string_view to_string(Pooling pooling) {
    switch (pooling) {
        case Pooling::max: return "max";
        case Pooling::sum: return "sum";
        case Pooling::mean: return "mean";
    }
    return "?";
}

void sort_and_truncate(std::vector<RankedEntry>& entries, std::size_t k) {
    auto better = [](const RankedEntry& x, const RankedEntry& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.article_id < y.article_id;
    };
    if (k < entries.size()) {
        std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(k), entries.end(), better);
        entries.resize(k);
    } else {
        std::sort(entries.begin(), entries.end(), better);
    }
}

RankedList rank_articles(std::vector<UnitScore> unit_scores, std::size_t k, Pooling pooling) {
    struct Acc {
        double value = 0.0;
        std::size_t n = 0;
    };
    std::map<std::string_view, Acc> by_article;
    for (const UnitScore& u : unit_scores) {
        Acc& acc = by_article[u.article_id];
        if (acc.n == 0 || pooling != Pooling::max) {
            acc.value = acc.n == 0 ? u.score : acc.value + u.score;
        } else {
            acc.value = std::max(acc.value, u.score);
        }
        ++acc.n;
    }
    RankedList out;
    out.entries.reserve(by_article.size());
    for (const auto& [article, acc] : by_article) {
        double score = pooling == Pooling::mean ? acc.value / static_cast<double>(acc.n) : acc.value;
        out.entries.push_back({std::string(article), score});
    }
    sort_and_truncate(out.entries, k);
    return out;
}

}  // namespace claimmatch
