#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace claimmatch {

struct RankedEntry {
    std::string article_id;
    double score = 0.0;

    bool operator==(const RankedEntry&) const = default;
};

/// Articles by descending score, ties by ascending article id, no duplicates.
struct RankedList {
    std::string query_id;
    std::vector<RankedEntry> entries;
};

/// How unit (paragraph/chunk) scores collapse into one article score.
enum class Pooling { max, sum, mean };

Pooling parse_pooling(std::string_view name);
std::string_view to_string(Pooling pooling);

struct UnitScore {
    std::string_view article_id;
    double score = 0.0;
};

/// Groups unit scores by article, pools them, and keeps the best k.
RankedList rank_articles(std::vector<UnitScore> unit_scores, std::size_t k, Pooling pooling = Pooling::max);

/// Sorts entries into ranking order and truncates to k.
void sort_and_truncate(std::vector<RankedEntry>& entries, std::size_t k);

}  // namespace claimmatch
