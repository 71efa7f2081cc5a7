// Brute-force reference implementations used to cross-check the engine.
// They work from the textbook definitions and share no code with src/.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Scored {
    std::string id;
    double score;
};

// Okapi BM25 over pre-tokenized documents. Every document with at least one
// query term gets a score; the result is sorted by score desc, id asc.
inline std::vector<Scored> bm25_rank(const std::vector<std::pair<std::string, std::vector<std::string>>>& docs,
                                     const std::vector<std::string>& query, double k1, double b) {
    const double n = static_cast<double>(docs.size());
    double total = 0;
    for (const auto& d : docs) total += static_cast<double>(d.second.size());
    const double avgdl = total / n;

    std::set<std::string> qterms(query.begin(), query.end());
    std::vector<Scored> out;
    for (const auto& [id, toks] : docs) {
        double s = 0;
        bool any = false;
        for (const auto& t : qterms) {
            double tf = 0;
            for (const auto& w : toks) tf += (w == t);
            if (tf == 0) continue;
            double df = 0;
            for (const auto& d2 : docs) df += std::count(d2.second.begin(), d2.second.end(), t) > 0 ? 1 : 0;
            const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            const double dl = static_cast<double>(toks.size());
            s += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl));
            any = true;
        }
        if (any) out.push_back({id, s});
    }
    std::sort(out.begin(), out.end(), [](const Scored& x, const Scored& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.id < y.id;
    });
    return out;
}

// AP@K by walking the ranking with an explicit hit counter.
inline double ap_at_k(const std::vector<std::string>& ranking, const std::set<std::string>& rel, std::size_t k) {
    double hits = 0, sum = 0;
    for (std::size_t i = 0; i < ranking.size() && i < k; ++i) {
        if (rel.count(ranking[i])) {
            hits += 1;
            sum += hits / static_cast<double>(i + 1);
        }
    }
    if (hits == 0) return 0.0;
    return sum / static_cast<double>(std::min(rel.size(), k));
}

inline double rr(const std::vector<std::string>& ranking, const std::set<std::string>& rel) {
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (rel.count(ranking[i])) return 1.0 / static_cast<double>(i + 1);
    }
    return 0.0;
}

// Hard negatives: every non-positive cell strictly under the ceiling,
// sorted by similarity desc then (tweet, article), first `count` kept.
struct Cell {
    double sim;
    std::string tweet;
    std::string article;
};

inline std::vector<Cell> hard_negatives(const std::vector<std::string>& tweets,
                                        const std::vector<std::string>& articles,
                                        const std::vector<std::vector<double>>& sim,
                                        const std::set<std::pair<std::string, std::string>>& positives,
                                        double ceiling, std::size_t count) {
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < tweets.size(); ++i) {
        for (std::size_t j = 0; j < articles.size(); ++j) {
            if (positives.count({tweets[i], articles[j]})) continue;
            if (!(sim[i][j] < ceiling)) continue;
            cells.push_back({sim[i][j], tweets[i], articles[j]});
        }
    }
    std::sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) {
        if (x.sim != y.sim) return x.sim > y.sim;
        if (x.tweet != y.tweet) return x.tweet < y.tweet;
        return x.article < y.article;
    });
    if (cells.size() > count) cells.resize(count);
    return cells;
}

inline double dot_cosine(const std::vector<float>& u, const std::vector<float>& v) {
    long double uv = 0, uu = 0, vv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uv += static_cast<long double>(u[i]) * v[i];
        uu += static_cast<long double>(u[i]) * u[i];
        vv += static_cast<long double>(v[i]) * v[i];
    }
    if (uu == 0 || vv == 0) return 0.0;
    return static_cast<double>(uv / std::sqrt(uu * vv));
}

}  // namespace oracle
