#include "claimmatch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "claimmatch/dense.hpp"
#include "claimmatch/error.hpp"
#include "claimmatch/random.hpp"

namespace claimmatch {

using ordered_json = nlohmann::ordered_json;

double reciprocal_rank(const RankedList& ranking, const RelevantSet& relevant) {
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        if (relevant.count(ranking.entries[i].article_id)) return 1.0 / static_cast<double>(i + 1);
    }
    return 0.0;
}

double average_precision_at_k(const RankedList& ranking, const RelevantSet& relevant, std::size_t k) {
    if (k < 1) throw usage_error("K must be at least 1");
    if (relevant.empty()) return 0.0;
    const std::size_t depth = std::min(k, ranking.entries.size());
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < depth; ++i) {
        if (!relevant.count(ranking.entries[i].article_id)) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
    if (hits == 0) return 0.0;
    return sum / static_cast<double>(std::min(relevant.size(), k));
}

RetrievalRow evaluate_retrieval(const Run& run, const Qrels& qrels, std::span<const std::size_t> ks,
                                std::string system, std::string partition) {
    for (const auto& [qid, ranking] : run) {
        if (!qrels.count(qid)) throw data_error("run query '" + qid + "' has no relevance judgments");
    }
    if (qrels.empty()) throw data_error("qrels are empty");
    RetrievalRow row;
    row.system = std::move(system);
    row.partition = std::move(partition);
    row.n_queries = qrels.size();
    for (std::size_t k : ks) row.map_at[k] = 0.0;

    static const RankedList kEmpty;
    double rr_sum = 0.0;
    std::map<std::size_t, double> ap_sum;
    for (const auto& [qid, relevant] : qrels) {
        auto it = run.find(qid);
        const RankedList& ranking = it == run.end() ? kEmpty : it->second;
        rr_sum += reciprocal_rank(ranking, relevant);
        for (std::size_t k : ks) ap_sum[k] += average_precision_at_k(ranking, relevant, k);
    }
    const double n = static_cast<double>(row.n_queries);
    row.mrr = rr_sum / n;
    for (std::size_t k : ks) row.map_at[k] = ap_sum[k] / n;
    return row;
}

std::string RetrievalReport::to_json() const {
    ordered_json doc;
    doc["ks"] = ks;
    ordered_json results = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json r;
        r["system"] = row.system;
        r["partition"] = row.partition;
        r["queries"] = row.n_queries;
        ordered_json m = ordered_json::object();
        for (std::size_t k : ks) {
            auto it = row.map_at.find(k);
            m[std::to_string(k)] = it == row.map_at.end() ? 0.0 : it->second;
        }
        r["map"] = std::move(m);
        r["mrr"] = row.mrr;
        results.push_back(std::move(r));
    }
    doc["results"] = std::move(results);
    return doc.dump(2) + "\n";
}

std::string RetrievalReport::to_text() const {
    std::ostringstream out;
    out << std::left << std::setw(10) << "partition" << std::setw(16) << "system" << std::right << std::setw(8)
        << "queries";
    for (std::size_t k : ks) out << std::setw(9) << ("MAP@" + std::to_string(k));
    out << std::setw(9) << "MRR" << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& row : rows) {
        out << std::left << std::setw(10) << row.partition << std::setw(16) << row.system << std::right
            << std::setw(8) << row.n_queries;
        for (std::size_t k : ks) {
            auto it = row.map_at.find(k);
            out << std::setw(9) << (it == row.map_at.end() ? 0.0 : it->second);
        }
        out << std::setw(9) << row.mrr << '\n';
    }
    return out.str();
}

Qrels qrels_from_corpus(const Corpus& corpus, std::string_view partition) {
    Qrels q;
    for (const auto& [t, a] : corpus.positive_keys(partition)) q[t].insert(a);
    return q;
}

void write_run(std::ostream& out, const std::vector<RankedList>& rankings, std::string_view system) {
    std::ostringstream line;
    for (const RankedList& r : rankings) {
        for (std::size_t i = 0; i < r.entries.size(); ++i) {
            line.str({});
            line << r.query_id << " Q0 " << r.entries[i].article_id << ' ' << (i + 1) << ' '
                 << std::setprecision(9) << r.entries[i].score << ' ' << system << '\n';
            out << line.str();
        }
    }
}

Run read_run(std::istream& in, std::string_view system, std::string* found_system) {
    struct Row {
        std::size_t rank;
        RankedEntry entry;
    };
    std::map<std::string, std::vector<Row>, std::less<>> rows;
    std::set<std::string> systems;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::istringstream fields(raw);
        std::string qid, q0, doc, rank_s, score_s, sys, extra;
        if (!(fields >> qid)) continue;
        if (!(fields >> q0 >> doc >> rank_s >> score_s >> sys) || (fields >> extra)) {
            throw data_error("run line " + std::to_string(line) + ": expected 6 whitespace-separated fields");
        }
        if (!system.empty() && sys != system) continue;
        systems.insert(sys);
        Row r;
        try {
            std::size_t used = 0;
            long long rank = std::stoll(rank_s, &used);
            if (used != rank_s.size() || rank < 1) throw std::invalid_argument("rank");
            r.rank = static_cast<std::size_t>(rank);
            r.entry.score = std::stod(score_s, &used);
            if (used != score_s.size()) throw std::invalid_argument("score");
        } catch (const std::exception&) {
            throw data_error("run line " + std::to_string(line) + ": bad rank or score");
        }
        r.entry.article_id = doc;
        rows[qid].push_back(std::move(r));
    }
    if (systems.size() > 1) throw data_error("run file mixes several systems; select one");
    if (found_system) *found_system = systems.empty() ? std::string(system) : *systems.begin();
    Run run;
    for (auto& [qid, list] : rows) {
        std::stable_sort(list.begin(), list.end(), [](const Row& a, const Row& b) { return a.rank < b.rank; });
        RankedList& r = run[qid];
        r.query_id = qid;
        std::set<std::string, std::less<>> seen;
        for (auto& row : list) {
            if (!seen.insert(row.entry.article_id).second) {
                throw data_error("run lists article '" + row.entry.article_id + "' twice for query '" + qid + "'");
            }
            r.entries.push_back(std::move(row.entry));
        }
    }
    return run;
}

void write_qrels(std::ostream& out, const Qrels& qrels) {
    for (const auto& [qid, rel] : qrels) {
        for (const auto& a : rel) out << qid << " 0 " << a << " 1\n";
    }
}

Qrels read_qrels(std::istream& in) {
    Qrels q;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::istringstream fields(raw);
        std::string qid, iter, doc, rel, extra;
        if (!(fields >> qid)) continue;
        if (!(fields >> iter >> doc >> rel) || (fields >> extra)) {
            throw data_error("qrels line " + std::to_string(line) + ": expected 4 whitespace-separated fields");
        }
        double grade = 0.0;
        try {
            grade = std::stod(rel);
        } catch (const std::exception&) {
            throw data_error("qrels line " + std::to_string(line) + ": bad relevance value");
        }
        if (grade > 0) q[qid].insert(doc);
    }
    return q;
}

double f1_score(std::size_t tp, std::size_t fp, std::size_t fn) {
    const double denom = 2.0 * tp + fp + fn;
    return tp == 0 ? 0.0 : 2.0 * tp / denom;
}

double Confusion::accuracy() const {
    return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
}

double Confusion::f1_match() const { return f1_score(tp, fp, fn); }

double Confusion::f1_not_match() const { return f1_score(tn, fn, fp); }

SplitMode parse_split_mode(std::string_view name) {
    if (name == "stratified") return SplitMode::stratified;
    if (name == "group" || name == "group_by_article") return SplitMode::group_by_article;
    throw usage_error("unknown split mode '" + std::string(name) + "' (expected stratified or group)");
}

std::string_view to_string(SplitMode mode) {
    return mode == SplitMode::stratified ? "stratified" : "group_by_article";
}

std::vector<Fold> kfold_split(const LabeledDataset& dataset, std::size_t k, std::uint64_t seed, SplitMode mode) {
    const std::size_t n = dataset.pairs.size();
    if (k < 2) throw usage_error("k-fold split needs k >= 2");
    if (n < k) throw data_error("dataset of " + std::to_string(n) + " pairs is too small for " + std::to_string(k) +
                                " folds");
    if (dataset.count(Label::match) == 0 || dataset.count(Label::not_match) == 0) {
        throw data_error("dataset must contain both match and not_match pairs");
    }
    Rng rng(seed);
    std::vector<std::size_t> fold_of(n, 0);

    if (mode == SplitMode::stratified) {
        std::size_t dealt = 0;
        for (Label label : {Label::match, Label::not_match}) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < n; ++i) {
                if (dataset.pairs[i].label == label) idx.push_back(i);
            }
            rng.shuffle(std::span<std::size_t>(idx));
            for (std::size_t i : idx) fold_of[i] = dealt++ % k;
        }
    } else {
        std::map<std::string, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < n; ++i) groups[dataset.pairs[i].article_id].push_back(i);
        if (groups.size() < k) {
            throw data_error("only " + std::to_string(groups.size()) + " article groups for " + std::to_string(k) +
                             " folds");
        }
        std::vector<const std::vector<std::size_t>*> order;
        for (const auto& [article, members] : groups) order.push_back(&members);
        rng.shuffle(std::span(order));
        std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->size() > b->size(); });
        std::vector<std::size_t> load(k, 0);
        for (const auto* members : order) {
            std::size_t f = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
            load[f] += members->size();
            for (std::size_t i : *members) fold_of[i] = f;
        }
    }

    std::vector<Fold> folds(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < k; ++f) (f == fold_of[i] ? folds[f].test : folds[f].train).push_back(i);
    }
    return folds;
}

double PairScorer::score(const std::string& tweet_text, const std::string& article_text) const {
    MatchExample ex{tweet_text, article_text, Label::match};
    return score_batch(std::span<const MatchExample>(&ex, 1)).front();
}

CosineScorer::CosineScorer(const EmbeddingProvider& provider, double threshold, bool calibrate)
    : provider_(provider), initial_threshold_(threshold), threshold_(threshold), calibrate_(calibrate) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw usage_error("scorer threshold must be in [0, 1]");
}

std::string CosineScorer::name() const {
    return "cosine-" + provider_.name() + (calibrate_ ? "-calibrated" : "");
}

std::vector<double> CosineScorer::score_batch(std::span<const MatchExample> examples) const {
    std::vector<std::string> texts;
    std::unordered_map<std::string, std::size_t> slot;
    auto intern = [&](const std::string& t) {
        auto [it, inserted] = slot.emplace(t, texts.size());
        if (inserted) texts.push_back(t);
        return it->second;
    };
    std::vector<std::pair<std::size_t, std::size_t>> refs;
    refs.reserve(examples.size());
    for (const auto& ex : examples) refs.emplace_back(intern(ex.tweet_text), intern(ex.article_text));

    std::vector<Vector> vectors;
    constexpr std::size_t kBatch = 64;
    for (std::size_t begin = 0; begin < texts.size(); begin += kBatch) {
        std::span<const std::string> batch(texts.data() + begin, std::min(kBatch, texts.size() - begin));
        auto part = embed_batch(provider_, batch);
        std::move(part.begin(), part.end(), std::back_inserter(vectors));
    }
    std::vector<double> scores;
    scores.reserve(examples.size());
    for (const auto& [t, a] : refs) scores.push_back(std::clamp((cosine(vectors[t], vectors[a]) + 1.0) / 2.0, 0.0, 1.0));
    return scores;
}

void CosineScorer::fit(std::span<const MatchExample> train) {
    if (!calibrate_) {
        threshold_ = initial_threshold_;
        return;
    }
    auto scores = score_batch(train);
    std::vector<Label> labels;
    for (const auto& ex : train) labels.push_back(ex.label);
    threshold_ = best_threshold(scores, labels);
}

double best_threshold(std::span<const double> scores, std::span<const Label> labels) {
    if (scores.size() != labels.size()) throw usage_error("scores and labels differ in length");
    if (scores.empty()) return 0.5;
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    std::size_t matches_total = 0;
    for (Label l : labels) matches_total += l == Label::match;
    // Threshold just below position i: items [i, n) predicted match.
    std::size_t not_match_below = 0;
    std::size_t match_below = 0;
    double best = scores[order.front()];
    std::size_t best_correct = matches_total;  // everything predicted match
    const std::size_t n = order.size();
    for (std::size_t i = 1; i <= n; ++i) {
        const std::size_t prev = order[i - 1];
        (labels[prev] == Label::match ? match_below : not_match_below) += 1;
        if (i < n && scores[order[i]] == scores[prev]) continue;
        const double candidate = i < n ? (scores[prev] + scores[order[i]]) / 2.0 : (scores[prev] + 1.0) / 2.0;
        if (i == n && scores[prev] >= 1.0) continue;
        const std::size_t correct = not_match_below + (matches_total - match_below);
        if (correct > best_correct) {
            best_correct = correct;
            best = candidate;
        }
    }
    return best;
}

namespace {

MatchRow::Stat stat_of(const std::vector<FoldMetrics>& folds, double (Confusion::*metric)() const) {
    MatchRow::Stat s;
    if (folds.empty()) return s;
    for (const auto& f : folds) s.mean += (f.confusion.*metric)();
    s.mean /= static_cast<double>(folds.size());
    if (folds.size() > 1) {
        double var = 0.0;
        for (const auto& f : folds) {
            double d = (f.confusion.*metric)() - s.mean;
            var += d * d;
        }
        s.stddev = std::sqrt(var / static_cast<double>(folds.size() - 1));
    }
    return s;
}

}  // namespace

MatchRow::Stat MatchRow::accuracy() const { return stat_of(folds, &Confusion::accuracy); }
MatchRow::Stat MatchRow::f1_match() const { return stat_of(folds, &Confusion::f1_match); }
MatchRow::Stat MatchRow::f1_not_match() const { return stat_of(folds, &Confusion::f1_not_match); }

std::vector<MatchExample> match_examples(const Corpus& corpus, const LabeledDataset& dataset, bool include_title) {
    std::vector<MatchExample> out;
    out.reserve(dataset.pairs.size());
    for (const Pair& p : dataset.pairs) {
        out.push_back({query_text(corpus.tweet(p.tweet_id)), article_text(corpus.article(p.article_id), include_title),
                       p.label});
    }
    return out;
}

MatchRow evaluate_matcher(PairScorer& scorer, const std::vector<MatchExample>& examples, std::span<const Fold> folds,
                          std::string partition) {
    MatchRow row;
    row.partition = std::move(partition);
    row.n_pairs = examples.size();
    for (const Fold& fold : folds) {
        std::vector<MatchExample> train;
        std::vector<MatchExample> test;
        for (std::size_t i : fold.train) train.push_back(examples.at(i));
        for (std::size_t i : fold.test) test.push_back(examples.at(i));
        scorer.fit(train);

        FoldMetrics m;
        m.n = test.size();
        m.threshold = scorer.threshold();
        auto scores = scorer.score_batch(test);
        for (std::size_t i = 0; i < test.size(); ++i) {
            const bool truth = test[i].label == Label::match;
            const bool pred = scorer.predict(scores[i]) == Label::match;
            if (truth && pred) ++m.confusion.tp;
            else if (!truth && pred) ++m.confusion.fp;
            else if (truth) ++m.confusion.fn;
            else ++m.confusion.tn;
        }
        row.folds.push_back(m);
    }
    return row;
}

std::string MatchReport::to_json() const {
    ordered_json doc;
    doc["scorer"] = scorer;
    ordered_json out_rows = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json r;
        r["partition"] = row.partition;
        r["pairs"] = row.n_pairs;
        auto put = [&](const char* key, MatchRow::Stat s) { r[key] = {{"mean", s.mean}, {"std", s.stddev}}; };
        put("accuracy", row.accuracy());
        put("f1_match", row.f1_match());
        put("f1_not_match", row.f1_not_match());
        ordered_json folds = ordered_json::array();
        for (const auto& f : row.folds) {
            ordered_json fj;
            fj["n"] = f.n;
            fj["threshold"] = f.threshold;
            fj["tp"] = f.confusion.tp;
            fj["fp"] = f.confusion.fp;
            fj["fn"] = f.confusion.fn;
            fj["tn"] = f.confusion.tn;
            fj["accuracy"] = f.confusion.accuracy();
            fj["f1_match"] = f.confusion.f1_match();
            fj["f1_not_match"] = f.confusion.f1_not_match();
            folds.push_back(std::move(fj));
        }
        r["folds"] = std::move(folds);
        out_rows.push_back(std::move(r));
    }
    doc["results"] = std::move(out_rows);
    return doc.dump(2) + "\n";
}

std::string MatchReport::to_text() const {
    std::ostringstream out;
    out << "scorer: " << scorer << '\n';
    out << std::left << std::setw(10) << "partition" << std::right << std::setw(8) << "pairs" << std::setw(20)
        << "accuracy" << std::setw(20) << "F1+" << std::setw(20) << "F1-" << '\n';
    out << std::fixed << std::setprecision(4);
    auto cell = [&](MatchRow::Stat s) {
        std::ostringstream c;
        c << std::fixed << std::setprecision(4) << s.mean << " +/- " << s.stddev;
        out << std::setw(20) << c.str();
    };
    for (const auto& row : rows) {
        out << std::left << std::setw(10) << row.partition << std::right << std::setw(8) << row.n_pairs;
        cell(row.accuracy());
        cell(row.f1_match());
        cell(row.f1_not_match());
        out << '\n';
    }
    return out.str();
}

}  // namespace claimmatch
