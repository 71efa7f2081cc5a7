#include "claimmatch/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "claimmatch/error.hpp"
#include "claimmatch/textproc.hpp"

namespace claimmatch {

using json = nlohmann::json;

Granularity parse_granularity(std::string_view name) {
    if (name == "article" || name == "full_article" || name == "full") return Granularity::full_article;
    if (name == "paragraph") return Granularity::paragraph;
    throw usage_error("unknown granularity '" + std::string(name) + "' (expected article or paragraph)");
}

std::string_view to_string(Granularity granularity) {
    return granularity == Granularity::full_article ? "article" : "paragraph";
}

std::vector<IndexUnit> make_units(std::span<const Article* const> articles, Granularity granularity,
                                  const ChunkConfig& chunk_cfg) {
    std::vector<IndexUnit> units;
    for (const Article* a : articles) {
        if (granularity == Granularity::full_article) {
            units.push_back({a->id, a->id, article_text(*a, chunk_cfg.include_title)});
            continue;
        }
        for (auto& chunk : chunk_article(*a, chunk_cfg)) {
            units.push_back({a->id + "#" + std::to_string(chunk.chunk_index), a->id, std::move(chunk.text)});
        }
    }
    return units;
}

Bm25Index Bm25Index::build(std::span<const IndexUnit> units, Bm25Params params, Granularity granularity) {
    if (units.empty()) throw data_error("cannot build a BM25 index from an empty unit collection");
    if (!(params.k1 >= 0.0) || !(params.b >= 0.0 && params.b <= 1.0)) {
        throw usage_error("BM25 parameters out of range (need k1 >= 0 and 0 <= b <= 1)");
    }
    Bm25Index idx;
    idx.params_ = params;
    idx.granularity_ = granularity;
    std::uint64_t total_len = 0;
    for (std::size_t u = 0; u < units.size(); ++u) {
        const IndexUnit& unit = units[u];
        if (granularity == Granularity::full_article && unit.unit_id != unit.article_id) {
            throw data_error("full-article unit '" + unit.unit_id + "' must use its article id");
        }
        if (!idx.unit_lookup_.emplace(unit.unit_id, static_cast<std::uint32_t>(u)).second) {
            throw data_error("duplicate index unit id '" + unit.unit_id + "'");
        }
        idx.unit_ids_.push_back(unit.unit_id);
        idx.unit_article_.push_back(unit.article_id);

        std::map<std::string, std::uint32_t> tf;
        auto terms = tokenize_terms(unit.text);
        for (auto& t : terms) ++tf[std::move(t)];
        idx.doc_len_.push_back(static_cast<std::uint32_t>(terms.size()));
        total_len += terms.size();
        for (auto& [term, count] : tf) idx.postings_[term].push_back({static_cast<std::uint32_t>(u), count});
    }
    if (total_len == 0) throw data_error("cannot build a BM25 index: no unit contains a token");
    idx.avg_dl_ = static_cast<double>(total_len) / static_cast<double>(units.size());
    return idx;
}

std::span<const Posting> Bm25Index::postings(std::string_view term) const {
    auto it = postings_.find(std::string(term));
    if (it == postings_.end()) return {};
    return it->second;
}

std::size_t Bm25Index::doc_freq(std::string_view term) const { return postings(term).size(); }

double Bm25Index::idf(std::string_view term) const {
    const double n = static_cast<double>(n_units());
    const double df = static_cast<double>(doc_freq(term));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::term_weight(double idf, std::uint32_t tf, std::uint32_t dl) const {
    const double f = tf;
    const double norm = params_.k1 * (1.0 - params_.b + params_.b * static_cast<double>(dl) / avg_dl_);
    return idf * f * (params_.k1 + 1.0) / (f + norm);
}

std::vector<std::string> Bm25Index::distinct_terms(std::span<const std::string> terms) const {
    std::vector<std::string> out(terms.begin(), terms.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double Bm25Index::score(std::span<const std::string> query_terms, std::string_view unit_id) const {
    auto it = unit_lookup_.find(std::string(unit_id));
    if (it == unit_lookup_.end()) throw data_error("unknown index unit '" + std::string(unit_id) + "'");
    const std::uint32_t unit = it->second;
    double total = 0.0;
    for (const std::string& term : distinct_terms(query_terms)) {
        auto plist = postings(term);
        auto p = std::lower_bound(plist.begin(), plist.end(), unit,
                                  [](const Posting& x, std::uint32_t u) { return x.unit < u; });
        if (p == plist.end() || p->unit != unit) continue;
        total += term_weight(idf(term), p->tf, doc_len_[unit]);
    }
    return total;
}

RankedList Bm25Index::search(std::string_view query_text, std::size_t k, std::string query_id) const {
    if (k < 1) throw usage_error("search depth k must be at least 1");
    std::vector<double> acc(n_units(), 0.0);
    std::vector<bool> hit(n_units(), false);
    for (const std::string& term : distinct_terms(tokenize_terms(query_text))) {
        auto plist = postings(term);
        if (plist.empty()) continue;
        const double w_idf = idf(term);
        for (const Posting& p : plist) {
            acc[p.unit] += term_weight(w_idf, p.tf, doc_len_[p.unit]);
            hit[p.unit] = true;
        }
    }
    std::vector<UnitScore> scored;
    for (std::size_t u = 0; u < n_units(); ++u) {
        if (hit[u]) scored.push_back({unit_article_[u], acc[u]});
    }
    RankedList out = rank_articles(std::move(scored), k, Pooling::max);
    out.query_id = std::move(query_id);
    return out;
}

void Bm25Index::save(std::ostream& out) const {
    json doc;
    doc["format"] = "claimmatch-bm25";
    doc["version"] = kBm25FormatVersion;
    doc["granularity"] = to_string(granularity_);
    doc["k1"] = params_.k1;
    doc["b"] = params_.b;
    json units = json::array();
    for (std::size_t u = 0; u < n_units(); ++u) units.push_back({unit_ids_[u], unit_article_[u], doc_len_[u]});
    doc["units"] = std::move(units);
    json postings = json::object();
    for (const auto& [term, plist] : postings_) {
        json row = json::array();
        for (const Posting& p : plist) row.push_back({p.unit, p.tf});
        postings[term] = std::move(row);
    }
    doc["postings"] = std::move(postings);
    out << doc.dump() << '\n';
    if (!out) throw data_error("failed writing BM25 index");
}

Bm25Index Bm25Index::load(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw data_error(std::string("BM25 index is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != "claimmatch-bm25") {
        throw data_error("not a claimmatch BM25 index file");
    }
    if (doc.value("version", 0) != kBm25FormatVersion) {
        throw data_error("unsupported BM25 index version " + std::to_string(doc.value("version", 0)));
    }
    try {
        Bm25Index idx;
        idx.granularity_ = parse_granularity(doc.at("granularity").get<std::string>());
        idx.params_ = {doc.at("k1").get<double>(), doc.at("b").get<double>()};
        std::uint64_t total = 0;
        for (const auto& row : doc.at("units")) {
            auto id = row.at(0).get<std::string>();
            idx.unit_lookup_.emplace(id, static_cast<std::uint32_t>(idx.unit_ids_.size()));
            idx.unit_ids_.push_back(std::move(id));
            idx.unit_article_.push_back(row.at(1).get<std::string>());
            idx.doc_len_.push_back(row.at(2).get<std::uint32_t>());
            total += idx.doc_len_.back();
        }
        if (idx.unit_ids_.empty() || total == 0) throw data_error("BM25 index file has no indexed tokens");
        idx.avg_dl_ = static_cast<double>(total) / static_cast<double>(idx.unit_ids_.size());
        for (const auto& [term, rows] : doc.at("postings").items()) {
            auto& plist = idx.postings_[term];
            for (const auto& r : rows) {
                Posting p{r.at(0).get<std::uint32_t>(), r.at(1).get<std::uint32_t>()};
                if (p.unit >= idx.unit_ids_.size()) throw data_error("BM25 posting references unknown unit");
                plist.push_back(p);
            }
        }
        return idx;
    } catch (const json::exception& e) {
        throw data_error(std::string("malformed BM25 index: ") + e.what());
    }
}

}  // namespace claimmatch
