#include "claimmatch/claimmatch.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>

#include <json.hpp>

#include "claimmatch/bm25.hpp"
#include "claimmatch/corpus.hpp"
#include "claimmatch/dense.hpp"
#include "claimmatch/error.hpp"
#include "claimmatch/eval.hpp"
#include "claimmatch/mining.hpp"
#include "claimmatch/pipeline.hpp"
#include "claimmatch/providers.hpp"
#include "claimmatch/textproc.hpp"

namespace cm = claimmatch;
using json = nlohmann::json;

struct cm_corpus {
    cm::Corpus value;
};
struct cm_embedder {
    std::unique_ptr<cm::EmbeddingProvider> value;
};
struct cm_translator {
    std::unique_ptr<cm::TranslationProvider> value;
};
struct cm_bm25 {
    cm::Bm25Index value;
};
struct cm_store {
    cm::VectorStore value;
};

namespace {

thread_local std::string last_error;

cm_status status_of(cm::ErrorKind kind) {
    switch (kind) {
        case cm::ErrorKind::usage: return CM_ERR_USAGE;
        case cm::ErrorKind::data: return CM_ERR_DATA;
        case cm::ErrorKind::provider: return CM_ERR_PROVIDER;
    }
    return CM_ERR_INTERNAL;
}

template <typename Fn>
cm_status guarded(Fn&& fn) {
    try {
        last_error.clear();
        fn();
        return CM_OK;
    } catch (const cm::Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return CM_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return CM_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return CM_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (!p) throw cm::usage_error(std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

void set_out(char** out, const std::string& s) {
    if (out) *out = dup_string(s);
}

std::string str_or(const char* s, const char* fallback) { return s ? std::string(s) : std::string(fallback); }

std::set<std::pair<cm::Lang, cm::Lang>> parse_pairs(const char* csv) {
    std::set<std::pair<cm::Lang, cm::Lang>> out;
    if (!csv) return out;
    std::stringstream ss(csv);
    std::string tag;
    while (std::getline(ss, tag, ',')) {
        auto t = cm::trim(tag);
        if (t.empty()) continue;
        auto lp = cm::LangPair::parse(t);
        out.insert({lp.tweet, lp.article});
    }
    return out;
}

std::vector<const cm::Article*> select_articles(const cm::Corpus& corpus, const char* partition) {
    if (partition && *partition) return cm::partition_articles(corpus, partition);
    std::vector<const cm::Article*> out;
    for (const auto& a : corpus.articles()) out.push_back(&a);
    return out;
}

cm::ChunkConfig chunk_config(const cm_index_options& o) {
    cm::ChunkConfig c;
    c.token_limit = o.token_limit;
    c.include_title = o.include_title != 0;
    return c;
}

std::string run_text(const std::vector<cm::RankedList>& rankings, const char* system) {
    std::ostringstream out;
    cm::write_run(out, rankings, str_or(system, "claimmatch"));
    return out.str();
}

std::string query_log(const std::vector<cm::QueryLogEntry>& queries) {
    std::ostringstream out;
    for (const auto& q : queries) {
        std::string text = q.text;
        for (char& c : text) {
            if (c == '\t' || c == '\n' || c == '\r') c = ' ';
        }
        out << q.query_id << '\t' << text << '\n';
    }
    return out.str();
}

std::ofstream open_for_write(const char* path) {
    require(path, "path");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw cm::data_error(std::string("cannot write '") + path + "'");
    return out;
}

std::ifstream open_for_read(const char* path) {
    require(path, "path");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cm::data_error(std::string("cannot open '") + path + "'");
    return in;
}

}  // namespace

extern "C" {

const char* cm_version(void) { return "0.1.0"; }

const char* cm_last_error(void) { return last_error.c_str(); }

void cm_string_free(char* s) { std::free(s); }

void cm_set_warning_callback(cm_warning_fn fn, void* user) {
    if (!fn) {
        cm::set_warning_sink([](const std::string& msg) { std::fprintf(stderr, "warning: %s\n", msg.c_str()); });
        return;
    }
    cm::set_warning_sink([fn, user](const std::string& msg) { fn(msg.c_str(), user); });
}

cm_status cm_corpus_load(const char* path, cm_corpus** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new cm_corpus{cm::load_corpus(path)};
    });
}

cm_status cm_corpus_parse(const char* jsonl, size_t len, cm_corpus** out) {
    return guarded([&] {
        require(jsonl, "jsonl");
        require(out, "out");
        std::istringstream in(std::string(jsonl, len));
        *out = new cm_corpus{cm::ingest_corpus(in)};
    });
}

void cm_corpus_free(cm_corpus* corpus) { delete corpus; }

cm_status cm_corpus_write(const cm_corpus* corpus, const char* path) {
    return guarded([&] {
        require(corpus, "corpus");
        auto out = open_for_write(path);
        cm::write_corpus(corpus->value, out);
    });
}

cm_status cm_corpus_validate(const cm_corpus* corpus, int as_json, char** out_report) {
    return guarded([&] {
        require(corpus, "corpus");
        auto report = cm::validate_corpus(corpus->value);
        set_out(out_report, as_json ? report.to_json() : report.to_text());
    });
}

cm_status cm_corpus_partitions(const cm_corpus* corpus, char** out_json) {
    return guarded([&] {
        require(corpus, "corpus");
        json tags = json::array();
        for (const auto& [tag, part] : corpus->value.partitions()) tags.push_back(tag);
        set_out(out_json, tags.dump());
    });
}

cm_status cm_corpus_write_qrels(const cm_corpus* corpus, const char* partition, const char* path) {
    return guarded([&] {
        require(corpus, "corpus");
        require(partition, "partition");
        auto qrels = cm::qrels_from_corpus(corpus->value, partition);
        auto out = open_for_write(path);
        cm::write_qrels(out, qrels);
    });
}

cm_status cm_embedder_new_hashed(size_t dim, size_t max_tokens, cm_embedder** out) {
    return guarded([&] {
        require(out, "out");
        *out = new cm_embedder{std::make_unique<cm::HashedEmbedder>(dim, max_tokens)};
    });
}

cm_status cm_embedder_new_http(const char* base_url, const char* model, size_t dim, size_t max_tokens,
                               cm_embedder** out) {
    return guarded([&] {
        require(base_url, "base_url");
        require(model, "model");
        require(out, "out");
        *out = new cm_embedder{
            std::make_unique<cm::HttpEmbeddingProvider>(cm::ServiceEndpoint{base_url}, model, dim, max_tokens)};
    });
}

void cm_embedder_free(cm_embedder* embedder) { delete embedder; }

cm_status cm_embedder_dim(const cm_embedder* embedder, size_t* out_dim) {
    return guarded([&] {
        require(embedder, "embedder");
        require(out_dim, "out_dim");
        *out_dim = embedder->value->dim();
    });
}

cm_status cm_embedder_embed(const cm_embedder* embedder, const char* const* texts, size_t n, float* out,
                            size_t out_len) {
    return guarded([&] {
        require(embedder, "embedder");
        require(texts, "texts");
        require(out, "out");
        std::vector<std::string> batch;
        for (size_t i = 0; i < n; ++i) {
            require(texts[i], "texts[i]");
            batch.emplace_back(texts[i]);
        }
        const size_t dim = embedder->value->dim();
        if (out_len < n * dim) {
            throw cm::usage_error("output buffer holds " + std::to_string(out_len) + " floats, need " +
                                  std::to_string(n * dim));
        }
        auto vectors = cm::embed_batch(*embedder->value, batch);
        for (size_t i = 0; i < vectors.size(); ++i) std::copy(vectors[i].begin(), vectors[i].end(), out + i * dim);
    });
}

cm_status cm_translator_new_stub(const char* table_json, const char* pairs, cm_translator** out) {
    return guarded([&] {
        require(out, "out");
        std::map<std::string, std::string> table;
        if (table_json) {
            try {
                table = json::parse(table_json).get<std::map<std::string, std::string>>();
            } catch (const json::exception& e) {
                throw cm::usage_error(std::string("translation table must be a JSON object of strings: ") + e.what());
            }
        }
        auto p = pairs ? parse_pairs(pairs) : std::set<std::pair<cm::Lang, cm::Lang>>{{cm::Lang::hi, cm::Lang::en}};
        *out = new cm_translator{std::make_unique<cm::StubTranslator>(std::move(table), std::move(p))};
    });
}

cm_status cm_translator_new_http(const char* base_url, const char* pairs, cm_translator** out) {
    return guarded([&] {
        require(base_url, "base_url");
        require(out, "out");
        *out = new cm_translator{
            std::make_unique<cm::HttpTranslationProvider>(cm::ServiceEndpoint{base_url}, parse_pairs(pairs))};
    });
}

void cm_translator_free(cm_translator* translator) { delete translator; }

cm_status cm_translator_translate(const cm_translator* translator, const char* text, const char* src,
                                  const char* dst, char** out) {
    return guarded([&] {
        require(translator, "translator");
        require(text, "text");
        require(src, "src");
        require(dst, "dst");
        set_out(out, cm::translate(*translator->value, text, cm::parse_lang(src), cm::parse_lang(dst)));
    });
}

cm_index_options cm_index_options_default(void) {
    return cm_index_options{nullptr, "article", 1.2, 0.75, 512, 1};
}

cm_status cm_bm25_build(const cm_corpus* corpus, const cm_index_options* options, cm_bm25** out) {
    return guarded([&] {
        require(corpus, "corpus");
        require(out, "out");
        const cm_index_options o = options ? *options : cm_index_options_default();
        auto granularity = cm::parse_granularity(str_or(o.granularity, "article"));
        auto articles = select_articles(corpus->value, o.partition);
        auto units = cm::make_units(articles, granularity, chunk_config(o));
        *out = new cm_bm25{cm::Bm25Index::build(units, {o.k1, o.b}, granularity)};
    });
}

cm_status cm_bm25_save(const cm_bm25* index, const char* path) {
    return guarded([&] {
        require(index, "index");
        auto out = open_for_write(path);
        index->value.save(out);
    });
}

cm_status cm_bm25_load(const char* path, cm_bm25** out) {
    return guarded([&] {
        require(out, "out");
        auto in = open_for_read(path);
        *out = new cm_bm25{cm::Bm25Index::load(in)};
    });
}

void cm_bm25_free(cm_bm25* index) { delete index; }

cm_status cm_bm25_info(const cm_bm25* index, char** out_json) {
    return guarded([&] {
        require(index, "index");
        const auto& idx = index->value;
        json info = {{"granularity", std::string(cm::to_string(idx.granularity()))},
                     {"units", idx.n_units()},
                     {"avg_dl", idx.avg_dl()},
                     {"terms", idx.vocabulary_size()},
                     {"k1", idx.params().k1},
                     {"b", idx.params().b}};
        set_out(out_json, info.dump());
    });
}

cm_status cm_bm25_search(const cm_bm25* index, const char* query_id, const char* query_text, size_t k,
                         const char* system, char** out_run) {
    return guarded([&] {
        require(index, "index");
        require(query_text, "query_text");
        auto ranking = index->value.search(query_text, k, str_or(query_id, "q"));
        set_out(out_run, run_text({ranking}, system));
    });
}

cm_status cm_store_build(const cm_corpus* corpus, const cm_embedder* embedder, const cm_index_options* options,
                         cm_store** out) {
    return guarded([&] {
        require(corpus, "corpus");
        require(embedder, "embedder");
        require(out, "out");
        const cm_index_options o = options ? *options : cm_index_options_default();
        std::vector<cm::ParagraphChunk> chunks;
        for (const cm::Article* a : select_articles(corpus->value, o.partition)) {
            auto c = cm::chunk_article(*a, chunk_config(o));
            std::move(c.begin(), c.end(), std::back_inserter(chunks));
        }
        *out = new cm_store{cm::VectorStore::build(*embedder->value, chunks)};
    });
}

cm_status cm_store_save(const cm_store* store, const char* path) {
    return guarded([&] {
        require(store, "store");
        auto out = open_for_write(path);
        store->value.save(out);
    });
}

cm_status cm_store_load(const char* path, cm_store** out) {
    return guarded([&] {
        require(out, "out");
        auto in = open_for_read(path);
        *out = new cm_store{cm::VectorStore::load(in)};
    });
}

void cm_store_free(cm_store* store) { delete store; }

cm_status cm_store_info(const cm_store* store, char** out_json) {
    return guarded([&] {
        require(store, "store");
        json info = {{"provider", store->value.provider_name()},
                     {"dim", store->value.dim()},
                     {"chunks", store->value.size()}};
        set_out(out_json, info.dump());
    });
}

cm_status cm_store_search(const cm_store* store, const cm_embedder* embedder, const char* query_id,
                          const char* query_text, size_t k, const char* system, const char* pooling, char** out_run) {
    return guarded([&] {
        require(store, "store");
        require(embedder, "embedder");
        require(query_text, "query_text");
        auto ranking = store->value.search(*embedder->value, query_text, k, str_or(query_id, "q"),
                                           cm::parse_pooling(str_or(pooling, "max")));
        set_out(out_run, run_text({ranking}, system));
    });
}

cm_status cm_bm25_search_partition(const cm_bm25* index, const cm_corpus* corpus, const char* partition,
                                   const cm_translator* translator, size_t k, const char* system, char** out_run,
                                   char** out_query_log) {
    return guarded([&] {
        require(index, "index");
        require(corpus, "corpus");
        require(partition, "partition");
        auto kind = index->value.granularity() == cm::Granularity::full_article ? cm::SystemKind::bm25_full
                                                                                 : cm::SystemKind::bm25_paragraph;
        auto queries =
            cm::prepare_queries(corpus->value, partition, kind, translator ? translator->value.get() : nullptr);
        std::vector<cm::RankedList> rankings;
        for (const auto& q : queries) rankings.push_back(index->value.search(q.text, k, q.query_id));
        set_out(out_run, run_text(rankings, system));
        set_out(out_query_log, query_log(queries));
    });
}

cm_status cm_store_search_partition(const cm_store* store, const cm_embedder* embedder, const cm_corpus* corpus,
                                    const char* partition, size_t k, const char* system, const char* pooling,
                                    char** out_run, char** out_query_log) {
    return guarded([&] {
        require(store, "store");
        require(embedder, "embedder");
        require(corpus, "corpus");
        require(partition, "partition");
        auto pool = cm::parse_pooling(str_or(pooling, "max"));
        auto queries = cm::prepare_queries(corpus->value, partition, cm::SystemKind::dense, nullptr);
        std::vector<cm::RankedList> rankings;
        for (const auto& q : queries) {
            rankings.push_back(store->value.search(*embedder->value, q.text, k, q.query_id, pool));
        }
        set_out(out_run, run_text(rankings, system));
        set_out(out_query_log, query_log(queries));
    });
}

cm_mining_options cm_mining_options_default(void) { return cm_mining_options{nullptr, "random", 0.7, 1, 0, 1}; }

cm_status cm_mine(const cm_corpus* corpus, const cm_embedder* embedder, const cm_mining_options* options,
                  const char* out_path, char** out_summary) {
    return guarded([&] {
        require(corpus, "corpus");
        const cm_mining_options o = options ? *options : cm_mining_options_default();
        cm::MiningConfig cfg;
        cfg.strategy = cm::parse_strategy(str_or(o.strategy, "random"));
        cfg.similarity_ceiling = o.ceiling;
        cfg.negatives_per_positive = o.negatives_per_positive;
        cfg.seed = o.seed;
        cfg.include_title = o.include_title != 0;
        if (cfg.strategy == cm::MiningStrategy::hard &&
            !(cfg.similarity_ceiling > 0.0 && cfg.similarity_ceiling <= 1.0)) {
            throw cm::usage_error("similarity ceiling must be in (0, 1]");
        }

        std::vector<std::string> tags;
        if (o.partition && *o.partition) {
            tags.emplace_back(o.partition);
        } else {
            for (const auto& [tag, part] : corpus->value.partitions()) tags.push_back(tag);
        }
        if (tags.empty()) throw cm::data_error("corpus has no partitions to mine");

        cm::LabeledDataset all;
        all.partition = tags.size() == 1 ? tags.front() : "all";
        json per_partition = json::object();
        for (const auto& tag : tags) {
            auto negatives = cm::mine(corpus->value, tag, embedder ? embedder->value.get() : nullptr, cfg);
            auto ds = cm::assemble(cm::positive_pairs(corpus->value, tag), std::move(negatives), cfg.seed, tag);
            per_partition[tag] = {{"match", ds.count(cm::Label::match)},
                                  {"not_match", ds.count(cm::Label::not_match)}};
            all.pairs.insert(all.pairs.end(), ds.pairs.begin(), ds.pairs.end());
        }
        if (out_path) {
            auto out = open_for_write(out_path);
            cm::write_dataset(all, out);
        }
        json summary = {{"strategy", std::string(cm::to_string(cfg.strategy))},
                        {"pairs", all.pairs.size()},
                        {"match", all.count(cm::Label::match)},
                        {"not_match", all.count(cm::Label::not_match)},
                        {"partitions", per_partition}};
        set_out(out_summary, summary.dump(2));
    });
}

cm_status cm_eval_retrieval(const char* run_path, const char* qrels_path, const size_t* ks, size_t n_ks,
                            const char* system, char** out_json, char** out_text) {
    return guarded([&] {
        std::vector<size_t> k_list = ks && n_ks ? std::vector<size_t>(ks, ks + n_ks) : cm::kDefaultKs;
        for (size_t k : k_list) {
            if (k < 1) throw cm::usage_error("K values must be positive");
        }
        auto run_in = open_for_read(run_path);
        auto qrels_in = open_for_read(qrels_path);
        std::string found;
        cm::Run run = cm::read_run(run_in, system ? system : "", &found);
        cm::Qrels qrels = cm::read_qrels(qrels_in);
        cm::RetrievalReport report;
        report.ks = k_list;
        report.rows.push_back(cm::evaluate_retrieval(run, qrels, k_list, found.empty() ? "run" : found, ""));
        set_out(out_json, report.to_json());
        set_out(out_text, report.to_text());
    });
}

cm_match_options cm_match_options_default(void) { return cm_match_options{5, 13, 0.5, 1, "stratified", 1}; }

cm_status cm_eval_match(const cm_corpus* corpus, const char* dataset_path, const cm_embedder* embedder,
                        const cm_match_options* options, char** out_json, char** out_text) {
    return guarded([&] {
        require(corpus, "corpus");
        require(embedder, "embedder");
        const cm_match_options o = options ? *options : cm_match_options_default();
        auto in = open_for_read(dataset_path);
        auto dataset = cm::read_dataset(in, corpus->value);
        auto folds = cm::kfold_split(dataset, o.folds, o.seed, cm::parse_split_mode(str_or(o.split, "stratified")));
        cm::CosineScorer scorer(*embedder->value, o.threshold, o.calibrate != 0);
        cm::MatchReport report;
        report.scorer = scorer.name();
        report.rows.push_back(cm::evaluate_matcher(
            scorer, cm::match_examples(corpus->value, dataset, o.include_title != 0), folds, dataset.partition));
        set_out(out_json, report.to_json());
        set_out(out_text, report.to_text());
    });
}

cm_status cm_experiment_run(const char* config_path, char** out_summary) {
    return guarded([&] {
        require(config_path, "config_path");
        auto cfg = cm::ExperimentConfig::load(config_path);
        auto summary = cm::run_experiment(cfg);
        std::ostringstream out;
        if (!summary.retrieval_text.empty()) out << summary.retrieval_text << '\n';
        if (!summary.matching_text.empty()) out << summary.matching_text << '\n';
        out << "wrote " << summary.files.size() << " files under " << cfg.output_dir.string() << '\n';
        set_out(out_summary, out.str());
    });
}

}  // extern "C"
