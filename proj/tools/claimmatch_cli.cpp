// Command-line front end. Talks to the engine only through the C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "claimmatch/claimmatch.h"

namespace {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 provider error.
int exit_code(cm_status status) {
    switch (status) {
        case CM_OK: return 0;
        case CM_ERR_USAGE: return 1;
        case CM_ERR_PROVIDER: return 3;
        case CM_ERR_DATA:
        case CM_ERR_INTERNAL: return 2;
    }
    return 2;
}

struct Failure {
    int code;
};

void check(cm_status status) {
    if (status == CM_OK) return;
    std::cerr << "claimmatch: " << cm_last_error() << '\n';
    throw Failure{exit_code(status)};
}

[[noreturn]] void usage_fail(const std::string& message) {
    std::cerr << "claimmatch: " << message << '\n';
    throw Failure{1};
}

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { cm_string_free(ptr); }
    std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

template <typename T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(ptr); }
};

using Corpus = Handle<cm_corpus, cm_corpus_free>;
using Embedder = Handle<cm_embedder, cm_embedder_free>;
using Translator = Handle<cm_translator, cm_translator_free>;
using Bm25 = Handle<cm_bm25, cm_bm25_free>;
using Store = Handle<cm_store, cm_store_free>;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        std::cerr << "claimmatch: cannot write '" << path << "'\n";
        throw Failure{2};
    }
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "claimmatch: cannot open '" << path << "'\n";
        throw Failure{1};
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct EmbedderOptions {
    std::size_t dim = 512;
    std::size_t max_tokens = 512;
    std::string model;  // non-empty selects the HTTP service at $EMBED_URL

    void add_to(CLI::App* cmd) {
        cmd->add_option("--dim", dim, "Built-in hashed embedder dimension (or expected service dimension)");
        cmd->add_option("--max-tokens", max_tokens, "Truncate embedding inputs to this many tokens");
        cmd->add_option("--model", model, "Use the embedding service at $EMBED_URL with this model");
    }

    void open(Embedder& out) const {
        if (model.empty()) {
            check(cm_embedder_new_hashed(dim, max_tokens, &out.ptr));
            return;
        }
        const char* url = std::getenv("EMBED_URL");
        if (!url || !*url) usage_fail("--model needs the EMBED_URL environment variable");
        check(cm_embedder_new_http(url, model.c_str(), dim == 512 ? 0 : dim, max_tokens, &out.ptr));
    }
};

struct IndexOptions {
    std::string partition;
    std::size_t token_limit = 512;
    bool no_title = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--partition", partition, "Restrict to one language-pair partition, e.g. en-en");
        cmd->add_option("--token-limit", token_limit, "Maximum tokens per paragraph chunk")
            ->check(CLI::PositiveNumber);
        cmd->add_flag("--no-title", no_title, "Do not index article titles");
    }

    cm_index_options to_c() const {
        cm_index_options o = cm_index_options_default();
        o.partition = partition.empty() ? nullptr : partition.c_str();
        o.token_limit = token_limit;
        o.include_title = no_title ? 0 : 1;
        return o;
    }
};

void open_translator(const std::string& table_path, Translator& out) {
    if (!table_path.empty()) {
        std::string table = read_file(table_path);
        check(cm_translator_new_stub(table.c_str(), nullptr, &out.ptr));
        return;
    }
    const char* url = std::getenv("TRANSLATE_URL");
    if (url && *url) check(cm_translator_new_http(url, nullptr, &out.ptr));
}

std::vector<std::size_t> parse_ks(const std::string& csv) {
    std::vector<std::size_t> ks;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            long long v = std::stoll(item, &used);
            if (used != item.size() || v < 1) throw std::invalid_argument(item);
            ks.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            usage_fail("bad --ks value '" + item + "'");
        }
    }
    return ks;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"claimmatch: fact-check retrieval and claim-matching toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cm_version()));

    // ingest
    std::string ingest_path, ingest_out;
    auto* ingest = app.add_subcommand("ingest", "Read and check a JSONL corpus; optionally write it back normalized");
    ingest->add_option("corpus", ingest_path, "Corpus JSONL file")->required();
    ingest->add_option("--out", ingest_out, "Write the normalized corpus here");

    // validate
    std::string validate_path;
    bool validate_json = false;
    auto* validate = app.add_subcommand("validate", "Report partitions, orphans and duplicate pairs");
    validate->add_option("corpus", validate_path, "Corpus JSONL file")->required();
    validate->add_flag("--json", validate_json, "Emit JSON");

    // qrels
    std::string qrels_corpus, qrels_partition, qrels_out;
    auto* qrels = app.add_subcommand("qrels", "Write TREC qrels for a partition");
    qrels->add_option("--corpus", qrels_corpus)->required();
    qrels->add_option("--partition", qrels_partition)->required();
    qrels->add_option("--out", qrels_out)->required();

    // index
    std::string index_corpus, index_out, index_granularity = "article";
    double index_k1 = 1.2, index_b = 0.75;
    IndexOptions index_opts;
    auto* index = app.add_subcommand("index", "Build a BM25 index");
    index->add_option("--corpus", index_corpus)->required();
    index->add_option("--granularity", index_granularity)->check(CLI::IsMember({"article", "paragraph"}));
    index->add_option("--k1", index_k1);
    index->add_option("--b", index_b);
    index->add_option("--out", index_out)->required();
    index_opts.add_to(index);

    // embed-store
    std::string store_corpus, store_out;
    IndexOptions store_opts;
    EmbedderOptions store_embedder;
    auto* embed_store = app.add_subcommand("embed-store", "Embed article chunks into a vector store");
    embed_store->add_option("--corpus", store_corpus)->required();
    embed_store->add_option("--out", store_out)->required();
    store_opts.add_to(embed_store);
    store_embedder.add_to(embed_store);

    // search
    std::string search_system, search_index, search_query, search_query_id = "q", search_corpus,
                                                            search_partition, search_run_out, search_log_out,
                                                            search_table, search_name, search_pooling = "max";
    std::size_t search_k = 10;
    EmbedderOptions search_embedder;
    auto* search = app.add_subcommand("search", "Rank articles for one query or for every tweet of a partition");
    search->add_option("--system", search_system)
        ->required()
        ->check(CLI::IsMember({"bm25-full", "bm25-para", "dense"}));
    search->add_option("--index", search_index, "BM25 index (bm25-*) or vector store (dense)")->required();
    search->add_option("--k", search_k)->check(CLI::PositiveNumber);
    auto* q_opt = search->add_option("--query", search_query, "Query text");
    search->add_option("--query-id", search_query_id);
    auto* c_opt = search->add_option("--corpus", search_corpus, "Run every tweet of --partition as a query");
    search->add_option("--partition", search_partition);
    search->add_option("--run-out", search_run_out, "Write the TREC run here instead of stdout");
    search->add_option("--queries-out", search_log_out, "Write the query log (id, text actually searched)");
    search->add_option("--translate-table", search_table, "Stub dictionary (JSON) for cross-lingual BM25");
    search->add_option("--name", search_name, "System name written into the run");
    search->add_option("--pooling", search_pooling)->check(CLI::IsMember({"max", "sum", "mean"}));
    q_opt->excludes(c_opt);
    search_embedder.add_to(search);

    // mine
    std::string mine_corpus, mine_out, mine_strategy = "random", mine_partition;
    double mine_ceiling = 0.7;
    std::size_t mine_ratio = 1;
    std::uint64_t mine_seed = 13;
    bool mine_no_title = false;
    EmbedderOptions mine_embedder;
    auto* mine = app.add_subcommand("mine", "Mine negative pairs and write a labeled dataset");
    mine->add_option("--corpus", mine_corpus)->required();
    mine->add_option("--strategy", mine_strategy)->check(CLI::IsMember({"random", "hard"}));
    mine->add_option("--ceiling", mine_ceiling, "Hard negatives must score below this cosine");
    mine->add_option("--ratio", mine_ratio, "Negatives per positive")->check(CLI::PositiveNumber);
    mine->add_option("--seed", mine_seed);
    mine->add_option("--partition", mine_partition);
    mine->add_option("--out", mine_out)->required();
    mine->add_flag("--no-title", mine_no_title);
    mine_embedder.add_to(mine);

    // eval-retrieval
    std::string er_run, er_qrels, er_ks = "1,5,10,20,50", er_system;
    bool er_json = false;
    auto* eval_retrieval = app.add_subcommand("eval-retrieval", "MAP@K and MRR of a TREC run");
    eval_retrieval->add_option("--run", er_run)->required();
    eval_retrieval->add_option("--qrels", er_qrels)->required();
    eval_retrieval->add_option("--ks", er_ks);
    eval_retrieval->add_option("--system", er_system);
    eval_retrieval->add_flag("--json", er_json);

    // eval-match
    std::string em_corpus, em_dataset, em_split = "stratified";
    std::size_t em_folds = 5;
    std::uint64_t em_seed = 13;
    double em_threshold = 0.5;
    bool em_fixed = false, em_json = false, em_no_title = false;
    EmbedderOptions em_embedder;
    auto* eval_match = app.add_subcommand("eval-match", "k-fold evaluation of the cosine pair scorer");
    eval_match->add_option("--corpus", em_corpus)->required();
    eval_match->add_option("--dataset", em_dataset)->required();
    eval_match->add_option("--folds", em_folds)->check(CLI::Range(2, 1000));
    eval_match->add_option("--seed", em_seed);
    eval_match->add_option("--threshold", em_threshold)->check(CLI::Range(0.0, 1.0));
    eval_match->add_flag("--fixed-threshold", em_fixed, "Do not calibrate the threshold on training folds");
    eval_match->add_option("--split", em_split)->check(CLI::IsMember({"stratified", "group"}));
    eval_match->add_flag("--json", em_json);
    eval_match->add_flag("--no-title", em_no_title);
    em_embedder.add_to(eval_match);

    // experiment
    std::string exp_config;
    auto* experiment = app.add_subcommand("experiment", "Run the retrieval and matching experiments from a config");
    experiment->add_option("--config", exp_config)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*ingest) {
            Corpus corpus;
            check(cm_corpus_load(ingest_path.c_str(), &corpus.ptr));
            OwnedString report;
            check(cm_corpus_validate(corpus.ptr, 0, &report.ptr));
            std::cout << report.str();
            if (!ingest_out.empty()) check(cm_corpus_write(corpus.ptr, ingest_out.c_str()));
        } else if (*validate) {
            Corpus corpus;
            check(cm_corpus_load(validate_path.c_str(), &corpus.ptr));
            OwnedString report;
            check(cm_corpus_validate(corpus.ptr, validate_json ? 1 : 0, &report.ptr));
            std::cout << report.str();
            if (validate_json) std::cout << '\n';
        } else if (*qrels) {
            Corpus corpus;
            check(cm_corpus_load(qrels_corpus.c_str(), &corpus.ptr));
            check(cm_corpus_write_qrels(corpus.ptr, qrels_partition.c_str(), qrels_out.c_str()));
        } else if (*index) {
            Corpus corpus;
            check(cm_corpus_load(index_corpus.c_str(), &corpus.ptr));
            cm_index_options o = index_opts.to_c();
            o.granularity = index_granularity.c_str();
            o.k1 = index_k1;
            o.b = index_b;
            Bm25 idx;
            check(cm_bm25_build(corpus.ptr, &o, &idx.ptr));
            check(cm_bm25_save(idx.ptr, index_out.c_str()));
            OwnedString info;
            check(cm_bm25_info(idx.ptr, &info.ptr));
            std::cout << info.str() << '\n';
        } else if (*embed_store) {
            Corpus corpus;
            check(cm_corpus_load(store_corpus.c_str(), &corpus.ptr));
            Embedder emb;
            store_embedder.open(emb);
            cm_index_options o = store_opts.to_c();
            Store store;
            check(cm_store_build(corpus.ptr, emb.ptr, &o, &store.ptr));
            check(cm_store_save(store.ptr, store_out.c_str()));
            OwnedString info;
            check(cm_store_info(store.ptr, &info.ptr));
            std::cout << info.str() << '\n';
        } else if (*search) {
            if (search_query.empty() && search_corpus.empty()) usage_fail("search needs --query or --corpus");
            if (!search_corpus.empty() && search_partition.empty()) usage_fail("--corpus needs --partition");
            const std::string name = search_name.empty() ? search_system : search_name;
            OwnedString run, log;
            if (search_system == "dense") {
                Store store;
                check(cm_store_load(search_index.c_str(), &store.ptr));
                Embedder emb;
                search_embedder.open(emb);
                if (search_query.empty()) {
                    Corpus corpus;
                    check(cm_corpus_load(search_corpus.c_str(), &corpus.ptr));
                    check(cm_store_search_partition(store.ptr, emb.ptr, corpus.ptr, search_partition.c_str(),
                                                    search_k, name.c_str(), search_pooling.c_str(), &run.ptr,
                                                    &log.ptr));
                } else {
                    check(cm_store_search(store.ptr, emb.ptr, search_query_id.c_str(), search_query.c_str(),
                                          search_k, name.c_str(), search_pooling.c_str(), &run.ptr));
                }
            } else {
                Bm25 idx;
                check(cm_bm25_load(search_index.c_str(), &idx.ptr));
                OwnedString info;
                check(cm_bm25_info(idx.ptr, &info.ptr));
                const bool is_article = info.str().find("\"granularity\":\"article\"") != std::string::npos;
                if (is_article != (search_system == "bm25-full")) {
                    usage_fail("index granularity does not match --system " + search_system);
                }
                if (search_query.empty()) {
                    Corpus corpus;
                    check(cm_corpus_load(search_corpus.c_str(), &corpus.ptr));
                    Translator tr;
                    open_translator(search_table, tr);
                    check(cm_bm25_search_partition(idx.ptr, corpus.ptr, search_partition.c_str(), tr.ptr, search_k,
                                                   name.c_str(), &run.ptr, &log.ptr));
                } else {
                    check(cm_bm25_search(idx.ptr, search_query_id.c_str(), search_query.c_str(), search_k,
                                         name.c_str(), &run.ptr));
                }
            }
            if (search_run_out.empty()) {
                std::cout << run.str();
            } else {
                write_file(search_run_out, run.str());
            }
            if (!search_log_out.empty()) write_file(search_log_out, log.str());
        } else if (*mine) {
            Corpus corpus;
            check(cm_corpus_load(mine_corpus.c_str(), &corpus.ptr));
            Embedder emb;
            if (mine_strategy == "hard") mine_embedder.open(emb);
            cm_mining_options o = cm_mining_options_default();
            o.partition = mine_partition.empty() ? nullptr : mine_partition.c_str();
            o.strategy = mine_strategy.c_str();
            o.ceiling = mine_ceiling;
            o.negatives_per_positive = mine_ratio;
            o.seed = mine_seed;
            o.include_title = mine_no_title ? 0 : 1;
            OwnedString summary;
            check(cm_mine(corpus.ptr, emb.ptr, &o, mine_out.c_str(), &summary.ptr));
            std::cout << summary.str() << '\n';
        } else if (*eval_retrieval) {
            auto ks = parse_ks(er_ks);
            OwnedString json, text;
            check(cm_eval_retrieval(er_run.c_str(), er_qrels.c_str(), ks.data(), ks.size(),
                                    er_system.empty() ? nullptr : er_system.c_str(), &json.ptr, &text.ptr));
            std::cout << (er_json ? json.str() : text.str());
        } else if (*eval_match) {
            Corpus corpus;
            check(cm_corpus_load(em_corpus.c_str(), &corpus.ptr));
            Embedder emb;
            em_embedder.open(emb);
            cm_match_options o = cm_match_options_default();
            o.folds = em_folds;
            o.seed = em_seed;
            o.threshold = em_threshold;
            o.calibrate = em_fixed ? 0 : 1;
            o.split = em_split.c_str();
            o.include_title = em_no_title ? 0 : 1;
            OwnedString json, text;
            check(cm_eval_match(corpus.ptr, em_dataset.c_str(), emb.ptr, &o, &json.ptr, &text.ptr));
            std::cout << (em_json ? json.str() : text.str());
        } else if (*experiment) {
            OwnedString summary;
            check(cm_experiment_run(exp_config.c_str(), &summary.ptr));
            std::cout << summary.str();
        }
    } catch (const Failure& f) {
        return f.code;
    }
    return 0;
}
