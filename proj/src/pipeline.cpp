#include "claimmatch/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "claimmatch/dense.hpp"
#include "claimmatch/error.hpp"

namespace claimmatch {

namespace fs = std::filesystem;
using json = nlohmann::json;

SystemKind parse_system_kind(std::string_view name) {
    if (name == "bm25-full") return SystemKind::bm25_full;
    if (name == "bm25-para") return SystemKind::bm25_paragraph;
    if (name == "dense") return SystemKind::dense;
    throw usage_error("unknown system '" + std::string(name) + "' (expected bm25-full, bm25-para or dense)");
}

std::string_view to_string(SystemKind kind) {
    switch (kind) {
        case SystemKind::bm25_full: return "bm25-full";
        case SystemKind::bm25_paragraph: return "bm25-para";
        case SystemKind::dense: return "dense";
    }
    return "?";
}

std::vector<SystemSpec> ExperimentConfig::default_systems() {
    return {
        {"bm25-full", SystemKind::bm25_full, {}, Pooling::max},
        {"bm25-para", SystemKind::bm25_paragraph, {}, Pooling::max},
        {"dense-labse", SystemKind::dense, "labse", Pooling::max},
        {"dense-sbert", SystemKind::dense, "sbert", Pooling::max},
    };
}

std::map<std::string, EmbedderSpec> ExperimentConfig::default_embedders() {
    EmbedderSpec labse;
    labse.dim = 512;
    EmbedderSpec sbert;
    sbert.dim = 768;
    return {{"labse", labse}, {"sbert", sbert}};
}

namespace {

class ConfigReader {
public:
    ConfigReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw usage_error(where_ + " must be a JSON object");
    }

    ~ConfigReader() = default;

    template <typename T>
    T get(const char* key, T fallback) {
        used_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return fallback;
        try {
            return it->get<T>();
        } catch (const json::exception&) {
            throw usage_error(where_ + "." + key + " has the wrong type");
        }
    }

    const json* child(const char* key) {
        used_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() || it->is_null() ? nullptr : &*it;
    }

    void warn_unknown() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!used_.count(it.key())) warn("config: ignoring unknown key " + where_ + "." + it.key());
        }
    }

private:
    const json& obj_;
    std::string where_;
    std::set<std::string> used_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

EmbedderSpec parse_embedder(const json& j, const std::string& name) {
    ConfigReader r(j, "embedders." + name);
    EmbedderSpec spec;
    spec.type = r.get<std::string>("type", "hashed");
    spec.dim = r.get<std::size_t>("dim", spec.type == "hashed" ? 512 : 0);
    spec.max_tokens = r.get<std::size_t>("max_tokens", 512);
    spec.model = r.get<std::string>("model", spec.type == "http" ? name : "");
    r.warn_unknown();
    if (spec.type != "hashed" && spec.type != "http") {
        throw usage_error("embedders." + name + ".type must be hashed or http");
    }
    if (spec.type == "hashed" && spec.dim < 8) throw usage_error("embedders." + name + ".dim must be at least 8");
    if (spec.max_tokens < 1) throw usage_error("embedders." + name + ".max_tokens must be positive");
    return spec;
}

std::map<std::string, std::string> read_table_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open translation table '" + path.string() + "'");
    try {
        return json::parse(in).get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw usage_error("translation table '" + path.string() + "' must be a JSON object of strings: " + e.what());
    }
}

TranslatorSpec parse_translator(const json& j, const fs::path& base) {
    ConfigReader r(j, "translator");
    TranslatorSpec spec;
    spec.type = r.get<std::string>("type", "stub");
    spec.table = r.get<std::map<std::string, std::string>>("table", {});
    auto file = r.get<std::string>("table_file", "");
    if (!file.empty()) {
        for (auto& [k, v] : read_table_file(resolve(base, file))) spec.table.emplace(k, v);
    }
    auto pairs = r.get<std::vector<std::string>>("pairs", {});
    if (!pairs.empty()) {
        spec.pairs.clear();
        for (const auto& tag : pairs) {
            LangPair lp = LangPair::parse(tag);
            spec.pairs.insert({lp.tweet, lp.article});
        }
    }
    r.warn_unknown();
    if (spec.type != "none" && spec.type != "stub" && spec.type != "http") {
        throw usage_error("translator.type must be none, stub or http");
    }
    return spec;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(std::string_view text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw usage_error(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        ConfigReader r(doc, "config");
        auto corpus = r.get<std::string>("corpus", "");
        if (corpus.empty()) throw usage_error("config.corpus is required");
        cfg.corpus = resolve(base_dir, corpus);
        cfg.partitions = r.get<std::vector<std::string>>("partitions", {});
        for (const auto& p : cfg.partitions) LangPair::parse(p);
        cfg.retrieval = r.get<bool>("retrieval", true);
        cfg.seed = r.get<std::uint64_t>("seed", cfg.seed);
        cfg.output_dir = resolve(base_dir, r.get<std::string>("output_dir", "out"));
        cfg.ks = r.get<std::vector<std::size_t>>("ks", cfg.ks);
        cfg.depth = r.get<std::size_t>("depth", cfg.depth);

        if (const json* e = r.child("embedders")) {
            if (!e->is_object()) throw usage_error("config.embedders must be an object");
            for (auto it = e->begin(); it != e->end(); ++it) cfg.embedders[it.key()] = parse_embedder(*it, it.key());
        } else {
            cfg.embedders = default_embedders();
        }

        if (const json* s = r.child("systems")) {
            if (!s->is_array()) throw usage_error("config.systems must be an array");
            for (const auto& item : *s) {
                ConfigReader sr(item, "systems[]");
                SystemSpec spec;
                spec.kind = parse_system_kind(sr.get<std::string>("kind", ""));
                spec.name = sr.get<std::string>("name", std::string(to_string(spec.kind)));
                spec.embedder = sr.get<std::string>("embedder", "");
                spec.pooling = parse_pooling(sr.get<std::string>("pooling", "max"));
                sr.warn_unknown();
                cfg.systems.push_back(std::move(spec));
            }
        } else {
            cfg.systems = default_systems();
        }

        if (const json* t = r.child("translator")) cfg.translator = parse_translator(*t, base_dir);
        if (const json* b = r.child("bm25")) {
            ConfigReader br(*b, "bm25");
            cfg.bm25.k1 = br.get<double>("k1", cfg.bm25.k1);
            cfg.bm25.b = br.get<double>("b", cfg.bm25.b);
            br.warn_unknown();
        }
        if (const json* c = r.child("chunk")) {
            ConfigReader cr(*c, "chunk");
            cfg.chunk.token_limit = cr.get<std::size_t>("token_limit", cfg.chunk.token_limit);
            cfg.chunk.include_title = cr.get<bool>("include_title", cfg.chunk.include_title);
            cr.warn_unknown();
        }
        cfg.mining.seed = cfg.seed;
        if (const json* m = r.child("mining")) {
            ConfigReader mr(*m, "mining");
            cfg.mining.strategy = parse_strategy(mr.get<std::string>("strategy", "random"));
            cfg.mining.similarity_ceiling = mr.get<double>("ceiling", cfg.mining.similarity_ceiling);
            cfg.mining.negatives_per_positive =
                mr.get<std::size_t>("negatives_per_positive", cfg.mining.negatives_per_positive);
            cfg.mining.seed = mr.get<std::uint64_t>("seed", cfg.seed);
            cfg.mining_embedder = mr.get<std::string>("embedder", "");
            mr.warn_unknown();
        }
        cfg.mining.include_title = cfg.chunk.include_title;
        if (const json* m = r.child("matching")) {
            ConfigReader mr(*m, "matching");
            cfg.matching.enabled = mr.get<bool>("enabled", true);
            cfg.matching.embedder = mr.get<std::string>("embedder", "");
            cfg.matching.threshold = mr.get<double>("threshold", cfg.matching.threshold);
            cfg.matching.calibrate = mr.get<bool>("calibrate", cfg.matching.calibrate);
            cfg.matching.folds = mr.get<std::size_t>("folds", cfg.matching.folds);
            cfg.matching.split = parse_split_mode(mr.get<std::string>("split", "stratified"));
            cfg.matching.pooled = mr.get<bool>("pooled", cfg.matching.pooled);
            mr.warn_unknown();
        }
        r.warn_unknown();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::usage) throw;
        throw usage_error(std::string("config: ") + e.what());
    }

    // Cross-field checks.
    if (cfg.retrieval && cfg.systems.empty()) throw usage_error("config.systems must name at least one system");
    if (cfg.ks.empty() || !std::is_sorted(cfg.ks.begin(), cfg.ks.end()) || cfg.ks.front() < 1 ||
        std::adjacent_find(cfg.ks.begin(), cfg.ks.end()) != cfg.ks.end()) {
        throw usage_error("config.ks must be a strictly ascending list of positive integers");
    }
    if (cfg.depth < cfg.ks.back()) throw usage_error("config.depth must be at least the largest K");
    if (cfg.chunk.token_limit < 1) throw usage_error("chunk.token_limit must be at least 1");
    auto first_embedder = [&]() -> std::string { return cfg.embedders.empty() ? "" : cfg.embedders.begin()->first; };
    if (cfg.matching.embedder.empty()) cfg.matching.embedder = first_embedder();
    if (cfg.mining_embedder.empty()) cfg.mining_embedder = cfg.matching.embedder;
    auto need_embedder = [&](const std::string& name, const std::string& who) {
        if (!cfg.embedders.count(name)) throw usage_error(who + " refers to unknown embedder '" + name + "'");
    };
    for (const auto& s : cfg.systems) {
        if (s.kind == SystemKind::dense && cfg.retrieval) need_embedder(s.embedder, "system " + s.name);
    }
    if (cfg.matching.enabled) {
        need_embedder(cfg.matching.embedder, "matching");
        if (cfg.mining.strategy == MiningStrategy::hard) need_embedder(cfg.mining_embedder, "mining");
        if (!(cfg.mining.similarity_ceiling > 0.0 && cfg.mining.similarity_ceiling <= 1.0)) {
            throw usage_error("mining.ceiling must be in (0, 1]");
        }
        if (cfg.matching.folds < 2) throw usage_error("matching.folds must be at least 2");
        if (!(cfg.matching.threshold >= 0.0 && cfg.matching.threshold <= 1.0)) {
            throw usage_error("matching.threshold must be in [0, 1]");
        }
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str(), path.parent_path());
}

namespace {

std::string env_or_throw(const char* name, const char* what) {
    const char* v = std::getenv(name);
    if (!v || !*v) throw usage_error(std::string(what) + " needs the " + name + " environment variable");
    return v;
}

}  // namespace

std::unique_ptr<EmbeddingProvider> make_embedder(const EmbedderSpec& spec) {
    if (spec.type == "hashed") return std::make_unique<HashedEmbedder>(spec.dim, spec.max_tokens);
    if (spec.type == "http") {
        return std::make_unique<HttpEmbeddingProvider>(ServiceEndpoint{env_or_throw("EMBED_URL", "http embedder")},
                                                       spec.model, spec.dim, spec.max_tokens);
    }
    throw usage_error("unknown embedder type '" + spec.type + "'");
}

std::unique_ptr<TranslationProvider> make_translator(const TranslatorSpec& spec) {
    if (spec.type == "none") return nullptr;
    if (spec.type == "stub") return std::make_unique<StubTranslator>(spec.table, spec.pairs);
    if (spec.type == "http") {
        return std::make_unique<HttpTranslationProvider>(
            ServiceEndpoint{env_or_throw("TRANSLATE_URL", "http translator")}, spec.pairs);
    }
    throw usage_error("unknown translator type '" + spec.type + "'");
}

ProviderSet ProviderSet::from_config(const ExperimentConfig& cfg) {
    ProviderSet set;
    for (const auto& [name, spec] : cfg.embedders) set.add_embedder(name, make_embedder(spec));
    set.translator_ = make_translator(cfg.translator);
    return set;
}

void ProviderSet::add_embedder(std::string name, std::unique_ptr<EmbeddingProvider> provider) {
    embedders_[std::move(name)] = std::move(provider);
}

const EmbeddingProvider& ProviderSet::embedder(const std::string& name) const {
    auto it = embedders_.find(name);
    if (it == embedders_.end()) throw usage_error("no embedder named '" + name + "'");
    return *it->second;
}

std::vector<std::string> selected_partitions(const ExperimentConfig& cfg, const Corpus& corpus) {
    std::vector<std::string> out;
    if (cfg.partitions.empty()) {
        for (const auto& [tag, part] : corpus.partitions()) out.push_back(tag);
    } else {
        for (const auto& tag : cfg.partitions) {
            corpus.partition(tag);  // throws when empty
            out.push_back(tag);
        }
    }
    if (out.empty()) throw data_error("corpus has no pairs, so there is no partition to run");
    return out;
}

std::vector<const Article*> partition_articles(const Corpus& corpus, std::string_view partition) {
    std::vector<const Article*> out;
    for (std::size_t i : corpus.partition(partition).articles) out.push_back(&corpus.articles()[i]);
    return out;
}

std::vector<const Tweet*> partition_tweets(const Corpus& corpus, std::string_view partition) {
    std::vector<const Tweet*> out;
    for (std::size_t i : corpus.partition(partition).tweets) out.push_back(&corpus.tweets()[i]);
    return out;
}

std::vector<QueryLogEntry> prepare_queries(const Corpus& corpus, std::string_view partition, SystemKind kind,
                                           const TranslationProvider* translator) {
    const Partition& part = corpus.partition(partition);
    std::vector<QueryLogEntry> queries;
    std::vector<std::string> texts;
    for (const Tweet* t : partition_tweets(corpus, partition)) {
        queries.push_back({t->id, query_text(*t)});
        texts.push_back(queries.back().text);
    }
    const bool lexical = kind != SystemKind::dense;
    if (lexical && part.langs.tweet != part.langs.article && !texts.empty()) {
        if (!translator) {
            throw usage_error("partition " + std::string(partition) +
                              " is cross-lingual; BM25 systems need a translation provider");
        }
        auto translated = translate_batch(*translator, texts, part.langs.tweet, part.langs.article);
        for (std::size_t i = 0; i < queries.size(); ++i) queries[i].text = std::move(translated[i]);
    }
    return queries;
}

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw data_error("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
    ensure_dir(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot write '" + path.string() + "'");
    return out;
}

std::string single_line(std::string s) {
    for (char& c : s) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

// Lazily built per-partition retrieval structures.
class PartitionIndexes {
public:
    PartitionIndexes(const ExperimentConfig& cfg, const Corpus& corpus, std::string partition)
        : cfg_(cfg), articles_(partition_articles(corpus, partition)) {}

    const Bm25Index& bm25(Granularity g) {
        auto& slot = g == Granularity::full_article ? full_ : para_;
        if (!slot) {
            auto units = make_units(articles_, g, cfg_.chunk);
            slot = std::make_unique<Bm25Index>(Bm25Index::build(units, cfg_.bm25, g));
        }
        return *slot;
    }

    const VectorStore& store(const std::string& embedder_name, const EmbeddingProvider& provider) {
        auto& slot = stores_[embedder_name];
        if (!slot) {
            if (chunks_.empty()) {
                for (const Article* a : articles_) {
                    auto c = chunk_article(*a, cfg_.chunk);
                    std::move(c.begin(), c.end(), std::back_inserter(chunks_));
                }
            }
            slot = std::make_unique<VectorStore>(VectorStore::build(provider, chunks_));
        }
        return *slot;
    }

private:
    const ExperimentConfig& cfg_;
    std::vector<const Article*> articles_;
    std::vector<ParagraphChunk> chunks_;
    std::unique_ptr<Bm25Index> full_;
    std::unique_ptr<Bm25Index> para_;
    std::map<std::string, std::unique_ptr<VectorStore>> stores_;
};

}  // namespace

RetrievalOutput run_retrieval_experiment(const ExperimentConfig& cfg, const Corpus& corpus,
                                         const ProviderSet& providers) {
    if (cfg.systems.empty()) throw usage_error("no retrieval systems configured");
    RetrievalOutput out;
    out.report.ks = cfg.ks;
    const fs::path& dir = cfg.output_dir;

    for (const std::string& tag : selected_partitions(cfg, corpus)) {
        PartitionIndexes indexes(cfg, corpus, tag);
        Qrels qrels = qrels_from_corpus(corpus, tag);
        {
            fs::path path = dir / "qrels" / (tag + ".qrels");
            auto f = open_out(path);
            write_qrels(f, qrels);
            out.files.push_back(path);
        }
        for (const SystemSpec& sys : cfg.systems) {
            auto queries = prepare_queries(corpus, tag, sys.kind, providers.translator());
            std::vector<RankedList> rankings;
            rankings.reserve(queries.size());
            if (sys.kind == SystemKind::dense) {
                const EmbeddingProvider& provider = providers.embedder(sys.embedder);
                const VectorStore& store = indexes.store(sys.embedder, provider);
                std::vector<std::string> texts;
                for (const auto& q : queries) texts.push_back(q.text);
                constexpr std::size_t kBatch = 64;
                for (std::size_t begin = 0; begin < texts.size(); begin += kBatch) {
                    std::span<const std::string> batch(texts.data() + begin, std::min(kBatch, texts.size() - begin));
                    auto vectors = embed_batch(provider, batch);
                    for (std::size_t i = 0; i < vectors.size(); ++i) {
                        rankings.push_back(
                            store.search_vector(vectors[i], cfg.depth, queries[begin + i].query_id, sys.pooling));
                    }
                }
            } else {
                const Granularity g =
                    sys.kind == SystemKind::bm25_full ? Granularity::full_article : Granularity::paragraph;
                const Bm25Index& index = indexes.bm25(g);
                for (const auto& q : queries) rankings.push_back(index.search(q.text, cfg.depth, q.query_id));
            }

            const std::string stem = tag + "." + sys.name;
            fs::path run_path = dir / "runs" / (stem + ".run");
            {
                auto f = open_out(run_path);
                write_run(f, rankings, sys.name);
            }
            fs::path log_path = dir / "queries" / (stem + ".tsv");
            {
                auto f = open_out(log_path);
                for (const auto& q : queries) f << q.query_id << '\t' << single_line(q.text) << '\n';
            }
            out.files.push_back(run_path);
            out.files.push_back(log_path);

            Run run;
            for (auto& r : rankings) run[r.query_id] = std::move(r);
            out.report.rows.push_back(evaluate_retrieval(run, qrels, cfg.ks, sys.name, tag));
        }
    }

    fs::path json_path = dir / "retrieval_report.json";
    fs::path text_path = dir / "retrieval_report.txt";
    open_out(json_path) << out.report.to_json();
    open_out(text_path) << out.report.to_text();
    out.files.push_back(json_path);
    out.files.push_back(text_path);
    return out;
}

MatchingOutput run_matching_experiment(const ExperimentConfig& cfg, const Corpus& corpus,
                                       const ProviderSet& providers, PairScorer& scorer) {
    MatchingOutput out;
    out.report.scorer = scorer.name();
    const EmbeddingProvider* mining_provider =
        cfg.mining.strategy == MiningStrategy::hard ? &providers.embedder(cfg.mining_embedder) : nullptr;

    LabeledDataset pooled;
    pooled.partition = "all";
    for (const std::string& tag : selected_partitions(cfg, corpus)) {
        auto negatives = mine(corpus, tag, mining_provider, cfg.mining);
        auto dataset = assemble(positive_pairs(corpus, tag), std::move(negatives), cfg.mining.seed, tag);
        {
            auto f = open_out(cfg.output_dir / "datasets" / (tag + ".jsonl"));
            write_dataset(dataset, f);
        }
        auto folds = kfold_split(dataset, cfg.matching.folds, cfg.seed, cfg.matching.split);
        out.report.rows.push_back(
            evaluate_matcher(scorer, match_examples(corpus, dataset, cfg.chunk.include_title), folds, tag));
        pooled.pairs.insert(pooled.pairs.end(), dataset.pairs.begin(), dataset.pairs.end());
        out.datasets.push_back(std::move(dataset));
    }
    if (cfg.matching.pooled && out.datasets.size() > 1) {
        auto folds = kfold_split(pooled, cfg.matching.folds, cfg.seed, cfg.matching.split);
        out.report.rows.push_back(
            evaluate_matcher(scorer, match_examples(corpus, pooled, cfg.chunk.include_title), folds, "all"));
        out.datasets.push_back(std::move(pooled));
    }
    open_out(cfg.output_dir / "match_report.json") << out.report.to_json();
    open_out(cfg.output_dir / "match_report.txt") << out.report.to_text();
    return out;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
    Corpus corpus = load_corpus(cfg.corpus.string());
    ProviderSet providers = ProviderSet::from_config(cfg);
    ExperimentSummary summary;
    if (cfg.retrieval) {
        auto r = run_retrieval_experiment(cfg, corpus, providers);
        summary.files = std::move(r.files);
        summary.retrieval_text = r.report.to_text();
    }
    if (cfg.matching.enabled) {
        CosineScorer scorer(providers.embedder(cfg.matching.embedder), cfg.matching.threshold,
                            cfg.matching.calibrate);
        auto m = run_matching_experiment(cfg, corpus, providers, scorer);
        for (const auto& ds : m.datasets) {
            if (ds.partition != "all") summary.files.push_back(cfg.output_dir / "datasets" / (ds.partition + ".jsonl"));
        }
        summary.files.push_back(cfg.output_dir / "match_report.json");
        summary.files.push_back(cfg.output_dir / "match_report.txt");
        summary.matching_text = m.report.to_text();
    }
    return summary;
}

}  // namespace claimmatch
