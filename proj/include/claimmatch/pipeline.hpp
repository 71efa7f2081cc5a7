#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "claimmatch/bm25.hpp"
#include "claimmatch/corpus.hpp"
#include "claimmatch/eval.hpp"
#include "claimmatch/mining.hpp"
#include "claimmatch/providers.hpp"
#include "claimmatch/ranking.hpp"

namespace claimmatch {

/// Embedding provider description. "hashed" is built in; "http" talks to
/// the service at $EMBED_URL.
struct EmbedderSpec {
    std::string type = "hashed";
    std::size_t dim = 512;  // hashed: bucket count; http: 0 = discover
    std::size_t max_tokens = 512;
    std::string model;  // http only
};

/// "none", "stub" (dictionary table, inline or from a JSON file) or "http"
/// (service at $TRANSLATE_URL).
struct TranslatorSpec {
    std::string type = "none";
    std::map<std::string, std::string> table;
    std::set<std::pair<Lang, Lang>> pairs = {{Lang::hi, Lang::en}};
};

enum class SystemKind { bm25_full, bm25_paragraph, dense };

SystemKind parse_system_kind(std::string_view name);  // bm25-full | bm25-para | dense
std::string_view to_string(SystemKind kind);

struct SystemSpec {
    std::string name;
    SystemKind kind = SystemKind::bm25_full;
    std::string embedder;  // dense only; key into ExperimentConfig::embedders
    Pooling pooling = Pooling::max;
};

struct MatchingSpec {
    bool enabled = false;
    std::string embedder;
    double threshold = 0.5;
    bool calibrate = true;
    std::size_t folds = 5;
    SplitMode split = SplitMode::stratified;
    bool pooled = true;  // add the "all" row over the concatenated datasets
};

struct ExperimentConfig {
    std::filesystem::path corpus;
    std::vector<std::string> partitions;  // empty = every partition in the corpus
    bool retrieval = true;
    std::vector<SystemSpec> systems;
    std::map<std::string, EmbedderSpec> embedders;
    TranslatorSpec translator;
    Bm25Params bm25;
    ChunkConfig chunk;
    MiningConfig mining;
    std::string mining_embedder;  // hard mining; defaults to the matching embedder
    MatchingSpec matching;
    std::filesystem::path output_dir = "out";
    std::vector<std::size_t> ks = kDefaultKs;
    std::size_t depth = 50;
    std::uint64_t seed = 13;

    /// Parses the JSON config document. Relative paths resolve against
    /// base_dir. Throws usage errors for invalid settings.
    static ExperimentConfig from_json(std::string_view text, const std::filesystem::path& base_dir = {});
    static ExperimentConfig load(const std::filesystem::path& path);

    /// The four systems compared in the experiments: full-article BM25,
    /// paragraph BM25 and two dense slots ("labse", "sbert").
    static std::vector<SystemSpec> default_systems();
    /// Built-in stand-ins for the two dense slots (hashed, 512 and 768 dims).
    static std::map<std::string, EmbedderSpec> default_embedders();
};

/// Provider instances created from a config. Endpoint URLs come from the
/// EMBED_URL / TRANSLATE_URL environment variables.
class ProviderSet {
public:
    static ProviderSet from_config(const ExperimentConfig& cfg);

    const EmbeddingProvider& embedder(const std::string& name) const;
    const TranslationProvider* translator() const { return translator_.get(); }

    void add_embedder(std::string name, std::unique_ptr<EmbeddingProvider> provider);
    void set_translator(std::unique_ptr<TranslationProvider> translator) { translator_ = std::move(translator); }

private:
    std::map<std::string, std::unique_ptr<EmbeddingProvider>> embedders_;
    std::unique_ptr<TranslationProvider> translator_;
};

std::unique_ptr<EmbeddingProvider> make_embedder(const EmbedderSpec& spec);
std::unique_ptr<TranslationProvider> make_translator(const TranslatorSpec& spec);

/// Partition tags to run: the configured ones (validated) or all of them.
std::vector<std::string> selected_partitions(const ExperimentConfig& cfg, const Corpus& corpus);

/// Articles of a partition in id order.
std::vector<const Article*> partition_articles(const Corpus& corpus, std::string_view partition);
std::vector<const Tweet*> partition_tweets(const Corpus& corpus, std::string_view partition);

struct QueryLogEntry {
    std::string query_id;
    std::string text;  // what was actually sent to the system
};

/// Query texts for a system: the tweet query text, translated into the
/// article language first for BM25 systems on cross-lingual partitions.
std::vector<QueryLogEntry> prepare_queries(const Corpus& corpus, std::string_view partition, SystemKind kind,
                                           const TranslationProvider* translator);

struct RetrievalOutput {
    RetrievalReport report;
    std::vector<std::filesystem::path> files;
};

/// Writes under output_dir: runs/<partition>.<system>.run (TREC),
/// queries/<partition>.<system>.tsv, qrels/<partition>.qrels and
/// retrieval_report.{json,txt}.
RetrievalOutput run_retrieval_experiment(const ExperimentConfig& cfg, const Corpus& corpus,
                                         const ProviderSet& providers);

struct MatchingOutput {
    MatchReport report;
    std::vector<LabeledDataset> datasets;
};

/// Writes datasets/<partition>.jsonl and match_report.{json,txt}.
MatchingOutput run_matching_experiment(const ExperimentConfig& cfg, const Corpus& corpus,
                                       const ProviderSet& providers, PairScorer& scorer);

struct ExperimentSummary {
    std::vector<std::filesystem::path> files;
    std::string retrieval_text;
    std::string matching_text;
};

/// Loads the corpus, creates providers and runs the enabled experiments.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

}  // namespace claimmatch
