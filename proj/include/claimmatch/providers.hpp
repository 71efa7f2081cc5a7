#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "claimmatch/corpus.hpp"

namespace claimmatch {

using Vector = std::vector<float>;

/// Maps texts to fixed-dimension vectors. Implementations must be
/// deterministic for a fixed version and tolerate concurrent calls.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    /// Inputs longer than this are truncated by embed_batch.
    virtual std::size_t max_tokens() const = 0;

    /// Raw call; use embed_batch, which enforces the contract.
    virtual std::vector<Vector> embed(std::span<const std::string> texts) const = 0;
};

/// Truncates over-long texts (with a warning), embeds, and validates that
/// exactly one finite vector of the provider's dimension came back per text.
std::vector<Vector> embed_batch(const EmbeddingProvider& provider, std::span<const std::string> texts);

Vector embed_one(const EmbeddingProvider& provider, const std::string& text);

/// Feature-hashed character n-gram embedding (n = 3, 4, 5).
///
/// The text is tokenized, the case-folded tokens are joined by single
/// spaces and padded with one space on each side. Every code point n-gram
/// is hashed with 64-bit FNV-1a over its UTF-8 bytes; the bucket is
/// hash % dim and the sign is the top bit of splitmix64(hash). The count
/// vector is L2-normalized. Text without tokens maps to the zero vector.
Vector hashed_embed(std::string_view text, std::size_t dim);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

class HashedEmbedder final : public EmbeddingProvider {
public:
    explicit HashedEmbedder(std::size_t dim = 512, std::size_t max_tokens = 512);

    std::string name() const override { return "hashed-ngram-v1"; }
    std::size_t dim() const override { return dim_; }
    std::size_t max_tokens() const override { return max_tokens_; }
    std::vector<Vector> embed(std::span<const std::string> texts) const override;

private:
    std::size_t dim_;
    std::size_t max_tokens_;
};

struct ServiceEndpoint {
    std::string base_url;  // e.g. "http://127.0.0.1:8080" (optional path prefix allowed)
    std::chrono::milliseconds timeout{30000};
};

/// Client for POST <base>/v1/embed:
///   request  {"model": str, "texts": [str]}
///   response {"dim": int, "vectors": [[float]]}
/// When no dimension is given it is discovered with a probe request.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(ServiceEndpoint endpoint, std::string model, std::size_t dim = 0,
                          std::size_t max_tokens = 512);

    std::string name() const override { return model_; }
    std::size_t dim() const override;
    std::size_t max_tokens() const override { return max_tokens_; }
    std::vector<Vector> embed(std::span<const std::string> texts) const override;

private:
    std::vector<Vector> request(std::span<const std::string> texts, std::size_t* reported_dim) const;

    ServiceEndpoint endpoint_;
    std::string model_;
    std::size_t max_tokens_;
    mutable std::mutex dim_mutex_;
    mutable std::size_t dim_;
};

class TranslationProvider {
public:
    virtual ~TranslationProvider() = default;

    virtual std::string name() const = 0;
    virtual bool supports(Lang src, Lang dst) const = 0;
    /// Raw call; use translate / translate_batch.
    virtual std::vector<std::string> translate_texts(std::span<const std::string> texts, Lang src,
                                                     Lang dst) const = 0;
};

/// Identity when src == dst; otherwise checks support and output count.
std::vector<std::string> translate_batch(const TranslationProvider& provider, std::span<const std::string> texts,
                                         Lang src, Lang dst);
std::string translate(const TranslationProvider& provider, const std::string& text, Lang src, Lang dst);

/// Word-level dictionary lookup. Each whitespace-delimited word is replaced
/// when it is in the table; otherwise each of its tokens is looked up
/// (case-folded) and replaced in place. Unknown material passes through.
class StubTranslator final : public TranslationProvider {
public:
    StubTranslator(std::map<std::string, std::string> table, std::set<std::pair<Lang, Lang>> pairs);

    std::string name() const override { return "stub-dictionary"; }
    bool supports(Lang src, Lang dst) const override;
    std::vector<std::string> translate_texts(std::span<const std::string> texts, Lang src,
                                             Lang dst) const override;

    std::string translate_text(std::string_view text) const;

private:
    std::map<std::string, std::string, std::less<>> table_;
    std::set<std::pair<Lang, Lang>> pairs_;
};

/// Client for POST <base>/v1/translate:
///   request  {"src": str, "dst": str, "texts": [str]}
///   response {"texts": [str]}
/// An empty pair set means every pair is forwarded to the service.
class HttpTranslationProvider final : public TranslationProvider {
public:
    explicit HttpTranslationProvider(ServiceEndpoint endpoint, std::set<std::pair<Lang, Lang>> pairs = {});

    std::string name() const override { return "http-translate"; }
    bool supports(Lang src, Lang dst) const override;
    std::vector<std::string> translate_texts(std::span<const std::string> texts, Lang src,
                                             Lang dst) const override;

private:
    ServiceEndpoint endpoint_;
    std::set<std::pair<Lang, Lang>> pairs_;
};

}  // namespace claimmatch
