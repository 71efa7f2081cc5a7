#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claimmatch/corpus.hpp"
#include "claimmatch/providers.hpp"
#include "claimmatch/ranking.hpp"

namespace claimmatch {

/// dot(u, v) / (|u| |v|), or 0 when either norm is 0. Throws a usage error
/// on dimension mismatch.
double cosine(std::span<const float> u, std::span<const float> v);

/// Row-major matrix of L2-normalized chunk embeddings (zero rows allowed)
/// plus the chunk -> article mapping. Immutable once built.
class VectorStore {
public:
    static VectorStore build(const EmbeddingProvider& provider, std::span<const ParagraphChunk> chunks,
                             std::size_t batch_size = 64);

    /// Scores every chunk by cosine to the query embedding, pools chunk
    /// scores per article and returns the top k.
    RankedList search(const EmbeddingProvider& provider, const std::string& query_text, std::size_t k,
                      std::string query_id = {}, Pooling pooling = Pooling::max) const;

    /// Same ranking for an already computed query vector.
    RankedList search_vector(std::span<const float> query, std::size_t k, std::string query_id = {},
                             Pooling pooling = Pooling::max) const;

    const std::string& provider_name() const { return provider_name_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return chunk_ids_.size(); }
    const std::vector<std::string>& chunk_ids() const { return chunk_ids_; }
    const std::vector<std::string>& chunk_articles() const { return chunk_article_; }
    std::span<const float> row(std::size_t i) const { return {vectors_.data() + i * dim_, dim_}; }

    /// Binary layout, little-endian:
    ///   magic "CMVSTORE", u32 version, u32 name length, name bytes,
    ///   u32 dim, u64 n_chunks, n_chunks * dim f32 rows,
    ///   then per chunk: u32 len + chunk id, u32 len + article id.
    void save(std::ostream& out) const;
    static VectorStore load(std::istream& in);

private:
    std::string provider_name_;
    std::size_t dim_ = 0;
    std::vector<std::string> chunk_ids_;
    std::vector<std::string> chunk_article_;
    std::vector<float> vectors_;
};

inline constexpr std::uint32_t kStoreFormatVersion = 1;

std::string chunk_id(const ParagraphChunk& chunk);

/// M[i][j] = cosine(embed(a_i), embed(b_j)).
std::vector<std::vector<double>> pairwise_similarities(std::span<const std::string> a,
                                                       std::span<const std::string> b,
                                                       const EmbeddingProvider& provider);

/// Same, from precomputed embeddings.
std::vector<std::vector<double>> pairwise_similarities(std::span<const Vector> a, std::span<const Vector> b);

}  // namespace claimmatch
