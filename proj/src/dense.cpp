#include "claimmatch/dense.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "claimmatch/error.hpp"

namespace claimmatch {

double cosine(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) {
        throw usage_error("cosine of vectors with different dimensions (" + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()) + ")");
    }
    double dot = 0.0;
    double nu = 0.0;
    double nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += static_cast<double>(u[i]) * v[i];
        nu += static_cast<double>(u[i]) * u[i];
        nv += static_cast<double>(v[i]) * v[i];
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

std::string chunk_id(const ParagraphChunk& chunk) {
    return chunk.article_id + "#" + std::to_string(chunk.chunk_index);
}

namespace {

void normalize(std::span<float> row) {
    double n = 0.0;
    for (float x : row) n += static_cast<double>(x) * x;
    if (n == 0.0) return;
    n = std::sqrt(n);
    for (float& x : row) x = static_cast<float>(x / n);
}

}  // namespace

VectorStore VectorStore::build(const EmbeddingProvider& provider, std::span<const ParagraphChunk> chunks,
                               std::size_t batch_size) {
    if (chunks.empty()) throw data_error("cannot build a vector store from zero chunks");
    if (batch_size == 0) batch_size = 1;
    VectorStore store;
    store.provider_name_ = provider.name();
    store.dim_ = provider.dim();
    store.vectors_.reserve(chunks.size() * store.dim_);

    std::vector<std::string> texts;
    for (std::size_t begin = 0, batch = 0; begin < chunks.size(); begin += batch_size, ++batch) {
        std::size_t end = std::min(chunks.size(), begin + batch_size);
        texts.clear();
        for (std::size_t i = begin; i < end; ++i) texts.push_back(chunks[i].text);
        std::vector<Vector> rows;
        try {
            rows = embed_batch(provider, texts);
        } catch (const Error& e) {
            throw Error(e.kind(), "embedding chunk batch " + std::to_string(batch) + ": " + e.what());
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != store.dim_) {
                throw provider_error("chunk batch " + std::to_string(batch) + ": vector dimension " +
                                     std::to_string(rows[i].size()) + " does not match store dimension " +
                                     std::to_string(store.dim_));
            }
            normalize(rows[i]);
            store.vectors_.insert(store.vectors_.end(), rows[i].begin(), rows[i].end());
            store.chunk_ids_.push_back(chunk_id(chunks[begin + i]));
            store.chunk_article_.push_back(chunks[begin + i].article_id);
        }
    }
    return store;
}

RankedList VectorStore::search_vector(std::span<const float> query, std::size_t k, std::string query_id,
                                      Pooling pooling) const {
    if (k < 1) throw usage_error("search depth k must be at least 1");
    if (query.size() != dim_) {
        throw usage_error("query dimension " + std::to_string(query.size()) + " does not match store dimension " +
                          std::to_string(dim_));
    }
    std::vector<UnitScore> scored;
    scored.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) scored.push_back({chunk_article_[i], cosine(query, row(i))});
    RankedList out = rank_articles(std::move(scored), k, pooling);
    out.query_id = std::move(query_id);
    return out;
}

RankedList VectorStore::search(const EmbeddingProvider& provider, const std::string& query_text, std::size_t k,
                               std::string query_id, Pooling pooling) const {
    if (provider.name() != provider_name_ || provider.dim() != dim_) {
        throw usage_error("store was built with provider '" + provider_name_ + "' (dim " + std::to_string(dim_) +
                          "), not '" + provider.name() + "' (dim " + std::to_string(provider.dim()) + ")");
    }
    return search_vector(embed_one(provider, query_text), k, std::move(query_id), pooling);
}

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'M', 'V', 'S', 'T', 'O', 'R', 'E'};

template <typename T>
void put(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    std::array<char, sizeof(T)> bytes;
    if (!in.read(bytes.data(), sizeof(T))) throw data_error("vector store file is truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    auto len = get<std::uint32_t>(in);
    if (len > (1u << 24)) throw data_error("vector store file has an implausible string length");
    std::string s(len, '\0');
    if (len && !in.read(s.data(), len)) throw data_error("vector store file is truncated");
    return s;
}

}  // namespace

void VectorStore::save(std::ostream& out) const {
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kStoreFormatVersion);
    put_string(out, provider_name_);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
    put<std::uint64_t>(out, chunk_ids_.size());
    for (float x : vectors_) put<float>(out, x);
    for (std::size_t i = 0; i < size(); ++i) {
        put_string(out, chunk_ids_[i]);
        put_string(out, chunk_article_[i]);
    }
    if (!out) throw data_error("failed writing vector store");
}

VectorStore VectorStore::load(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw data_error("not a claimmatch vector store");
    auto version = get<std::uint32_t>(in);
    if (version != kStoreFormatVersion) {
        throw data_error("unsupported vector store version " + std::to_string(version));
    }
    VectorStore store;
    store.provider_name_ = get_string(in);
    store.dim_ = get<std::uint32_t>(in);
    auto n = get<std::uint64_t>(in);
    if (store.dim_ == 0) throw data_error("vector store header has dimension 0");
    if (n == 0 || n > (1ull << 32) / store.dim_) throw data_error("vector store header has an implausible size");
    store.vectors_.resize(n * store.dim_);
    for (float& x : store.vectors_) {
        x = get<float>(in);
        if (!std::isfinite(x)) throw data_error("vector store contains a non-finite value");
    }
    for (std::uint64_t i = 0; i < n; ++i) {
        store.chunk_ids_.push_back(get_string(in));
        store.chunk_article_.push_back(get_string(in));
    }
    return store;
}

std::vector<std::vector<double>> pairwise_similarities(std::span<const Vector> a, std::span<const Vector> b) {
    std::vector<std::vector<double>> m(a.size(), std::vector<double>(b.size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) m[i][j] = cosine(a[i], b[j]);
    }
    return m;
}

std::vector<std::vector<double>> pairwise_similarities(std::span<const std::string> a,
                                                       std::span<const std::string> b,
                                                       const EmbeddingProvider& provider) {
    if (a.empty() || b.empty()) throw usage_error("pairwise similarities need two nonempty text lists");
    auto ea = embed_batch(provider, a);
    auto eb = embed_batch(provider, b);
    return pairwise_similarities(std::span<const Vector>(ea), std::span<const Vector>(eb));
}

}  // namespace claimmatch
