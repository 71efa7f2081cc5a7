#include "claimmatch/providers.hpp"

#include <cmath>

#include "claimmatch/error.hpp"
#include "claimmatch/textproc.hpp"

namespace claimmatch {

std::vector<Vector> embed_batch(const EmbeddingProvider& provider, std::span<const std::string> texts) {
    if (texts.empty()) throw usage_error("embed_batch needs at least one text");
    const std::size_t limit = provider.max_tokens();
    std::vector<std::string> clipped;
    std::size_t n_truncated = 0;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (limit > 0 && token_count(texts[i]) > limit) {
            if (clipped.empty()) clipped.assign(texts.begin(), texts.end());
            clipped[i].resize(prefix_end_after_tokens(texts[i], limit));
            ++n_truncated;
        }
    }
    if (n_truncated > 0) {
        warn("truncated " + std::to_string(n_truncated) + " text(s) to " + std::to_string(limit) +
             " tokens for embedding provider '" + provider.name() + "'");
    }
    auto vectors = provider.embed(clipped.empty() ? texts : std::span<const std::string>(clipped));

    if (vectors.size() != texts.size()) {
        throw provider_error("embedding provider '" + provider.name() + "' protocol error: expected " +
                             std::to_string(texts.size()) + " vectors, got " + std::to_string(vectors.size()));
    }
    const std::size_t dim = provider.dim();
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != dim) {
            throw provider_error("embedding provider '" + provider.name() + "' protocol error: vector " +
                                 std::to_string(i) + " has dimension " + std::to_string(vectors[i].size()) +
                                 ", expected " + std::to_string(dim));
        }
        for (float x : vectors[i]) {
            if (!std::isfinite(x)) {
                throw provider_error("embedding provider '" + provider.name() +
                                     "' returned a non-finite component in vector " + std::to_string(i));
            }
        }
    }
    return vectors;
}

Vector embed_one(const EmbeddingProvider& provider, const std::string& text) {
    return std::move(embed_batch(provider, std::span<const std::string>(&text, 1)).front());
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Vector hashed_embed(std::string_view text, std::size_t dim) {
    if (dim < 8) throw usage_error("hashed embedding dimension must be at least 8");
    std::string normalized = " ";
    for (const std::string& t : tokenize_terms(text)) {
        normalized += t;
        normalized += ' ';
    }
    Vector out(dim, 0.0f);
    if (normalized.size() == 1) return out;

    // Byte offsets of every code point boundary.
    std::vector<std::size_t> bounds;
    for (std::size_t pos = 0; pos < normalized.size();) {
        bounds.push_back(pos);
        next_code_point(normalized, pos);
    }
    bounds.push_back(normalized.size());
    const std::size_t n_cp = bounds.size() - 1;

    std::vector<double> acc(dim, 0.0);
    for (std::size_t n = 3; n <= 5; ++n) {
        for (std::size_t i = 0; i + n <= n_cp; ++i) {
            std::string_view gram(normalized.data() + bounds[i], bounds[i + n] - bounds[i]);
            std::uint64_t h = fnv1a64(gram);
            double sign = (splitmix64(h) >> 63) ? -1.0 : 1.0;
            acc[h % dim] += sign;
        }
    }
    double norm = 0.0;
    for (double x : acc) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return out;
    for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / norm);
    return out;
}

HashedEmbedder::HashedEmbedder(std::size_t dim, std::size_t max_tokens) : dim_(dim), max_tokens_(max_tokens) {
    if (dim < 8) throw usage_error("hashed embedding dimension must be at least 8");
    if (max_tokens < 1) throw usage_error("max_tokens must be positive");
}

std::vector<Vector> HashedEmbedder::embed(std::span<const std::string> texts) const {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(hashed_embed(t, dim_));
    return out;
}

std::vector<std::string> translate_batch(const TranslationProvider& provider, std::span<const std::string> texts,
                                         Lang src, Lang dst) {
    if (src == dst) return {texts.begin(), texts.end()};
    if (!provider.supports(src, dst)) {
        throw provider_error("translation provider '" + provider.name() + "' does not support " +
                             std::string(to_string(src)) + "->" + std::string(to_string(dst)));
    }
    if (texts.empty()) return {};
    auto out = provider.translate_texts(texts, src, dst);
    if (out.size() != texts.size()) {
        throw provider_error("translation provider '" + provider.name() + "' protocol error: expected " +
                             std::to_string(texts.size()) + " texts, got " + std::to_string(out.size()));
    }
    return out;
}

std::string translate(const TranslationProvider& provider, const std::string& text, Lang src, Lang dst) {
    return std::move(translate_batch(provider, std::span<const std::string>(&text, 1), src, dst).front());
}

StubTranslator::StubTranslator(std::map<std::string, std::string> table, std::set<std::pair<Lang, Lang>> pairs)
    : pairs_(std::move(pairs)) {
    for (auto& [src, dst] : table) {
        table_.emplace(src, dst);
        table_.emplace(lowercase(src), dst);
    }
}

bool StubTranslator::supports(Lang src, Lang dst) const { return src == dst || pairs_.count({src, dst}) > 0; }

std::string StubTranslator::translate_text(std::string_view text) const {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t start = text.find_first_not_of(" \t\r\n\f\v", pos);
        if (start == std::string_view::npos) break;
        std::size_t end = text.find_first_of(" \t\r\n\f\v", start);
        if (end == std::string_view::npos) end = text.size();
        pos = end;
        std::string_view word = text.substr(start, end - start);
        if (!out.empty()) out += ' ';

        if (auto hit = table_.find(word); hit != table_.end()) {
            out += hit->second;
            continue;
        }
        std::size_t copied = 0;
        for (const Token& tok : tokenize(word)) {
            auto hit = table_.find(tok.surface);
            if (hit == table_.end()) continue;
            out.append(word.substr(copied, tok.span.begin - copied));
            out += hit->second;
            copied = tok.span.end;
        }
        out.append(word.substr(copied));
    }
    return out;
}

std::vector<std::string> StubTranslator::translate_texts(std::span<const std::string> texts, Lang, Lang) const {
    std::vector<std::string> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(translate_text(t));
    return out;
}

}  // namespace claimmatch
