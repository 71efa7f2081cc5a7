#include <cmath>

#include <httplib.h>
#include <json.hpp>

#include "claimmatch/error.hpp"
#include "claimmatch/providers.hpp"

namespace claimmatch {

using json = nlohmann::json;

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix without trailing slash
};

SplitUrl split_url(const std::string& base) {
    auto scheme = base.find("://");
    if (scheme == std::string::npos) throw usage_error("provider URL must start with http:// ('" + base + "')");
    auto path = base.find('/', scheme + 3);
    SplitUrl out;
    out.origin = base.substr(0, path);
    if (path != std::string::npos) out.prefix = base.substr(path);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    return out;
}

json post_json(const ServiceEndpoint& endpoint, const std::string& path, const json& body, const char* what) {
    SplitUrl url = split_url(endpoint.base_url);
    httplib::Client client(url.origin);
    auto seconds = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    auto usec = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - seconds);
    client.set_connection_timeout(seconds.count(), usec.count());
    client.set_read_timeout(seconds.count(), usec.count());
    client.set_write_timeout(seconds.count(), usec.count());

    const std::string full_path = url.prefix + path;
    auto res = client.Post(full_path, body.dump(-1, ' ', false, json::error_handler_t::replace),
                           "application/json");
    if (!res) {
        throw provider_error(std::string(what) + " service unreachable at " + endpoint.base_url + full_path + ": " +
                             httplib::to_string(res.error()));
    }
    json reply;
    try {
        reply = json::parse(res->body);
    } catch (const json::parse_error&) {
        if (res->status != 200) {
            throw provider_error(std::string(what) + " service returned HTTP " + std::to_string(res->status));
        }
        throw provider_error(std::string(what) + " service returned a non-JSON body");
    }
    if (res->status != 200) {
        std::string msg = reply.is_object() && reply.contains("error") && reply["error"].is_string()
                              ? reply["error"].get<std::string>()
                              : std::string("no error message");
        throw provider_error(std::string(what) + " service returned HTTP " + std::to_string(res->status) + ": " +
                             msg);
    }
    if (!reply.is_object()) throw provider_error(std::string(what) + " service response is not a JSON object");
    return reply;
}

}  // namespace

HttpEmbeddingProvider::HttpEmbeddingProvider(ServiceEndpoint endpoint, std::string model, std::size_t dim,
                                             std::size_t max_tokens)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), max_tokens_(max_tokens), dim_(dim) {
    split_url(endpoint_.base_url);
    if (model_.empty()) throw usage_error("embedding model name must not be empty");
}

std::size_t HttpEmbeddingProvider::dim() const {
    std::lock_guard lock(dim_mutex_);
    if (dim_ == 0) {
        const std::string probe = "probe";
        std::size_t reported = 0;
        auto vectors = request(std::span<const std::string>(&probe, 1), &reported);
        dim_ = reported;
    }
    return dim_;
}

std::vector<Vector> HttpEmbeddingProvider::request(std::span<const std::string> texts,
                                                   std::size_t* reported_dim) const {
    json body = {{"model", model_}, {"texts", json::array()}};
    for (const auto& t : texts) body["texts"].push_back(t);
    json reply = post_json(endpoint_, "/v1/embed", body, "embedding");
    try {
        *reported_dim = reply.at("dim").get<std::size_t>();
        std::vector<Vector> out;
        for (const auto& row : reply.at("vectors")) {
            Vector v;
            v.reserve(row.size());
            for (const auto& x : row) {
                if (!x.is_number()) throw provider_error("embedding service returned a non-numeric component");
                v.push_back(x.get<float>());
            }
            out.push_back(std::move(v));
        }
        if (*reported_dim == 0) throw provider_error("embedding service reported dimension 0");
        return out;
    } catch (const json::exception& e) {
        throw provider_error(std::string("embedding service response malformed: ") + e.what());
    }
}

std::vector<Vector> HttpEmbeddingProvider::embed(std::span<const std::string> texts) const {
    std::size_t reported = 0;
    auto out = request(texts, &reported);
    const std::size_t expected = dim();
    if (reported != expected) {
        throw provider_error("embedding service reported dimension " + std::to_string(reported) + ", expected " +
                             std::to_string(expected));
    }
    return out;
}

HttpTranslationProvider::HttpTranslationProvider(ServiceEndpoint endpoint, std::set<std::pair<Lang, Lang>> pairs)
    : endpoint_(std::move(endpoint)), pairs_(std::move(pairs)) {
    split_url(endpoint_.base_url);
}

bool HttpTranslationProvider::supports(Lang src, Lang dst) const {
    return src == dst || pairs_.empty() || pairs_.count({src, dst}) > 0;
}

std::vector<std::string> HttpTranslationProvider::translate_texts(std::span<const std::string> texts, Lang src,
                                                                  Lang dst) const {
    json body = {{"src", to_string(src)}, {"dst", to_string(dst)}, {"texts", json::array()}};
    for (const auto& t : texts) body["texts"].push_back(t);
    json reply = post_json(endpoint_, "/v1/translate", body, "translation");
    try {
        return reply.at("texts").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw provider_error(std::string("translation service response malformed: ") + e.what());
    }
}

}  // namespace claimmatch
