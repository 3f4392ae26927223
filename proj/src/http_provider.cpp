#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "quare/errors.hpp"
#include "quare/providers.hpp"

namespace quare::providers {

namespace {

// Splits "http://host:port/v1" into origin and path prefix.
void split_url(const std::string& url, std::string& origin, std::string& prefix) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("base_url must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        origin = url;
        prefix = "";
    } else {
        origin = url.substr(0, path_start);
        prefix = url.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }
}

} // namespace

HttpProvider::HttpProvider(HttpProviderOptions options) : options_(std::move(options)) {
    if (options_.base_url.empty()) throw std::invalid_argument("http provider requires a base_url");
    split_url(options_.base_url, origin_, path_prefix_);
}

std::string HttpProvider::post_json(const std::string& path, const Json& body) {
    httplib::Client client(origin_);
    client.set_connection_timeout(options_.timeout_s);
    client.set_read_timeout(options_.timeout_s);
    httplib::Headers headers;
    if (!options_.bearer_token.empty())
        headers.emplace("Authorization", "Bearer " + options_.bearer_token);

    auto res = client.Post(path_prefix_ + path, headers, body.dump(), "application/json");
    if (!res) {
        throw ProviderError("connection to " + origin_ + " failed: " + httplib::to_string(res.error()),
                            /*retryable=*/true);
    }
    if (res->status == 429 || res->status >= 500) {
        throw ProviderError("provider returned status " + std::to_string(res->status),
                            /*retryable=*/true);
    }
    if (res->status < 200 || res->status >= 300) {
        throw ProviderError("provider returned status " + std::to_string(res->status) + ": " +
                                res->body.substr(0, 200),
                            /*retryable=*/false);
    }
    return res->body;
}

std::string HttpProvider::chat(const ChatRequest& request) {
    request.validate();
    Json body{{"model", options_.model},
              {"messages", Json::array({Json{{"role", "system"}, {"content", request.system_prompt}},
                                        Json{{"role", "user"}, {"content", request.user_prompt}}})},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens},
              {"seed", request.seed}};
    const std::string raw = post_json("/chat/completions", body);
    try {
        Json j = Json::parse(raw);
        std::string content = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (content.empty()) throw DecodeError("provider returned empty completion");
        return content;
    } catch (const Json::exception& e) {
        throw DecodeError(std::string("malformed chat response: ") + e.what());
    }
}

std::vector<EmbeddingVector> HttpProvider::embed(const std::vector<std::string>& texts) {
    for (const auto& t : texts)
        if (t.empty()) throw std::invalid_argument("cannot embed empty text");
    Json body{{"model", options_.embed_model}, {"input", texts}};
    const std::string raw = post_json("/embeddings", body);
    try {
        Json j = Json::parse(raw);
        std::vector<EmbeddingVector> out(texts.size());
        for (const auto& item : j.at("data")) {
            const auto idx = item.at("index").get<std::size_t>();
            if (idx >= out.size()) throw DecodeError("embedding index out of range");
            out[idx].values = item.at("embedding").get<std::vector<double>>();
            out[idx].model_id = options_.embed_model;
        }
        for (const auto& v : out)
            if (v.values.empty()) throw DecodeError("embedding response incomplete");
        return out;
    } catch (const Json::exception& e) {
        throw DecodeError(std::string("malformed embeddings response: ") + e.what());
    }
}

std::shared_ptr<Provider> make_provider(const ProviderConfig& config) {
    if (config.kind == "hash-mock") return std::make_shared<HashMockProvider>();
    if (config.kind == "transcript") return TranscriptProvider::from_file(config.transcript_path);
    if (config.kind == "http") {
        HttpProviderOptions options;
        options.base_url = config.base_url;
        options.model = config.model;
        options.embed_model = config.embed_model;
        if (const char* token = std::getenv(config.token_env.c_str())) options.bearer_token = token;
        return std::make_shared<HttpProvider>(std::move(options));
    }
    throw std::invalid_argument("unknown provider kind: " + config.kind);
}

} // namespace quare::providers
