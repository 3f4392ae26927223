#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "quare/model.hpp"

namespace quare::providers {

// ---------------------------------------------------------------------------
// Requests and records
// ---------------------------------------------------------------------------

struct ChatRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.7;
    int max_tokens = 4000;
    int seed = 0;

    void validate() const; // temperature >= 0, max_tokens >= 1
};

struct EmbeddingVector {
    std::vector<double> values;
    std::string model_id;

    double norm() const;
};

// Cosine similarity clamped to [-1, 1]; 0 when either norm vanishes.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct ClauseRecord {
    std::string clause_id;
    std::string text;
    std::vector<std::string> domain_tags;
    std::string context;

    bool operator==(const ClauseRecord&) const = default;
};

// One JSON record per line; clause_id must be unique in the corpus.
std::vector<ClauseRecord> load_clause_corpus(const std::string& path);
void save_clause_corpus(const std::string& path, const std::vector<ClauseRecord>& corpus);

// ---------------------------------------------------------------------------
// Provider interface
// ---------------------------------------------------------------------------

class Provider {
public:
    virtual ~Provider() = default;

    // Returns non-empty completion text. Throws ProviderError on transport
    // failure (retryable flag set for transient faults), DecodeError on
    // malformed payloads.
    virtual std::string chat(const ChatRequest& request) = 0;

    // One vector per input, order preserving. Empty input string is an
    // invalid argument.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;

    // Mock providers trigger deterministic fallbacks in place of free-form
    // reasoning (e.g. parent stitching).
    virtual bool is_mock() const = 0;
};

// Retries retryable ProviderErrors up to `retries` extra attempts with
// exponential backoff starting at backoff_ms.
std::string chat_with_retry(Provider& provider, const ChatRequest& request,
                            int retries = 3, int backoff_ms = 250);

// ---------------------------------------------------------------------------
// Hash mock: pure function of (system hash, user hash, seed)
// ---------------------------------------------------------------------------

// Byte-deterministic offline provider. Responses are synthesized from prompt
// hashes: the task marker line ("Task: ...") selects the response shape, and
// stable content keys embedded in the prompts ("pair_key:", "conflict_key:",
// ...) drive decision fields so that outcomes depend on requirement content
// rather than on call order.
class HashMockProvider : public Provider {
public:
    static constexpr int kEmbeddingDim = 256;

    std::string chat(const ChatRequest& request) override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    bool is_mock() const override { return true; }

    static EmbeddingVector embed_one(const std::string& text);
};

// ---------------------------------------------------------------------------
// Transcript mock: scripted turns for protocol replays
// ---------------------------------------------------------------------------

struct TranscriptTurn {
    std::string match_hint; // substring of system+user; empty matches all
    std::string response;
    bool sticky = false; // reusable, never consumed
};

class TranscriptProvider : public Provider {
public:
    explicit TranscriptProvider(std::vector<TranscriptTurn> turns, bool fallback_to_hash = false);

    static std::shared_ptr<TranscriptProvider> from_file(const std::string& path);

    std::string chat(const ChatRequest& request) override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    bool is_mock() const override { return true; }

private:
    std::vector<TranscriptTurn> turns_;
    std::vector<bool> consumed_;
    bool fallback_to_hash_;
    HashMockProvider hash_;
    std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// HTTP provider: chat-completion shaped JSON endpoint
// ---------------------------------------------------------------------------

struct HttpProviderOptions {
    std::string base_url; // e.g. http://host:port/v1
    std::string model = "gpt-4o-mini-2024-07-18";
    std::string embed_model = "bert-base-uncased";
    std::string bearer_token; // resolved from env by the caller
    int retries = 3;
    int backoff_ms = 250;
    int timeout_s = 120;
};

class HttpProvider : public Provider {
public:
    explicit HttpProvider(HttpProviderOptions options);

    std::string chat(const ChatRequest& request) override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    bool is_mock() const override { return false; }

private:
    std::string post_json(const std::string& path, const Json& body);

    HttpProviderOptions options_;
    std::string origin_;
    std::string path_prefix_;
};

// Builds a provider from run configuration. For kind "http" the bearer token
// is read from the environment variable named in the config.
std::shared_ptr<Provider> make_provider(const ProviderConfig& config);

// ---------------------------------------------------------------------------
// Similarity and retrieval
// ---------------------------------------------------------------------------

// Lowercased alphanumeric runs.
std::vector<std::string> tokenize(const std::string& text);

// Token-level greedy-matching F1 over embedding vectors (BERTScore shape).
// Symmetric, clamped to [0,1]; identical strings score exactly 1.0.
double similarity_f1(Provider& provider, const std::string& a, const std::string& b);

struct IndexedItem {
    std::string id;
    std::string text;
    EmbeddingVector embedding;
};

struct IndexedCorpus {
    std::vector<IndexedItem> items;

    static IndexedCorpus build(Provider& provider,
                               const std::vector<std::pair<std::string, std::string>>& id_texts);
};

struct RetrievedItem {
    std::string id;
    double score = 0.0;
};

// Exact linear scan: descending cosine, ties broken by ascending id. Returns
// at most k items; the empty corpus yields an empty result.
std::vector<RetrievedItem> retrieve_top_k(Provider& provider, const std::string& query,
                                          const IndexedCorpus& corpus, int k);

} // namespace quare::providers
