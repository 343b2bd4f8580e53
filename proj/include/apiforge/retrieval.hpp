#pragma once
#include "apiforge/pool.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace apiforge::retrieval {

// Unit-norm embedding vector.
using EmbeddingVector = std::vector<double>;

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::string name() const = 0;
    virtual size_t dimension() const = 0;
    // Raw (not yet normalized) embedding; deterministic per (backend, text).
    virtual EmbeddingVector embed_raw(const std::string& text) = 0;
};

// Fully offline backend: lowercase word tokens hashed into D buckets, raw
// counts. Reproducible across processes and platforms.
class HashingBackend : public EmbeddingBackend {
public:
    explicit HashingBackend(size_t dimension = 256) : dimension_(dimension) {}
    std::string name() const override { return "local"; }
    size_t dimension() const override { return dimension_; }
    EmbeddingVector embed_raw(const std::string& text) override;

private:
    size_t dimension_;
};

struct ExternalBackendConfig {
    std::string host;                // e.g. "api.openai.com" or "http://host:port"
    std::string path = "/v1/embeddings";
    std::string model;
    std::string api_key_env = "APIFORGE_EMBEDDING_API_KEY";
    size_t dimension = 1536;
    int timeout_seconds = 30;
    int max_retries = 2;
};

// HTTP embedding service client. Throws Error("BackendUnavailable") after
// bounded retries.
std::unique_ptr<EmbeddingBackend> make_external_backend(const ExternalBackendConfig& config);

// Memoizing front end over a backend: content-digest keyed, in-memory, with
// an optional on-disk directory so repeated runs hit no external service.
class Embedder {
public:
    explicit Embedder(std::shared_ptr<EmbeddingBackend> backend, std::string cache_dir = "");

    // Unit-norm vector of the backend's dimension. Throws Error("EmptyText")
    // when the text has no tokens.
    EmbeddingVector embed(const std::string& text);

    const std::string& backend_name() const { return backend_name_; }
    size_t dimension() const { return dimension_; }

private:
    std::optional<EmbeddingVector> load_from_disk(const std::string& key) const;
    void store_to_disk(const std::string& key, const EmbeddingVector& v) const;

    std::shared_ptr<EmbeddingBackend> backend_;
    std::string backend_name_;
    size_t dimension_;
    std::string cache_dir_;
    std::map<std::string, EmbeddingVector> cache_;
    std::mutex mutex_;
};

// Dot product of unit vectors. Throws Error("DimensionMismatch").
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// The min(k, |demos|) demos most similar to the query, descending similarity,
// ties broken by earlier step_added then pool order. Exact scan, no index.
std::vector<const pool::DemoEntry*> top_k_demos(const pool::PoolState& state,
                                                const std::string& query_text, size_t k,
                                                Embedder& embedder);

// The use case of `api_name` whose leading comment is most similar to the
// query; ties broken by earliest source step then insertion order. Throws
// Error("NoUseCases") when the API has none.
const agentlang::UseCase& top1_use_case(const pool::PoolState& state,
                                        const std::string& api_name,
                                        const std::string& query_text, Embedder& embedder);

} // namespace apiforge::retrieval
