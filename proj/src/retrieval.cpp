#include "apiforge/retrieval.hpp"
#include "apiforge/digest.hpp"
#include "apiforge/errors.hpp"
#include "apiforge/textutil.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace apiforge::retrieval {

EmbeddingVector HashingBackend::embed_raw(const std::string& text) {
    EmbeddingVector v(dimension_, 0.0);
    for (const auto& token : tokenize_words(text))
        v[fnv1a64(token) % dimension_] += 1.0;
    return v;
}

Embedder::Embedder(std::shared_ptr<EmbeddingBackend> backend, std::string cache_dir)
    : backend_(std::move(backend)), backend_name_(backend_->name()),
      dimension_(backend_->dimension()), cache_dir_(std::move(cache_dir)) {
    if (!cache_dir_.empty()) std::filesystem::create_directories(cache_dir_);
}

std::optional<EmbeddingVector> Embedder::load_from_disk(const std::string& key) const {
    if (cache_dir_.empty()) return std::nullopt;
    std::filesystem::path path = std::filesystem::path(cache_dir_) / (key + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    try {
        auto doc = nlohmann::json::parse(read_file(path.string()));
        auto v = doc.at("components").get<EmbeddingVector>();
        if (v.size() != dimension_) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;   // stale or damaged cache entries are recomputed
    }
}

void Embedder::store_to_disk(const std::string& key, const EmbeddingVector& v) const {
    if (cache_dir_.empty()) return;
    nlohmann::json doc;
    doc["components"] = v;
    std::filesystem::path path = std::filesystem::path(cache_dir_) / (key + ".json");
    write_file(path.string(), doc.dump());
}

EmbeddingVector Embedder::embed(const std::string& text) {
    if (trim(text).empty()) throw Error("EmptyText", "cannot embed empty text");
    std::string key = backend_name_ + "_" + digest_hex(text);

    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    if (auto from_disk = load_from_disk(key)) {
        cache_.emplace(key, *from_disk);
        return *from_disk;
    }

    EmbeddingVector v = backend_->embed_raw(text);
    double norm_sq = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) throw Error("BackendUnavailable", "non-finite embedding value");
        norm_sq += x * x;
    }
    if (norm_sq == 0.0)
        throw Error("EmptyText", "text has no tokens: '" + trim(text).substr(0, 40) + "'");
    double norm = std::sqrt(norm_sq);
    for (double& x : v) x /= norm;

    store_to_disk(key, v);
    auto [it, ignored] = cache_.emplace(key, std::move(v));
    return it->second;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size())
        throw Error("DimensionMismatch", std::to_string(a.size()) + " vs " +
                                             std::to_string(b.size()));
    double dot = 0.0;
    for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    // unit inputs can drift a hair past the bounds in floating point
    return std::min(1.0, std::max(-1.0, dot));
}

std::vector<const pool::DemoEntry*> top_k_demos(const pool::PoolState& state,
                                                const std::string& query_text, size_t k,
                                                Embedder& embedder) {
    EmbeddingVector query = embedder.embed(query_text);

    struct Scored {
        double similarity;
        int step_added;
        size_t index;
    };
    std::vector<Scored> scored;
    scored.reserve(state.demos.size());
    for (size_t i = 0; i < state.demos.size(); ++i) {
        double sim = cosine(query, embedder.embed(state.demos[i].retrieval_key));
        scored.push_back({sim, state.demos[i].step_added, i});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        if (a.step_added != b.step_added) return a.step_added < b.step_added;
        return a.index < b.index;
    });

    size_t take = std::min(k, scored.size());
    std::vector<const pool::DemoEntry*> out;
    out.reserve(take);
    for (size_t i = 0; i < take; ++i) out.push_back(&state.demos[scored[i].index]);
    return out;
}

const agentlang::UseCase& top1_use_case(const pool::PoolState& state,
                                        const std::string& api_name,
                                        const std::string& query_text, Embedder& embedder) {
    auto it = state.apis.find(api_name);
    if (it == state.apis.end() || it->second.use_cases.empty())
        throw Error("NoUseCases", "API '" + api_name + "' has no stored use cases");

    EmbeddingVector query = embedder.embed(query_text);
    const auto& cases = it->second.use_cases;
    size_t best = 0;
    double best_sim = -3.0;
    for (size_t i = 0; i < cases.size(); ++i) {
        double sim;
        try {
            sim = cosine(query, embedder.embed(cases[i].leading_comment));
        } catch (const Error&) {
            sim = -2.0;   // token-less leading comment, ranked below everything
        }
        bool better = sim > best_sim ||
                      (sim == best_sim && cases[i].source_step < cases[best].source_step);
        if (better) {
            best = i;
            best_sim = sim;
        }
    }
    return cases[best];
}

} // namespace apiforge::retrieval
