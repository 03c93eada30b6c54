#include "mgtaudit/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <openssl/sha.h>

#include "mgtaudit/errors.hpp"

namespace mgtaudit {

using nlohmann::json;

std::string_view to_string(EmbeddingMode mode) {
    return mode == EmbeddingMode::Tokens ? "tokens" : "pooled";
}

std::optional<EmbeddingMode> parse_embedding_mode(std::string_view s) {
    if (s == "tokens") return EmbeddingMode::Tokens;
    if (s == "pooled") return EmbeddingMode::Pooled;
    return std::nullopt;
}

// ---------------------------------------------------------------- matrix

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> data, std::string model_id,
                                 bool truncated)
    : rows_(rows), dim_(dim), data_(std::move(data)), model_id_(std::move(model_id)), truncated_(truncated) {
    if (rows_ == 0 || dim_ == 0) throw PreconditionError("embedding matrix needs at least one row and dim > 0");
    if (data_.size() != rows_ * dim_) throw PreconditionError("embedding matrix data size does not match shape");
    for (double v : data_)
        if (!std::isfinite(v)) throw PreconditionError("embedding matrix has non-finite coordinates");
}

EmbeddingMatrix EmbeddingMatrix::from_rows(const std::vector<std::vector<double>>& rows, std::string model_id,
                                           bool truncated) {
    if (rows.empty()) throw PreconditionError("embedding matrix needs at least one row");
    const std::size_t dim = rows.front().size();
    std::vector<double> data;
    data.reserve(rows.size() * dim);
    for (const auto& r : rows) {
        if (r.size() != dim) throw PreconditionError("ragged embedding rows");
        data.insert(data.end(), r.begin(), r.end());
    }
    return EmbeddingMatrix(rows.size(), dim, std::move(data), std::move(model_id), truncated);
}

EmbeddingMatrix EmbeddingMatrix::slice(std::size_t begin, std::size_t end) const {
    if (begin >= end || end > rows_) throw PreconditionError("invalid embedding row slice");
    std::vector<double> data(data_.begin() + static_cast<std::ptrdiff_t>(begin * dim_),
                             data_.begin() + static_cast<std::ptrdiff_t>(end * dim_));
    return EmbeddingMatrix(end - begin, dim_, std::move(data), model_id_, truncated_);
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw PreconditionError("cosine_distance: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) throw PreconditionError("cosine_distance: zero-norm vector");
    const double d = 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(d, 0.0, 2.0);
}

// ---------------------------------------------------------------- precomputed file

namespace {

RawEmbedding parse_vectors(const json& vectors, EmbeddingMode mode, const std::string& where) {
    if (!vectors.is_array() || vectors.empty()) throw BackendError(where + ": 'vectors' must be a non-empty array");
    RawEmbedding raw;
    for (const auto& row : vectors) {
        if (!row.is_array() || row.empty()) throw BackendError(where + ": each vector must be a non-empty array");
        std::vector<double> v;
        v.reserve(row.size());
        for (const auto& x : row) {
            if (!x.is_number()) throw BackendError(where + ": non-numeric vector entry");
            v.push_back(x.get<double>());
        }
        if (!raw.vectors.empty() && v.size() != raw.vectors.front().size())
            throw BackendError(where + ": vectors of unequal dimension");
        raw.vectors.push_back(std::move(v));
    }
    if (mode == EmbeddingMode::Pooled && raw.vectors.size() != 1)
        throw BackendError(where + ": pooled entries carry exactly one vector");
    return raw;
}

}  // namespace

PrecomputedBackend::PrecomputedBackend(std::filesystem::path path) : path_(std::move(path)) {}

json PrecomputedBackend::read_record(std::istream& in, std::size_t line_no, std::string& line) const {
    const std::string where = path_.string() + ":" + std::to_string(line_no);
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw BackendError(where + ": malformed JSON (" + e.what() + ")");
    }
    (void)in;
    if (!j.contains("id") || !j["id"].is_string() || !j.contains("model") || !j["model"].is_string() ||
        !j.contains("mode") || !j["mode"].is_string())
        throw BackendError(where + ": expected string fields id, model, mode");
    if (!parse_embedding_mode(j["mode"].get<std::string>()))
        throw BackendError(where + ": unknown mode '" + j["mode"].get<std::string>() + "'");
    return j;
}

void PrecomputedBackend::ensure_loaded() {
    std::call_once(loaded_, [this] {
        std::ifstream in(path_, std::ios::binary);
        if (!in) throw BackendError("cannot open precomputed embedding file " + path_.string());
        std::string line;
        std::size_t line_no = 0;
        std::streamoff offset = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::streamoff this_offset = offset;
            offset = in.tellg();
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            json j = read_record(in, line_no, line);
            const auto mode = *parse_embedding_mode(j["mode"].get<std::string>());
            parse_vectors(j["vectors"], mode, path_.string() + ":" + std::to_string(line_no));
            index_[{j["model"].get<std::string>(), mode, j["id"].get<std::string>()}] = {this_offset, line_no};
        }
    });
}

std::vector<RawEmbedding> PrecomputedBackend::embed(EmbeddingMode mode, const std::string& model_id,
                                                    std::span<const EmbeddingQuery> queries) {
    ensure_loaded();
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw BackendError("cannot open precomputed embedding file " + path_.string());
    std::vector<RawEmbedding> out;
    out.reserve(queries.size());
    std::string line;
    for (const auto& q : queries) {
        auto it = index_.find({model_id, mode, q.key});
        if (it == index_.end())
            throw MissingEmbeddingError("no precomputed " + std::string(to_string(mode)) + " embedding for id '" +
                                        q.key + "' (model " + model_id + ") in " + path_.string());
        const auto [offset, line_no] = it->second;
        in.clear();
        in.seekg(offset);
        if (!std::getline(in, line)) throw BackendError("precomputed embedding file changed while reading");
        json j = read_record(in, line_no, line);
        RawEmbedding raw = parse_vectors(j["vectors"], mode, path_.string() + ":" + std::to_string(line_no));
        if (auto t = j.find("truncated"); t != j.end() && t->is_boolean()) raw.truncated = t->get<bool>();
        out.push_back(std::move(raw));
    }
    return out;
}

// ---------------------------------------------------------------- http sidecar

HttpBackend::HttpBackend(std::string endpoint, std::size_t batch_size, std::size_t max_parallel_requests)
    : endpoint_(std::move(endpoint)),
      batch_size_(std::max<std::size_t>(1, batch_size)),
      max_parallel_(std::max<std::size_t>(1, max_parallel_requests)) {
    while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
}

std::vector<RawEmbedding> HttpBackend::post_batch(EmbeddingMode mode, const std::string& model_id,
                                                  std::span<const EmbeddingQuery> batch) const {
    json body;
    body["model"] = model_id;
    body["mode"] = std::string(to_string(mode));
    body["texts"] = json::array();
    for (const auto& q : batch) body["texts"].push_back(q.text);

    httplib::Client client(endpoint_);
    client.set_connection_timeout(10);
    client.set_read_timeout(600);
    auto res = client.Post("/embed", body.dump(), "application/json");
    if (!res) throw BackendError("embedding backend unreachable at " + endpoint_ + " (" + httplib::to_string(res.error()) + ")");
    if (res->status != 200) {
        std::string message = res->body;
        try {
            auto err = json::parse(res->body);
            if (err.contains("error") && err["error"].is_string()) message = err["error"].get<std::string>();
        } catch (const json::exception&) {
        }
        throw BackendError("embedding backend returned HTTP " + std::to_string(res->status) + ": " + message);
    }

    json reply;
    try {
        reply = json::parse(res->body);
    } catch (const json::parse_error& e) {
        throw BackendError(std::string("malformed /embed response: ") + e.what());
    }
    const auto& embeddings = reply.at("embeddings");
    if (!embeddings.is_array() || embeddings.size() != batch.size())
        throw BackendError("/embed response has " + std::to_string(embeddings.size()) + " embeddings for " +
                           std::to_string(batch.size()) + " texts");
    const std::size_t dim = reply.value("dim", std::size_t{0});
    json truncated = reply.value("truncated", json::array());

    std::vector<RawEmbedding> out;
    out.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const std::string where = "/embed response item " + std::to_string(i);
        RawEmbedding raw = mode == EmbeddingMode::Pooled
                               ? parse_vectors(json::array({embeddings[i]}), mode, where)
                               : parse_vectors(embeddings[i], mode, where);
        if (dim != 0 && raw.vectors.front().size() != dim)
            throw BackendError(where + ": vector dimension disagrees with 'dim'");
        raw.truncated = i < truncated.size() && truncated[i].is_boolean() && truncated[i].get<bool>();
        out.push_back(std::move(raw));
    }
    return out;
}

std::vector<RawEmbedding> HttpBackend::embed(EmbeddingMode mode, const std::string& model_id,
                                             std::span<const EmbeddingQuery> queries) {
    std::vector<std::span<const EmbeddingQuery>> batches;
    for (std::size_t i = 0; i < queries.size(); i += batch_size_)
        batches.push_back(queries.subspan(i, std::min(batch_size_, queries.size() - i)));

    std::vector<RawEmbedding> out;
    out.reserve(queries.size());
    for (std::size_t b = 0; b < batches.size(); b += max_parallel_) {
        std::vector<std::future<std::vector<RawEmbedding>>> inflight;
        for (std::size_t k = b; k < std::min(batches.size(), b + max_parallel_); ++k)
            inflight.push_back(std::async(std::launch::async, [this, mode, &model_id, batch = batches[k]] {
                return post_batch(mode, model_id, batch);
            }));
        for (auto& f : inflight) {
            auto part = f.get();
            std::move(part.begin(), part.end(), std::back_inserter(out));
        }
    }
    return out;
}

// ---------------------------------------------------------------- cache

namespace {

constexpr char kCacheMagic[4] = {'M', 'G', 'T', 'E'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool read_pod(std::istream& in, T& v) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

}  // namespace

EmbeddingCache::EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string EmbeddingCache::key(std::string_view model_id, EmbeddingMode mode, std::string_view text) {
    // Length-prefixed fields keep (model, text) pairs from colliding.
    std::string payload;
    for (std::string_view part : {model_id, to_string(mode), text}) {
        payload += std::to_string(part.size());
        payload += ':';
        payload += part;
    }
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(payload.data()), payload.size(), digest);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * SHA256_DIGEST_LENGTH);
    for (unsigned char c : digest) {
        out.push_back(hex[c >> 4]);
        out.push_back(hex[c & 0xF]);
    }
    return out;
}

std::filesystem::path EmbeddingCache::entry_path(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".emb");
}

std::optional<RawEmbedding> EmbeddingCache::get(const std::string& key) {
    {
        std::lock_guard lock(mu_);
        if (auto it = memory_.find(key); it != memory_.end()) {
            ++hits_;
            return it->second;
        }
    }
    if (!dir_.empty()) {
        std::ifstream in(entry_path(key), std::ios::binary);
        if (in) {
            char magic[4];
            std::uint32_t version = 0;
            std::uint32_t rows = 0;
            std::uint32_t dim = 0;
            std::uint8_t truncated = 0;
            in.read(magic, 4);
            if (in && std::memcmp(magic, kCacheMagic, 4) == 0 && read_pod(in, version) && version == kCacheVersion &&
                read_pod(in, rows) && read_pod(in, dim) && read_pod(in, truncated)) {
                RawEmbedding raw;
                raw.truncated = truncated != 0;
                raw.vectors.assign(rows, std::vector<double>(dim));
                bool ok = true;
                for (auto& row : raw.vectors)
                    ok = ok && static_cast<bool>(in.read(reinterpret_cast<char*>(row.data()),
                                                         static_cast<std::streamsize>(dim * sizeof(double))));
                if (ok) {
                    std::lock_guard lock(mu_);
                    ++hits_;
                    return raw;
                }
            }
        }
    }
    std::lock_guard lock(mu_);
    ++misses_;
    return std::nullopt;
}

void EmbeddingCache::put(const std::string& key, const RawEmbedding& value) {
    if (!dir_.empty()) {
        const auto final_path = entry_path(key);
        std::filesystem::create_directories(final_path.parent_path());
        std::ostringstream suffix;
        suffix << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id());
        const auto tmp_path = final_path.string() + suffix.str();
        {
            std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
            if (!out) throw BackendError("cannot write embedding cache entry " + tmp_path);
            out.write(kCacheMagic, 4);
            write_pod(out, kCacheVersion);
            write_pod(out, static_cast<std::uint32_t>(value.vectors.size()));
            write_pod(out, static_cast<std::uint32_t>(value.vectors.empty() ? 0 : value.vectors.front().size()));
            write_pod(out, static_cast<std::uint8_t>(value.truncated ? 1 : 0));
            for (const auto& row : value.vectors)
                out.write(reinterpret_cast<const char*>(row.data()),
                          static_cast<std::streamsize>(row.size() * sizeof(double)));
            if (!out) throw BackendError("failed writing embedding cache entry " + tmp_path);
        }
        std::filesystem::rename(tmp_path, final_path);
        return;
    }
    std::lock_guard lock(mu_);
    memory_.insert_or_assign(key, value);
}

std::size_t EmbeddingCache::hits() const {
    std::lock_guard lock(mu_);
    return hits_;
}

std::size_t EmbeddingCache::misses() const {
    std::lock_guard lock(mu_);
    return misses_;
}

// ---------------------------------------------------------------- provider

std::unique_ptr<EmbeddingBackend> make_backend(const EmbeddingSource& source) {
    switch (source.kind) {
        case SourceKind::PrecomputedFile:
            return std::make_unique<PrecomputedBackend>(source.location);
        case SourceKind::HttpService:
            return std::make_unique<HttpBackend>(source.location, source.batch_size, source.max_parallel_requests);
    }
    throw ConfigError("unknown embedding source kind");
}

EmbeddingProvider::EmbeddingProvider(EmbeddingSource source, std::shared_ptr<EmbeddingCache> cache)
    : EmbeddingProvider(source, make_backend(source), std::move(cache)) {}

EmbeddingProvider::EmbeddingProvider(EmbeddingSource source, std::unique_ptr<EmbeddingBackend> backend,
                                     std::shared_ptr<EmbeddingCache> cache)
    : source_(std::move(source)),
      backend_(std::move(backend)),
      cache_(cache ? std::move(cache) : std::make_shared<EmbeddingCache>()) {
    if (source_.model_id.empty()) throw ConfigError("embedding source needs a model id");
}

std::vector<RawEmbedding> EmbeddingProvider::fetch(EmbeddingMode mode, std::span<const EmbeddingQuery> queries) {
    std::vector<std::optional<RawEmbedding>> results(queries.size());
    std::vector<std::string> keys(queries.size());
    std::vector<EmbeddingQuery> missing;
    std::vector<std::size_t> missing_pos;
    // A precomputed file is already a store; caching it would only risk staleness.
    const bool use_cache = source_.kind != SourceKind::PrecomputedFile;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (queries[i].text.find_first_not_of(" \t\r\n") == std::string::npos)
            throw PreconditionError("cannot embed empty text (key '" + queries[i].key + "')");
        keys[i] = EmbeddingCache::key(source_.model_id, mode, queries[i].text);
        if (use_cache) results[i] = cache_->get(keys[i]);
        if (!results[i]) {
            missing.push_back(queries[i]);
            missing_pos.push_back(i);
        }
    }
    if (!missing.empty()) {
        auto fetched = backend_->embed(mode, source_.model_id, missing);
        if (fetched.size() != missing.size()) throw BackendError("backend returned a wrong number of embeddings");
        for (std::size_t k = 0; k < missing.size(); ++k) {
            if (use_cache) cache_->put(keys[missing_pos[k]], fetched[k]);
            results[missing_pos[k]] = std::move(fetched[k]);
        }
    }
    std::vector<RawEmbedding> out;
    out.reserve(results.size());
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
}

std::vector<EmbeddingMatrix> EmbeddingProvider::token_embeddings(std::span<const EmbeddingQuery> queries) {
    auto raw = fetch(EmbeddingMode::Tokens, queries);
    std::vector<EmbeddingMatrix> out;
    out.reserve(raw.size());
    for (auto& r : raw) out.push_back(EmbeddingMatrix::from_rows(r.vectors, source_.model_id, r.truncated));
    return out;
}

std::vector<PooledEmbedding> EmbeddingProvider::pooled_embeddings(std::span<const EmbeddingQuery> queries) {
    auto raw = fetch(EmbeddingMode::Pooled, queries);
    std::vector<PooledEmbedding> out;
    out.reserve(raw.size());
    for (auto& r : raw) {
        if (r.vectors.size() != 1) throw BackendError("pooled embedding must be a single vector");
        PooledEmbedding p{std::move(r.vectors.front()), source_.model_id, r.truncated};
        if (p.vector.empty()) throw BackendError("pooled embedding has dimension 0");
        for (double v : p.vector)
            if (!std::isfinite(v)) throw BackendError("pooled embedding has non-finite entries");
        out.push_back(std::move(p));
    }
    return out;
}

EmbeddingMatrix EmbeddingProvider::get_token_embeddings(const Document& doc) {
    EmbeddingQuery q{doc.id, doc.text};
    return std::move(token_embeddings(std::span(&q, 1)).front());
}

PooledEmbedding EmbeddingProvider::get_pooled_embedding(std::string_view text, std::string_view key) {
    EmbeddingQuery q{std::string(key), std::string(text)};
    return std::move(pooled_embeddings(std::span(&q, 1)).front());
}

}  // namespace mgtaudit
