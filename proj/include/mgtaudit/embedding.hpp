#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mgtaudit/corpus.hpp"

namespace mgtaudit {

enum class EmbeddingMode { Tokens, Pooled };
enum class SourceKind { PrecomputedFile, HttpService };

std::string_view to_string(EmbeddingMode mode);
std::optional<EmbeddingMode> parse_embedding_mode(std::string_view s);

// Row-major matrix of token embeddings, one row per model token in token order.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> data, std::string model_id = {},
                    bool truncated = false);
    // Throws PreconditionError when rows are empty or ragged, or values are non-finite.
    static EmbeddingMatrix from_rows(const std::vector<std::vector<double>>& rows, std::string model_id = {},
                                     bool truncated = false);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }
    const std::string& model_id() const noexcept { return model_id_; }
    bool truncated() const noexcept { return truncated_; }
    const std::vector<double>& data() const noexcept { return data_; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    // Rows [begin, end) as a new matrix.
    EmbeddingMatrix slice(std::size_t begin, std::size_t end) const;

    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> data_;
    std::string model_id_;
    bool truncated_ = false;
};

struct PooledEmbedding {
    std::vector<double> vector;
    std::string model_id;
    bool truncated = false;

    std::size_t dim() const noexcept { return vector.size(); }
    friend bool operator==(const PooledEmbedding&, const PooledEmbedding&) = default;
};

struct EmbeddingSource {
    SourceKind kind = SourceKind::PrecomputedFile;
    std::string location;  // file path or http endpoint
    std::string model_id;
    EmbeddingMode mode = EmbeddingMode::Tokens;
    std::size_t batch_size = 16;
    std::size_t max_parallel_requests = 2;
};

// What the backend sees: a lookup key (document id, or derived id for a
// modified text) plus the text itself.
struct EmbeddingQuery {
    std::string key;
    std::string text;
};

// Vectors as returned by a backend before typing. Pooled mode carries one row.
struct RawEmbedding {
    std::vector<std::vector<double>> vectors;
    bool truncated = false;
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::vector<RawEmbedding> embed(EmbeddingMode mode, const std::string& model_id,
                                            std::span<const EmbeddingQuery> queries) = 0;
};

// Backed by a JSONL file of `{id, model, mode, vectors}` records. The file is
// validated and indexed on first use; vectors are re-read per lookup.
class PrecomputedBackend : public EmbeddingBackend {
public:
    explicit PrecomputedBackend(std::filesystem::path path);
    std::vector<RawEmbedding> embed(EmbeddingMode mode, const std::string& model_id,
                                    std::span<const EmbeddingQuery> queries) override;

private:
    void ensure_loaded();
    nlohmann::json read_record(std::istream& in, std::size_t line_no, std::string& line) const;

    std::filesystem::path path_;
    std::once_flag loaded_;
    // (model, mode, id) -> (byte offset, line number)
    std::map<std::tuple<std::string, EmbeddingMode, std::string>, std::pair<std::streamoff, std::size_t>> index_;
};

// Client for the sidecar's POST /embed protocol.
class HttpBackend : public EmbeddingBackend {
public:
    HttpBackend(std::string endpoint, std::size_t batch_size, std::size_t max_parallel_requests);
    std::vector<RawEmbedding> embed(EmbeddingMode mode, const std::string& model_id,
                                    std::span<const EmbeddingQuery> queries) override;

private:
    std::vector<RawEmbedding> post_batch(EmbeddingMode mode, const std::string& model_id,
                                         std::span<const EmbeddingQuery> batch) const;

    std::string endpoint_;
    std::size_t batch_size_;
    std::size_t max_parallel_;
};

// Content-addressed store: sha256(model_id, mode, text) -> vectors. Entries are
// written to a temp file and renamed into place. With an empty directory the
// cache lives in memory instead.
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::filesystem::path dir = {});

    static std::string key(std::string_view model_id, EmbeddingMode mode, std::string_view text);

    std::optional<RawEmbedding> get(const std::string& key);
    void put(const std::string& key, const RawEmbedding& value);
    std::size_t hits() const;
    std::size_t misses() const;

private:
    std::filesystem::path entry_path(const std::string& key) const;

    std::filesystem::path dir_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, RawEmbedding> memory_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

std::unique_ptr<EmbeddingBackend> make_backend(const EmbeddingSource& source);

// Typed front end: cache first, backend on miss. Precomputed files bypass the
// cache. Safe for concurrent calls.
class EmbeddingProvider {
public:
    EmbeddingProvider(EmbeddingSource source, std::shared_ptr<EmbeddingCache> cache);
    EmbeddingProvider(EmbeddingSource source, std::unique_ptr<EmbeddingBackend> backend,
                      std::shared_ptr<EmbeddingCache> cache);

    const EmbeddingSource& source() const noexcept { return source_; }

    EmbeddingMatrix get_token_embeddings(const Document& doc);
    PooledEmbedding get_pooled_embedding(std::string_view text, std::string_view key = {});

    // Batch forms; results are in query order.
    std::vector<EmbeddingMatrix> token_embeddings(std::span<const EmbeddingQuery> queries);
    std::vector<PooledEmbedding> pooled_embeddings(std::span<const EmbeddingQuery> queries);

private:
    std::vector<RawEmbedding> fetch(EmbeddingMode mode, std::span<const EmbeddingQuery> queries);

    EmbeddingSource source_;
    std::unique_ptr<EmbeddingBackend> backend_;
    std::shared_ptr<EmbeddingCache> cache_;
};

// 1 - a.b / (|a||b|), clamped to [0, 2].
double cosine_distance(std::span<const double> a, std::span<const double> b);

}  // namespace mgtaudit
