#include "synthetic.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mgtaudit/errors.hpp"
#include "mgtaudit/rng.hpp"

namespace mgtaudit::testing {

namespace {

constexpr std::size_t kMaxIntrinsic = 16;

// Fixed linear part and curvature frequencies of the manifold map.
struct ManifoldMap {
    std::vector<double> linear;  // kSyntheticTokenDim x kMaxIntrinsic
    std::vector<double> bend;    // kSyntheticTokenDim x kMaxIntrinsic

    ManifoldMap() : linear(kSyntheticTokenDim * kMaxIntrinsic), bend(kSyntheticTokenDim * kMaxIntrinsic) {
        Rng rng(derive_seed(7, "synthetic/manifold"));
        for (auto& v : linear) v = 2.0 * rng.uniform01() - 1.0;
        for (auto& v : bend) v = 2.0 * rng.uniform01() - 1.0;
    }

    void apply(const double* u, std::size_t k, double* x) const {
        for (std::size_t r = 0; r < kSyntheticTokenDim; ++r) {
            double lin = 0.0;
            double phase = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                lin += linear[r * kMaxIntrinsic + c] * u[c];
                phase += bend[r * kMaxIntrinsic + c] * u[c];
            }
            x[r] = lin + 0.3 * std::sin(3.0 * phase);
        }
    }
};

const ManifoldMap& manifold() {
    static const ManifoldMap map;
    return map;
}

double round6(double v) {
    return std::round(v * 1e6) / 1e6;
}

}  // namespace

std::size_t synthetic_intrinsic_dim(Label label) {
    return label == Label::Human ? 9 : 7;
}

EmbeddingMatrix synthetic_manifold_points(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k == 0 || k > kMaxIntrinsic) throw PreconditionError("intrinsic dimension out of range");
    Rng rng(seed);
    std::vector<double> data(n * kSyntheticTokenDim);
    std::vector<double> u(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : u) v = rng.uniform01();
        manifold().apply(u.data(), k, data.data() + i * kSyntheticTokenDim);
    }
    for (auto& v : data) v = round6(v);
    return EmbeddingMatrix(n, kSyntheticTokenDim, std::move(data), "synthetic");
}

EmbeddingMatrix synthetic_token_matrix(const Document& doc, std::uint64_t seed) {
    const std::size_t n = tokenize_simple(doc.text).size();
    return synthetic_manifold_points(n, synthetic_intrinsic_dim(doc.label), derive_seed(seed, "tokens/" + doc.id));
}

std::vector<double> synthetic_pooled(const std::string& text) {
    std::vector<double> v(kSyntheticPooledDim, 0.0);
    auto add = [&](const std::string& feature, double weight) {
        const std::uint64_t h = fnv1a64(feature);
        v[h % kSyntheticPooledDim] += (h >> 63) ? weight : -weight;
    };
    auto tokens = tokenize_simple(text);
    for (auto& t : tokens)
        for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        add("u:" + tokens[i], 1.0);
        if (i + 1 < tokens.size()) add("b:" + tokens[i] + " " + tokens[i + 1], 0.5);
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm == 0.0) v[0] = norm = 1.0;
    for (auto& x : v) x = round6(x / std::sqrt(norm));
    return v;
}

std::size_t write_synthetic_embeddings(const Corpus& corpus, const AuditConfig& cfg,
                                       const std::optional<SynonymLexicon>& lexicon, std::uint64_t seed,
                                       const std::filesystem::path& out) {
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write " + out.string());
    std::size_t rows = 0;
    auto pooled_row = [&](const std::string& id, const std::string& text) {
        file << nlohmann::json{{"id", id},
                               {"model", cfg.pooled_source.model_id},
                               {"mode", "pooled"},
                               {"vectors", {synthetic_pooled(text)}}}
                    .dump()
             << '\n';
        ++rows;
    };
    for (const auto& doc : corpus.documents()) {
        const auto m = synthetic_token_matrix(doc, seed);
        nlohmann::json vectors = nlohmann::json::array();
        for (std::size_t r = 0; r < m.rows(); ++r) {
            auto row = m.row(r);
            vectors.push_back(std::vector<double>(row.begin(), row.end()));
        }
        file << nlohmann::json{{"id", doc.id}, {"model", cfg.token_source.model_id}, {"mode", "tokens"}, {"vectors", vectors}}
                    .dump()
             << '\n';
        ++rows;
        pooled_row(doc.id, doc.text);
        if (lexicon) {
            const auto syn = synonym_perturb(doc, *lexicon, cfg.perturbation);
            pooled_row(doc.id + "#token-perturb", syn.modified_text);
        }
        const auto shuf = shuffle_sentences(doc, cfg.perturbation);
        pooled_row(doc.id + "#sentence-shuffle", shuf.modified_text);
    }
    if (!file) throw Error("failed writing " + out.string());
    return rows;
}

}  // namespace mgtaudit::testing
