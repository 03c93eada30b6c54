#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mgtaudit/corpus.hpp"
#include "mgtaudit/divergence.hpp"
#include "mgtaudit/embedding.hpp"

namespace mgtaudit {

struct MstScore {
    double alpha = 1.0;
    double total = 0.0;  // sum over MST edges of length^alpha
    std::size_t n_points = 0;
};

struct PhdParams {
    double alpha = 1.0;
    // Explicit subsample sizes; empty means default_schedule(n).
    std::vector<std::size_t> schedule;
    std::size_t schedule_sizes = 8;
    std::size_t schedule_floor = 40;
    std::size_t restarts = 5;
    std::size_t min_points = 50;
};

struct PhdEstimate {
    double value = 0.0;  // alpha / (1 - slope)
    double slope = 0.0;
    std::vector<std::size_t> schedule;
    std::vector<double> aggregates;  // median MST score per schedule size
    std::size_t restarts = 0;
    std::uint64_t seed = 0;
};

struct TtsSeries {
    // One entry per window; nullopt where the window's estimate is undefined.
    std::vector<std::optional<double>> values;
    std::size_t window = 0;
    std::size_t stride = 0;

    std::size_t undefined_count() const;
    std::vector<double> defined_values() const;
};

struct TtsDistribution {
    Label class_label = Label::Human;
    std::vector<double> samples;
    Histogram histogram;
};

// Exact Euclidean MST total of the rows of `points`. Throws PreconditionError
// for alpha <= 0 (non-finite coordinates are rejected by EmbeddingMatrix).
MstScore mst_total_edge_weight(const EmbeddingMatrix& points, double alpha);

// Same, over the subset of rows named by `indices`.
double mst_total_edge_weight(const EmbeddingMatrix& points, std::span<const std::size_t> indices, double alpha);

// `sizes` geometrically spaced integers from max(floor, n/8) to n, deduplicated.
std::vector<std::size_t> default_schedule(std::size_t n_points, std::size_t sizes = 8, std::size_t floor = 40);

// Persistent-homology dimension from the growth of MST scores under
// subsampling. Throws UndefinedEstimateError when the fitted slope is >= 1.
PhdEstimate phd_estimate(const EmbeddingMatrix& points, const PhdParams& params, std::uint64_t seed);

// PHD of windows [k*stride, k*stride + window). Throws PreconditionError when
// the text has fewer than `window` tokens; check `tts_window_count` first.
TtsSeries sliding_window_tts(const EmbeddingMatrix& points, std::size_t window, std::size_t stride,
                             const PhdParams& params, std::uint64_t seed);

// floor((tokens - window) / stride) + 1, or 0 when tokens < window.
std::size_t tts_window_count(std::size_t tokens, std::size_t window, std::size_t stride);

TtsDistribution tts_distribution(Label label, std::span<const TtsSeries> series, double lo, double hi,
                                 const HistogramSpec& spec);

inline double kl_tts_score(const TtsDistribution& h, const TtsDistribution& m) {
    return kl_tts_score(h.histogram, m.histogram);
}

}  // namespace mgtaudit
