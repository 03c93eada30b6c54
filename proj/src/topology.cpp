#include "mgtaudit/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mgtaudit/errors.hpp"
#include "mgtaudit/rng.hpp"

namespace mgtaudit {

namespace {

double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

// Pairwise distances, computed once per point cloud when it is small enough
// to hold. Subsample MSTs then cost O(k^2) lookups instead of O(k^2 * dim).
class DistanceTable {
public:
    static constexpr std::size_t kMaxCachedPoints = 2048;

    explicit DistanceTable(const EmbeddingMatrix& points) : points_(points), n_(points.rows()) {
        if (n_ > kMaxCachedPoints) return;
        table_.assign(n_ * n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j)
                table_[i * n_ + j] = table_[j * n_ + i] = euclidean(points_.row(i), points_.row(j));
    }

    double operator()(std::size_t i, std::size_t j) const {
        return table_.empty() ? euclidean(points_.row(i), points_.row(j)) : table_[i * n_ + j];
    }

private:
    const EmbeddingMatrix& points_;
    std::size_t n_;
    std::vector<double> table_;
};

// Dense Prim over `indices`. Edge weights are summed in ascending order so the
// total depends only on the MST's edge-length multiset, which is unique.
template <typename Dist>
double prim_total(std::span<const std::size_t> indices, double alpha, const Dist& dist) {
    const std::size_t n = indices.size();
    if (n <= 1) return 0.0;
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<char> in_tree(n, 0);
    std::vector<double> edges;
    edges.reserve(n - 1);
    std::size_t current = 0;
    in_tree[0] = 1;
    for (std::size_t step = 1; step < n; ++step) {
        std::size_t next = n;
        double next_w = std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < n; ++v) {
            if (in_tree[v]) continue;
            const double w = dist(indices[current], indices[v]);
            if (w < best[v]) best[v] = w;
            if (best[v] < next_w) {
                next_w = best[v];
                next = v;
            }
        }
        in_tree[next] = 1;
        edges.push_back(next_w);
        current = next;
    }
    std::sort(edges.begin(), edges.end());
    double total = 0.0;
    for (double w : edges) total += alpha == 1.0 ? w : std::pow(w, alpha);
    return total;
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw PreconditionError("alpha must be a positive finite number");
}

std::pair<double, double> ols_fit(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

}  // namespace

MstScore mst_total_edge_weight(const EmbeddingMatrix& points, double alpha) {
    check_alpha(alpha);
    std::vector<std::size_t> all(points.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return {alpha, mst_total_edge_weight(points, all, alpha), points.rows()};
}

double mst_total_edge_weight(const EmbeddingMatrix& points, std::span<const std::size_t> indices, double alpha) {
    check_alpha(alpha);
    for (std::size_t i : indices)
        if (i >= points.rows()) throw PreconditionError("MST index out of range");
    return prim_total(indices, alpha,
                      [&points](std::size_t i, std::size_t j) { return euclidean(points.row(i), points.row(j)); });
}

std::vector<std::size_t> default_schedule(std::size_t n_points, std::size_t sizes, std::size_t floor) {
    const std::size_t lo = std::max(floor, n_points / 8);
    if (n_points < lo || sizes < 2)
        throw PreconditionError("too few points (" + std::to_string(n_points) + ") for a PHD schedule starting at " +
                                std::to_string(lo));
    std::vector<std::size_t> out;
    const double log_lo = std::log(static_cast<double>(lo));
    const double log_hi = std::log(static_cast<double>(n_points));
    for (std::size_t i = 0; i < sizes; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(sizes - 1);
        auto v = static_cast<std::size_t>(std::llround(std::exp(log_lo + t * (log_hi - log_lo))));
        v = std::clamp(v, lo, n_points);
        if (out.empty() || v > out.back()) out.push_back(v);
    }
    out.back() = n_points;
    if (out.size() < 2) throw PreconditionError("PHD schedule collapsed to a single size");
    return out;
}

PhdEstimate phd_estimate(const EmbeddingMatrix& points, const PhdParams& params, std::uint64_t seed) {
    check_alpha(params.alpha);
    const std::size_t n = points.rows();
    if (params.restarts < 1) throw PreconditionError("PHD needs at least one restart");
    if (n < params.min_points)
        throw PreconditionError("too few points for PHD: " + std::to_string(n) + " < " +
                                std::to_string(params.min_points));
    std::vector<std::size_t> schedule =
        params.schedule.empty() ? default_schedule(n, params.schedule_sizes, params.schedule_floor) : params.schedule;
    if (schedule.size() < 2) throw PreconditionError("PHD schedule needs at least two sizes");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (schedule[i] < 2) throw PreconditionError("PHD schedule sizes must be >= 2");
        if (i > 0 && schedule[i] <= schedule[i - 1]) throw PreconditionError("PHD schedule must be strictly increasing");
    }
    if (schedule.back() > n)
        throw PreconditionError("PHD schedule size " + std::to_string(schedule.back()) + " exceeds point count " +
                                std::to_string(n));

    const DistanceTable dist(points);
    Rng rng(seed);
    PhdEstimate est;
    est.schedule = schedule;
    est.restarts = params.restarts;
    est.seed = seed;
    std::vector<double> log_n;
    std::vector<double> log_e;
    for (std::size_t size : schedule) {
        std::vector<double> scores;
        scores.reserve(params.restarts);
        for (std::size_t r = 0; r < params.restarts; ++r) {
            auto subset = rng.sample_indices(n, size);
            scores.push_back(prim_total(subset, params.alpha, dist));
        }
        const double agg = median(scores);
        if (!(agg > 0.0))
            throw UndefinedEstimateError("PHD undefined: zero MST score at size " + std::to_string(size) +
                                             " (duplicate points)",
                                         std::numeric_limits<double>::quiet_NaN());
        est.aggregates.push_back(agg);
        log_n.push_back(std::log(static_cast<double>(size)));
        log_e.push_back(std::log(agg));
    }
    est.slope = ols_fit(log_n, log_e).first;
    if (!(est.slope < 1.0 - 1e-6))
        throw UndefinedEstimateError("PHD undefined: regression slope " + std::to_string(est.slope) + " >= 1",
                                     est.slope);
    est.value = params.alpha / (1.0 - est.slope);
    return est;
}

std::size_t TtsSeries::undefined_count() const {
    return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::nullopt));
}

std::vector<double> TtsSeries::defined_values() const {
    std::vector<double> out;
    for (const auto& v : values)
        if (v) out.push_back(*v);
    return out;
}

std::size_t tts_window_count(std::size_t tokens, std::size_t window, std::size_t stride) {
    if (stride == 0) throw PreconditionError("TTS stride must be >= 1");
    if (window == 0 || tokens < window) return 0;
    return (tokens - window) / stride + 1;
}

TtsSeries sliding_window_tts(const EmbeddingMatrix& points, std::size_t window, std::size_t stride,
                             const PhdParams& params, std::uint64_t seed) {
    if (stride == 0) throw PreconditionError("TTS stride must be >= 1");
    if (window < params.min_points)
        throw PreconditionError("TTS window " + std::to_string(window) + " is below the PHD minimum of " +
                                std::to_string(params.min_points) + " points");
    const std::size_t count = tts_window_count(points.rows(), window, stride);
    if (count == 0)
        throw PreconditionError("text too short for TTS: " + std::to_string(points.rows()) + " tokens < window " +
                                std::to_string(window));
    TtsSeries series;
    series.window = window;
    series.stride = stride;
    series.values.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const EmbeddingMatrix win = points.slice(k * stride, k * stride + window);
        try {
            series.values.push_back(phd_estimate(win, params, derive_seed(seed, "window/" + std::to_string(k))).value);
        } catch (const UndefinedEstimateError&) {
            series.values.push_back(std::nullopt);
        }
    }
    return series;
}

TtsDistribution tts_distribution(Label label, std::span<const TtsSeries> series, double lo, double hi,
                                 const HistogramSpec& spec) {
    TtsDistribution dist;
    dist.class_label = label;
    for (const auto& s : series) {
        auto values = s.defined_values();
        dist.samples.insert(dist.samples.end(), values.begin(), values.end());
    }
    if (dist.samples.empty()) throw PreconditionError("tts_distribution: every series is empty");
    dist.histogram = make_histogram(dist.samples, lo, hi, spec);
    return dist;
}

}  // namespace mgtaudit
