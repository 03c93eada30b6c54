#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mgtaudit/corpus.hpp"
#include "mgtaudit/perturbation.hpp"

namespace mgtaudit {

struct Histogram {
    std::vector<double> edges;  // strictly increasing
    std::vector<double> probs;  // edges.size() - 1 entries summing to 1
    double smoothing_eps = 0.0;
};

struct HistogramSpec {
    std::size_t bins = 40;
    double smoothing_eps = 1e-6;
};

// Equal-width bins over [lo, hi]; eps added to every bin, then renormalized.
Histogram make_histogram(std::span<const double> samples, double lo, double hi, const HistogramSpec& spec);

// [min, max] over both sample sets, widened to unit width when degenerate.
std::pair<double, double> pooled_range(std::span<const double> a, std::span<const double> b);

// sum_i p_i ln(p_i / q_i). Edges must match and q must have no zero bins.
double histogram_kl(const Histogram& p, const Histogram& q);

// |KL(h || m) - KL(m || h)|
double kl_tts_score(const Histogram& h, const Histogram& m);

struct ShiftRecord {
    std::string doc_id;
    Label label = Label::Human;
    ModificationKind kind = ModificationKind::TokenPerturb;
    double shift = 0.0;  // cosine distance, original vs modified pooled embedding
};

// ln(mean human shift / mean machine shift). Positive: human texts move more.
double delta_shift(std::span<const ShiftRecord> human, std::span<const ShiftRecord> machine);

struct KlShuffleOptions {
    double eps = 1e-10;
    // Pair the i-th largest shifts of each class; false pairs in sample order.
    bool sort_descending = true;
};

double kl_shuffle(std::span<const ShiftRecord> human, std::span<const ShiftRecord> machine,
                  const KlShuffleOptions& options = {});

struct Prediction {
    std::string doc_id;
    Label predicted = Label::Human;
    std::string detector;
};

// Unweighted mean of per-class F1 over {human, machine}. An F1 with a zero
// denominator (class absent from gold and predictions) counts as 0.
double macro_f1(std::span<const Prediction> predictions, const Corpus& gold);

// Prediction JSONL: {"id": str, "pred": "human"|"machine", "detector": str}.
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

}  // namespace mgtaudit
