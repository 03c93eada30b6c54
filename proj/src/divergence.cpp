#include "mgtaudit/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "mgtaudit/errors.hpp"

namespace mgtaudit {

std::pair<double, double> pooled_range(std::span<const double> a, std::span<const double> b) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (auto s : {a, b})
        for (double v : s) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!std::isfinite(lo)) throw PreconditionError("pooled_range: no samples");
    if (hi <= lo) {
        // Degenerate spread: widen to a unit interval around the common value.
        lo -= 0.5;
        hi += 0.5;
    }
    return {lo, hi};
}

Histogram make_histogram(std::span<const double> samples, double lo, double hi, const HistogramSpec& spec) {
    if (spec.bins < 1) throw PreconditionError("histogram needs at least one bin");
    if (!(hi > lo)) throw PreconditionError("histogram range must satisfy lo < hi");
    if (spec.smoothing_eps < 0.0) throw PreconditionError("smoothing eps must be >= 0");
    if (samples.empty()) throw PreconditionError("histogram of no samples");
    Histogram h;
    h.smoothing_eps = spec.smoothing_eps;
    h.edges.resize(spec.bins + 1);
    const double width = (hi - lo) / static_cast<double>(spec.bins);
    for (std::size_t i = 0; i <= spec.bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
    h.edges.back() = hi;

    std::vector<double> counts(spec.bins, 0.0);
    for (double v : samples) {
        if (!std::isfinite(v) || v < lo || v > hi) throw PreconditionError("histogram sample outside bin range");
        auto bin = static_cast<std::size_t>((v - lo) / width);
        counts[std::min(bin, spec.bins - 1)] += 1.0;
    }
    const auto n = static_cast<double>(samples.size());
    h.probs.resize(spec.bins);
    double total = 0.0;
    for (std::size_t i = 0; i < spec.bins; ++i) {
        h.probs[i] = counts[i] / n + spec.smoothing_eps;
        total += h.probs[i];
    }
    for (double& p : h.probs) p /= total;
    return h;
}

double histogram_kl(const Histogram& p, const Histogram& q) {
    if (p.edges != q.edges) throw PreconditionError("histogram_kl: bin edges differ");
    if (p.probs.size() != q.probs.size() || p.probs.size() + 1 != p.edges.size())
        throw PreconditionError("histogram_kl: malformed histogram");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        if (p.probs[i] == 0.0) continue;
        if (!(q.probs[i] > 0.0))
            throw PreconditionError("histogram_kl: zero bin " + std::to_string(i) + " in q; smooth before comparing");
        kl += p.probs[i] * std::log(p.probs[i] / q.probs[i]);
    }
    return kl;
}

double kl_tts_score(const Histogram& h, const Histogram& m) {
    return std::fabs(histogram_kl(h, m) - histogram_kl(m, h));
}

namespace {

double mean_shift(std::span<const ShiftRecord> records, const char* cls) {
    if (records.empty()) throw PreconditionError(std::string("delta_shift: no ") + cls + " shift records");
    std::vector<double> v;
    v.reserve(records.size());
    for (const auto& r : records) {
        if (r.kind != ModificationKind::TokenPerturb)
            throw PreconditionError("delta_shift expects token-perturbation records");
        if (!std::isfinite(r.shift) || r.shift < 0.0) throw PreconditionError("shift must be finite and >= 0");
        v.push_back(r.shift);
    }
    std::sort(v.begin(), v.end());
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> shuffle_distribution(std::span<const ShiftRecord> records, const KlShuffleOptions& options) {
    std::vector<double> v;
    v.reserve(records.size());
    for (const auto& r : records) {
        if (r.kind != ModificationKind::SentenceShuffle)
            throw PreconditionError("kl_shuffle expects sentence-shuffle records");
        if (!std::isfinite(r.shift) || r.shift < 0.0) throw PreconditionError("shift must be finite and >= 0");
        v.push_back(r.shift + options.eps);
    }
    if (options.sort_descending) std::sort(v.begin(), v.end(), std::greater<>());
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    for (double& x : v) x /= total;
    return v;
}

}  // namespace

double delta_shift(std::span<const ShiftRecord> human, std::span<const ShiftRecord> machine) {
    const double h = mean_shift(human, "human");
    const double m = mean_shift(machine, "machine");
    if (!(m > 0.0)) throw PreconditionError("delta_shift: mean machine shift is zero (degenerate embeddings)");
    if (!(h > 0.0)) throw PreconditionError("delta_shift: mean human shift is zero (degenerate embeddings)");
    return std::log(h / m);
}

double kl_shuffle(std::span<const ShiftRecord> human, std::span<const ShiftRecord> machine,
                  const KlShuffleOptions& options) {
    if (human.empty() || machine.empty()) throw PreconditionError("kl_shuffle: empty shift list");
    if (human.size() != machine.size())
        throw PreconditionError("kl_shuffle: class sizes differ (" + std::to_string(human.size()) + " vs " +
                                std::to_string(machine.size()) + ")");
    if (!(options.eps > 0.0)) throw PreconditionError("kl_shuffle: eps must be > 0");
    const auto h = shuffle_distribution(human, options);
    const auto m = shuffle_distribution(machine, options);
    double kl = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) kl += h[i] * std::log(h[i] / m[i]);
    return kl;
}

double macro_f1(std::span<const Prediction> predictions, const Corpus& gold) {
    std::unordered_set<std::string> seen;
    // confusion[gold][pred]
    double confusion[2][2] = {{0, 0}, {0, 0}};
    for (const auto& p : predictions) {
        const Document* doc = gold.find(p.doc_id);
        if (!doc) throw DatasetError("prediction for unknown id '" + p.doc_id + "'");
        if (!seen.insert(p.doc_id).second) throw DatasetError("duplicate prediction for id '" + p.doc_id + "'");
        confusion[static_cast<int>(doc->label)][static_cast<int>(p.predicted)] += 1.0;
    }
    if (seen.size() != gold.size()) {
        for (const auto& doc : gold.documents())
            if (!seen.count(doc.id)) throw DatasetError("no prediction for gold id '" + doc.id + "'");
    }
    double sum = 0.0;
    for (int c = 0; c < 2; ++c) {
        const double tp = confusion[c][c];
        const double fp = confusion[1 - c][c];
        const double fn = confusion[c][1 - c];
        const double denom = 2.0 * tp + fp + fn;
        sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
    }
    return sum / 2.0;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open prediction file " + path.string());
    std::vector<Prediction> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DatasetError(where + ": malformed JSON (" + e.what() + ")");
        }
        if (!j.contains("id") || !j["id"].is_string() || !j.contains("pred") || !j["pred"].is_string())
            throw DatasetError(where + ": expected string fields id and pred");
        auto label = parse_label(j["pred"].get<std::string>());
        if (!label) throw DatasetError(where + ": unknown label '" + j["pred"].get<std::string>() + "'");
        std::string detector = j.value("detector", std::string("default"));
        out.push_back({j["id"].get<std::string>(), *label, std::move(detector)});
    }
    return out;
}

}  // namespace mgtaudit
