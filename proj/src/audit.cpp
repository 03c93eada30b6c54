#include "mgtaudit/audit.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "mgtaudit/errors.hpp"
#include "mgtaudit/rng.hpp"

namespace mgtaudit {

using nlohmann::json;

// ---------------------------------------------------------------- config

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ConfigError("unknown config key '" + where + "." + key + "'");
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field '" + where + "." + key + "' has the wrong type");
    }
}

json source_to_json(const EmbeddingSource& s) {
    return {{"kind", s.kind == SourceKind::HttpService ? "http" : "file"},
            {"location", s.location},
            {"model", s.model_id},
            {"batch_size", s.batch_size},
            {"max_parallel_requests", s.max_parallel_requests}};
}

void source_from_json(const json& j, EmbeddingSource& s, const std::string& where) {
    reject_unknown_keys(j, {"kind", "location", "model", "batch_size", "max_parallel_requests"}, where);
    std::string kind = s.kind == SourceKind::HttpService ? "http" : "file";
    read_field(j, "kind", kind, where);
    if (kind == "http") s.kind = SourceKind::HttpService;
    else if (kind == "file") s.kind = SourceKind::PrecomputedFile;
    else throw ConfigError(where + ".kind must be \"file\" or \"http\"");
    read_field(j, "location", s.location, where);
    read_field(j, "model", s.model_id, where);
    read_field(j, "batch_size", s.batch_size, where);
    read_field(j, "max_parallel_requests", s.max_parallel_requests, where);
}

void validate_source(const EmbeddingSource& s, const char* role) {
    const std::string r(role);
    if (s.location.empty()) throw ConfigError("no embedding source configured for the " + r + " role");
    if (s.model_id.empty()) throw ConfigError("no model id configured for the " + r + " role");
    if (s.kind == SourceKind::PrecomputedFile && !std::filesystem::exists(s.location))
        throw ConfigError("embedding file for the " + r + " role not found: " + s.location);
    if (s.kind == SourceKind::HttpService && s.location.rfind("http", 0) != 0)
        throw ConfigError("embedding endpoint for the " + r + " role must be an http(s) URL");
    if (s.batch_size < 1) throw ConfigError("embedding batch_size must be >= 1");
}

}  // namespace

void AuditConfig::validate() const {
    if (dataset.empty()) throw ConfigError("no dataset configured");
    if (!std::filesystem::exists(dataset)) throw ConfigError("dataset not found: " + dataset);
    if (per_class < 1) throw ConfigError("per_class must be >= 1");
    validate_source(token_source, "token");
    if (!skip_perturb) validate_source(pooled_source, "pooled");
    if (!(phd.alpha > 0.0)) throw ConfigError("phd.alpha must be > 0");
    if (phd.restarts < 1) throw ConfigError("phd.restarts must be >= 1");
    if (phd.min_points < 2) throw ConfigError("phd.min_points must be >= 2");
    if (tts_stride < 1) throw ConfigError("tts.stride must be >= 1");
    if (!skip_tts && tts_window < phd.min_points)
        throw ConfigError("tts.window must be >= phd.min_points (" + std::to_string(phd.min_points) + ")");
    if (kl_bins.bins < 1) throw ConfigError("kl_tts.bins must be >= 1");
    if (!(kl_bins.smoothing_eps > 0.0)) throw ConfigError("kl_tts.smoothing_eps must be > 0");
    if (!(kl_shuffle.eps > 0.0)) throw ConfigError("kl_shuffle.eps must be > 0");
    perturbation.validate();
    if (!lexicon.empty() && !std::filesystem::exists(lexicon)) throw ConfigError("lexicon not found: " + lexicon);
    if (!predictions.empty() && !std::filesystem::exists(predictions))
        throw ConfigError("predictions file not found: " + predictions);
    if (out_dir.empty()) throw ConfigError("no output directory configured");
    if (workers < 1) throw ConfigError("workers must be >= 1");
}

json AuditConfig::to_json() const {
    json j;
    j["dataset"] = dataset;
    j["split"] = split ? json(std::string(to_string(*split))) : json(nullptr);
    j["per_class"] = per_class;
    j["seed"] = seed;
    j["embedding"] = {{"tokens", source_to_json(token_source)},
                      {"pooled", source_to_json(pooled_source)},
                      {"cache_dir", cache_dir}};
    j["phd"] = {{"alpha", phd.alpha},
                {"schedule", phd.schedule},
                {"schedule_sizes", phd.schedule_sizes},
                {"schedule_floor", phd.schedule_floor},
                {"restarts", phd.restarts},
                {"min_points", phd.min_points}};
    j["tts"] = {{"window", tts_window}, {"stride", tts_stride}};
    j["kl_tts"] = {{"bins", kl_bins.bins}, {"smoothing_eps", kl_bins.smoothing_eps}};
    j["kl_shuffle"] = {{"eps", kl_shuffle.eps}, {"sort_descending", kl_shuffle.sort_descending}};
    j["perturbation"] = {{"token_replace_prob", perturbation.token_replace_prob},
                         {"sentence_shuffle_frac", perturbation.sentence_shuffle_frac},
                         {"seed", perturbation.seed},
                         {"shuffle_mode", std::string(to_string(perturbation.shuffle_mode))},
                         {"lexicon", lexicon}};
    j["predictions"] = predictions;
    j["out_dir"] = out_dir;
    j["skip_tts"] = skip_tts;
    j["skip_perturb"] = skip_perturb;
    j["workers"] = workers;
    return j;
}

AuditConfig AuditConfig::from_json(const json& j) {
    AuditConfig c;
    reject_unknown_keys(j,
                        {"dataset", "split", "per_class", "seed", "embedding", "phd", "tts", "kl_tts", "kl_shuffle",
                         "perturbation", "predictions", "out_dir", "skip_tts", "skip_perturb", "workers"},
                        "config");
    read_field(j, "dataset", c.dataset, "config");
    if (auto it = j.find("split"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw ConfigError("config.split must be a string");
        c.split = parse_split(it->get<std::string>());
        if (!c.split) throw ConfigError("config.split must be train, dev or test");
    }
    read_field(j, "per_class", c.per_class, "config");
    read_field(j, "seed", c.seed, "config");
    c.perturbation.seed = c.seed;
    if (auto it = j.find("embedding"); it != j.end()) {
        reject_unknown_keys(*it, {"tokens", "pooled", "cache_dir"}, "embedding");
        if (it->contains("tokens")) source_from_json((*it)["tokens"], c.token_source, "embedding.tokens");
        if (it->contains("pooled")) source_from_json((*it)["pooled"], c.pooled_source, "embedding.pooled");
        read_field(*it, "cache_dir", c.cache_dir, "embedding");
    }
    if (auto it = j.find("phd"); it != j.end()) {
        reject_unknown_keys(*it, {"alpha", "schedule", "schedule_sizes", "schedule_floor", "restarts", "min_points"},
                            "phd");
        read_field(*it, "alpha", c.phd.alpha, "phd");
        read_field(*it, "schedule", c.phd.schedule, "phd");
        read_field(*it, "schedule_sizes", c.phd.schedule_sizes, "phd");
        read_field(*it, "schedule_floor", c.phd.schedule_floor, "phd");
        read_field(*it, "restarts", c.phd.restarts, "phd");
        read_field(*it, "min_points", c.phd.min_points, "phd");
    }
    if (auto it = j.find("tts"); it != j.end()) {
        reject_unknown_keys(*it, {"window", "stride"}, "tts");
        read_field(*it, "window", c.tts_window, "tts");
        read_field(*it, "stride", c.tts_stride, "tts");
    }
    if (auto it = j.find("kl_tts"); it != j.end()) {
        reject_unknown_keys(*it, {"bins", "smoothing_eps"}, "kl_tts");
        read_field(*it, "bins", c.kl_bins.bins, "kl_tts");
        read_field(*it, "smoothing_eps", c.kl_bins.smoothing_eps, "kl_tts");
    }
    if (auto it = j.find("kl_shuffle"); it != j.end()) {
        reject_unknown_keys(*it, {"eps", "sort_descending"}, "kl_shuffle");
        read_field(*it, "eps", c.kl_shuffle.eps, "kl_shuffle");
        read_field(*it, "sort_descending", c.kl_shuffle.sort_descending, "kl_shuffle");
    }
    if (auto it = j.find("perturbation"); it != j.end()) {
        reject_unknown_keys(*it, {"token_replace_prob", "sentence_shuffle_frac", "seed", "shuffle_mode", "lexicon"},
                            "perturbation");
        read_field(*it, "token_replace_prob", c.perturbation.token_replace_prob, "perturbation");
        read_field(*it, "sentence_shuffle_frac", c.perturbation.sentence_shuffle_frac, "perturbation");
        read_field(*it, "seed", c.perturbation.seed, "perturbation");
        std::string mode(to_string(c.perturbation.shuffle_mode));
        read_field(*it, "shuffle_mode", mode, "perturbation");
        auto parsed = parse_shuffle_mode(mode);
        if (!parsed) throw ConfigError("perturbation.shuffle_mode must be subset-permute or subseq-reverse");
        c.perturbation.shuffle_mode = *parsed;
        read_field(*it, "lexicon", c.lexicon, "perturbation");
    }
    read_field(j, "predictions", c.predictions, "config");
    read_field(j, "out_dir", c.out_dir, "config");
    read_field(j, "skip_tts", c.skip_tts, "config");
    read_field(j, "skip_perturb", c.skip_perturb, "config");
    read_field(j, "workers", c.workers, "config");
    return c;
}

AuditConfig AuditConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return from_json(json::parse(in, nullptr, true, /*ignore_comments=*/true));
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
}

// ---------------------------------------------------------------- pipeline helpers

bool AuditScores::has_flag(const std::string& flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs f(i) for i in [0, n) on up to `workers` threads. If any call throws,
// the exception of the lowest index is rethrown.
template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& f) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(workers, n);
    if (threads <= 1) {
        run();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::pair<double, double> mean_and_sample_std(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

std::string modified_key(const Document& doc, ModificationKind kind) {
    return doc.id + "#" + std::string(to_string(kind));
}

struct TopologyResult {
    std::size_t token_count = 0;
    bool truncated = false;
    std::optional<double> phd;
    std::optional<std::string> phd_exclusion;
    std::optional<TtsSeries> tts;
    std::optional<std::string> tts_exclusion;
};

}  // namespace

// ---------------------------------------------------------------- run_audit

AuditReport run_audit(const AuditConfig& cfg, const std::string& config_text) {
    cfg.validate();
    const auto run_start = Clock::now();
    AuditReport report;
    report.config = cfg.to_json();
    report.config_text = config_text;

    const std::filesystem::path out_dir(cfg.out_dir);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path cache_dir = cfg.cache_dir.empty() ? out_dir / "cache" : std::filesystem::path(cfg.cache_dir);
    auto cache = std::make_shared<EmbeddingCache>(cache_dir);

    // Stage 1: corpus statistics and balanced sample.
    auto t0 = Clock::now();
    const Corpus corpus = load_corpus(cfg.dataset, cfg.split);
    report.dataset = corpus.name();
    for (Label label : kLabels)
        if (corpus.count(label) == 0)
            throw DatasetError("dataset has no " + std::string(to_string(label)) + " documents" +
                               (cfg.split ? " in split " + std::string(to_string(*cfg.split)) : std::string()));
    report.corpus = corpus_stats(corpus);
    Corpus sample;
    try {
        sample = sample_balanced(corpus, cfg.per_class, cfg.seed);
    } catch (const PreconditionError& e) {
        throw DatasetError(e.what());
    }
    report.sampled_per_class = cfg.per_class;
    report.sample = corpus_stats(sample);
    {
        std::ofstream out(out_dir / "sample.jsonl");
        write_corpus(sample, out);
    }
    report.timings["sampling"] = seconds_since(t0);

    const auto& docs = sample.documents();
    std::set<std::string> flags;
    auto exclude = [&](const Document& doc, std::string metric, std::string reason) {
        report.exclusions.push_back({doc.id, doc.label, std::move(metric), std::move(reason)});
    };

    // Stage 2: token embeddings, per-text PHD and TTS.
    t0 = Clock::now();
    EmbeddingProvider token_provider(cfg.token_source, cache);
    std::vector<TopologyResult> topo(docs.size());
    const std::size_t chunk =
        std::max<std::size_t>(cfg.workers, cfg.token_source.batch_size * cfg.token_source.max_parallel_requests);
    for (std::size_t begin = 0; begin < docs.size(); begin += chunk) {
        const std::size_t end = std::min(docs.size(), begin + chunk);
        std::vector<EmbeddingQuery> queries;
        for (std::size_t i = begin; i < end; ++i) queries.push_back({docs[i].id, docs[i].text});
        auto matrices = token_provider.token_embeddings(queries);
        parallel_for(end - begin, cfg.workers, [&](std::size_t k) {
            const Document& doc = docs[begin + k];
            const EmbeddingMatrix& m = matrices[k];
            TopologyResult& r = topo[begin + k];
            r.token_count = m.rows();
            r.truncated = m.truncated();
            if (m.rows() < cfg.phd.min_points) {
                r.phd_exclusion = "too short: " + std::to_string(m.rows()) + " tokens < " +
                                  std::to_string(cfg.phd.min_points);
            } else {
                try {
                    r.phd = phd_estimate(m, cfg.phd, derive_seed(cfg.seed, "phd/" + doc.id)).value;
                } catch (const UndefinedEstimateError& e) {
                    r.phd_exclusion = e.what();
                }
            }
            if (cfg.skip_tts) return;
            if (tts_window_count(m.rows(), cfg.tts_window, cfg.tts_stride) == 0) {
                r.tts_exclusion = "too short for TTS window: " + std::to_string(m.rows()) + " tokens < " +
                                  std::to_string(cfg.tts_window);
                return;
            }
            r.tts = sliding_window_tts(m, cfg.tts_window, cfg.tts_stride, cfg.phd,
                                       derive_seed(cfg.seed, "tts/" + doc.id));
            if (r.tts->defined_values().empty()) r.tts_exclusion = "no window with a defined PHD";
        });
    }

    std::vector<double> token_counts;
    std::map<Label, std::vector<double>> phd_values;
    std::map<Label, std::vector<TtsSeries>> tts_by_class;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto& doc = docs[i];
        const auto& r = topo[i];
        token_counts.push_back(static_cast<double>(r.token_count));
        if (r.truncated) ++report.truncated_embeddings;
        if (r.phd) {
            report.phd.push_back({doc.id, doc.label, r.token_count, *r.phd});
            phd_values[doc.label].push_back(*r.phd);
        } else {
            exclude(doc, "phd", *r.phd_exclusion);
        }
        if (cfg.skip_tts) continue;
        if (r.tts) report.tts.push_back({doc.id, doc.label, *r.tts});
        if (r.tts_exclusion) {
            exclude(doc, "tts", *r.tts_exclusion);
        } else {
            tts_by_class[doc.label].push_back(*r.tts);
        }
    }
    report.median_token_count = median(token_counts);
    if (report.truncated_embeddings > 0) flags.insert("truncated-embeddings");

    for (Label label : kLabels) {
        auto it = phd_values.find(label);
        if (it == phd_values.end()) {
            flags.insert("phd-insufficient-texts:" + std::string(to_string(label)));
            continue;
        }
        auto [mean, sd] = mean_and_sample_std(it->second);
        if (label == Label::Human) {
            report.scores.phd_human_mean = mean;
            report.scores.phd_human_std = sd;
        } else {
            report.scores.phd_machine_mean = mean;
            report.scores.phd_machine_std = sd;
        }
    }

    // KL_TTS.
    if (cfg.skip_tts) {
        flags.insert("tts-skipped");
    } else if (*report.median_token_count < static_cast<double>(cfg.phd.min_points)) {
        flags.insert("short-texts");
    } else if (tts_by_class[Label::Human].empty() || tts_by_class[Label::Machine].empty()) {
        flags.insert("kl_tts-insufficient-windows");
    } else {
        std::vector<double> h_all;
        std::vector<double> m_all;
        for (const auto& s : tts_by_class[Label::Human])
            for (double v : s.defined_values()) h_all.push_back(v);
        for (const auto& s : tts_by_class[Label::Machine])
            for (double v : s.defined_values()) m_all.push_back(v);
        auto [lo, hi] = pooled_range(h_all, m_all);
        const auto hd = tts_distribution(Label::Human, tts_by_class[Label::Human], lo, hi, cfg.kl_bins);
        const auto md = tts_distribution(Label::Machine, tts_by_class[Label::Machine], lo, hi, cfg.kl_bins);
        report.scores.kl_tts = kl_tts_score(hd, md);
    }
    report.timings["topology"] = seconds_since(t0);

    // Stage 3: perturbations and embedding shifts.
    t0 = Clock::now();
    if (cfg.skip_perturb) {
        flags.insert("perturbation-skipped");
    } else {
        std::optional<SynonymLexicon> lexicon;
        if (!cfg.lexicon.empty()) lexicon = load_lexicon(cfg.lexicon);
        else flags.insert("no-lexicon");

        std::vector<ModifiedPair> synonym_pairs(docs.size());
        std::vector<ModifiedPair> shuffle_pairs(docs.size());
        parallel_for(docs.size(), cfg.workers, [&](std::size_t i) {
            if (lexicon) synonym_pairs[i] = synonym_perturb(docs[i], *lexicon, cfg.perturbation);
            shuffle_pairs[i] = shuffle_sentences(docs[i], cfg.perturbation);
        });
        {
            std::ofstream out(out_dir / "modified_pairs.jsonl");
            for (std::size_t i = 0; i < docs.size(); ++i) {
                if (lexicon) out << serialize_modified_pair(synonym_pairs[i]) << '\n';
                out << serialize_modified_pair(shuffle_pairs[i]) << '\n';
            }
        }

        std::vector<EmbeddingQuery> queries;
        for (const auto& doc : docs) queries.push_back({doc.id, doc.text});
        std::vector<std::size_t> synonym_slot(docs.size(), SIZE_MAX);
        std::vector<std::size_t> shuffle_slot(docs.size(), SIZE_MAX);
        for (std::size_t i = 0; i < docs.size(); ++i) {
            if (lexicon && !synonym_pairs[i].skip_reason) {
                synonym_slot[i] = queries.size();
                queries.push_back({modified_key(docs[i], ModificationKind::TokenPerturb), synonym_pairs[i].modified_text});
            }
            shuffle_slot[i] = queries.size();
            queries.push_back({modified_key(docs[i], ModificationKind::SentenceShuffle), shuffle_pairs[i].modified_text});
        }
        EmbeddingProvider pooled_provider(cfg.pooled_source, cache);
        const auto pooled = pooled_provider.pooled_embeddings(queries);
        for (const auto& p : pooled)
            if (p.truncated) flags.insert("truncated-embeddings");

        std::vector<ShiftRecord> token_human, token_machine, shuffle_human, shuffle_machine;
        bool unshuffled = false;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const auto& doc = docs[i];
            const auto& original = pooled[i].vector;
            if (!lexicon) {
                exclude(doc, "delta_shift", "no lexicon configured");
            } else if (synonym_pairs[i].skip_reason) {
                flags.insert("partial-language-coverage");
                exclude(doc, "delta_shift", *synonym_pairs[i].skip_reason);
            } else {
                ShiftRecord rec{doc.id, doc.label, ModificationKind::TokenPerturb,
                                cosine_distance(original, pooled[synonym_slot[i]].vector)};
                report.shifts.push_back(rec);
                (doc.label == Label::Human ? token_human : token_machine).push_back(rec);
            }
            // Unshuffleable texts stay in with their (zero) shift so both classes keep equal size.
            if (shuffle_pairs[i].skip_reason) unshuffled = true;
            ShiftRecord rec{doc.id, doc.label, ModificationKind::SentenceShuffle,
                            cosine_distance(original, pooled[shuffle_slot[i]].vector)};
            report.shifts.push_back(rec);
            (doc.label == Label::Human ? shuffle_human : shuffle_machine).push_back(rec);
        }
        if (unshuffled) flags.insert("unshuffled-texts");

        if (lexicon) {
            if (token_human.empty() || token_machine.empty()) {
                flags.insert("delta_shift-undefined");
            } else {
                try {
                    report.scores.delta_shift = delta_shift(token_human, token_machine);
                } catch (const PreconditionError&) {
                    flags.insert("delta_shift-undefined");
                }
            }
        }
        report.scores.kl_shuffle = kl_shuffle(shuffle_human, shuffle_machine, cfg.kl_shuffle);
    }
    report.timings["perturbation"] = seconds_since(t0);

    if (!cfg.predictions.empty()) report.detectors = import_predictions_and_score(cfg.predictions, sample);

    report.scores.flags.assign(flags.begin(), flags.end());
    report.notes = {
        "lengths count Unicode characters, not tokens",
        "log is the natural logarithm",
        "PHD columns are per-text estimates over the full token cloud, mean +/- sample std across texts",
        "token embeddings exclude special tokens unless the backend was configured otherwise",
        "KL_TTS uses " + std::to_string(cfg.kl_bins.bins) + " equal-width bins over the pooled range with eps smoothing",
        std::string("KL_shuffle pairs shifts ") +
            (cfg.kl_shuffle.sort_descending ? "sorted descending within each class" : "in sample order"),
        "sentence shuffle mode: " + std::string(to_string(cfg.perturbation.shuffle_mode)),
        "Delta_shift is reported signed; |Delta_shift| is listed alongside",
        cfg.split ? "sampled from split " + std::string(to_string(*cfg.split)) : "sampled from the whole file (no split filter)",
    };
    report.timings["total"] = seconds_since(run_start);

    report.accounting = exclusion_accounting(report);
    write_intermediates(report, out_dir / "intermediates.jsonl");
    return report;
}

// ---------------------------------------------------------------- F1 import and accounting

std::vector<DetectorScore> import_predictions_and_score(const std::filesystem::path& path, const Corpus& gold) {
    const auto predictions = load_predictions(path);
    std::map<std::string, std::vector<Prediction>> by_detector;
    for (const auto& p : predictions) by_detector[p.detector].push_back(p);
    if (by_detector.empty()) throw DatasetError("prediction file " + path.string() + " is empty");
    std::vector<DetectorScore> rows;
    for (const auto& [detector, preds] : by_detector) {
        try {
            rows.push_back({detector, preds.size(), macro_f1(preds, gold)});
        } catch (const DatasetError& e) {
            throw DatasetError("detector '" + detector + "': " + e.what());
        }
    }
    return rows;
}

std::map<std::string, MetricAccounting> exclusion_accounting(const AuditReport& report) {
    std::map<std::string, MetricAccounting> acc;
    auto bump_included = [&](const std::string& metric, Label label) {
        auto& a = acc[metric];
        (label == Label::Human ? a.included_human : a.included_machine)++;
    };
    for (const auto& p : report.phd) bump_included("phd", p.label);
    for (const auto& t : report.tts)
        if (!t.series.defined_values().empty()) bump_included("tts", t.label);
    for (const auto& s : report.shifts)
        bump_included(s.kind == ModificationKind::TokenPerturb ? "delta_shift" : "kl_shuffle", s.label);
    for (const auto& e : report.exclusions) {
        auto& a = acc[e.metric];
        (e.label == Label::Human ? a.excluded_human : a.excluded_machine)++;
    }
    return acc;
}

}  // namespace mgtaudit
