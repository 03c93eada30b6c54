#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgtaudit/corpus.hpp"
#include "mgtaudit/divergence.hpp"
#include "mgtaudit/embedding.hpp"
#include "mgtaudit/perturbation.hpp"
#include "mgtaudit/topology.hpp"

namespace mgtaudit {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchemaVersion = "1.0";
inline constexpr const char* kEndpointEnvVar = "MGTAUDIT_EMBED_ENDPOINT";

struct AuditConfig {
    std::string dataset;
    std::optional<Split> split;
    std::size_t per_class = 500;
    std::uint64_t seed = 0;

    EmbeddingSource token_source{SourceKind::PrecomputedFile, "", "roberta-base", EmbeddingMode::Tokens};
    EmbeddingSource pooled_source{SourceKind::PrecomputedFile, "", "intfloat/multilingual-e5-large",
                                  EmbeddingMode::Pooled};
    std::string cache_dir;  // empty: <out_dir>/cache

    PhdParams phd;
    std::size_t tts_window = 64;
    std::size_t tts_stride = 16;
    HistogramSpec kl_bins;
    KlShuffleOptions kl_shuffle;

    PerturbationConfig perturbation;
    std::string lexicon;
    std::string predictions;  // optional detector predictions for macro-F1

    std::string out_dir = "audit-out";
    bool skip_tts = false;
    bool skip_perturb = false;
    std::size_t workers = 4;

    // Throws ConfigError.
    void validate() const;
    nlohmann::json to_json() const;
    // Missing keys keep their defaults; unknown keys are rejected.
    static AuditConfig from_json(const nlohmann::json& j);
    static AuditConfig load(const std::filesystem::path& path);
};

struct ExclusionRecord {
    std::string doc_id;
    Label label = Label::Human;
    std::string metric;  // "phd", "tts", "delta_shift", ...
    std::string reason;
};

struct DocumentPhd {
    std::string doc_id;
    Label label = Label::Human;
    std::size_t token_count = 0;
    double phd = 0.0;
};

struct DocumentTts {
    std::string doc_id;
    Label label = Label::Human;
    TtsSeries series;
};

struct AuditScores {
    std::optional<double> kl_tts;
    std::optional<double> phd_human_mean;
    std::optional<double> phd_human_std;
    std::optional<double> phd_machine_mean;
    std::optional<double> phd_machine_std;
    std::optional<double> delta_shift;
    std::optional<double> kl_shuffle;
    std::vector<std::string> flags;

    bool has_flag(const std::string& flag) const;
};

struct DetectorScore {
    std::string detector;
    std::size_t predictions = 0;
    double macro_f1 = 0.0;
};

// Per-metric included/excluded document counts by class.
struct MetricAccounting {
    std::size_t included_human = 0;
    std::size_t included_machine = 0;
    std::size_t excluded_human = 0;
    std::size_t excluded_machine = 0;
};

struct AuditReport {
    std::string dataset;
    nlohmann::json config;  // AuditConfig::to_json snapshot
    std::string config_text;  // config file verbatim, when one was given
    CorpusStats corpus;  // whole (split-filtered) dataset
    CorpusStats sample;  // balanced sample
    std::size_t sampled_per_class = 0;
    AuditScores scores;
    std::vector<DetectorScore> detectors;
    std::vector<ExclusionRecord> exclusions;
    std::map<std::string, MetricAccounting> accounting;  // exclusion_accounting at audit time
    std::vector<std::string> notes;  // interpretation choices recorded with the numbers
    std::size_t truncated_embeddings = 0;
    std::string tool_version = kToolVersion;
    std::map<std::string, double> timings;  // seconds per stage

    // Intermediates, persisted next to the report.
    std::vector<DocumentPhd> phd;
    std::vector<DocumentTts> tts;
    std::vector<ShiftRecord> shifts;
    std::optional<double> median_token_count;  // over the balanced sample
};

// Runs stats, sampling, PHD/TTS, KL_TTS, perturbations and shift metrics.
// Writes intermediates into cfg.out_dir.
AuditReport run_audit(const AuditConfig& cfg, const std::string& config_text = {});

// Per-detector macro-F1 over `gold`; rows sorted by detector id.
std::vector<DetectorScore> import_predictions_and_score(const std::filesystem::path& path, const Corpus& gold);

// Recomputed from the intermediates and the exclusion ledger.
std::map<std::string, MetricAccounting> exclusion_accounting(const AuditReport& report);

// ---- emission (report.cpp)

enum class ReportFormat { Json, Markdown };
std::optional<ReportFormat> parse_report_format(std::string_view s);

nlohmann::json report_to_json(const AuditReport& report);
AuditReport report_from_json(const nlohmann::json& j);
std::string render_markdown(const AuditReport& report);
// Cell strings shared by the markdown table and the JSON "display" block.
std::map<std::string, std::string> display_cells(const AuditReport& report);

void emit_report(const AuditReport& report, ReportFormat format, const std::filesystem::path& file);

// Intermediates as JSONL: one {"type": "phd"|"tts"|"shift", ...} per line.
void write_intermediates(const AuditReport& report, const std::filesystem::path& file);
void read_intermediates(AuditReport& report, const std::filesystem::path& file);

struct PlotFiles {
    std::filesystem::path tts;
    std::filesystem::path phd;
    std::filesystem::path shifts;
};
// tts.csv (dataset,doc_id,label,window_index,phd_value), phd.csv and shifts.csv.
PlotFiles emit_plot_data(const AuditReport& report, const std::filesystem::path& dir);

std::string json_without_timings(const nlohmann::json& report_json);

}  // namespace mgtaudit
