#include "mgtaudit/audit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mgtaudit/errors.hpp"

namespace mgtaudit {

using nlohmann::json;

namespace {

constexpr const char* kMissing = "-";

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s(buf);
    if (s == "-0.000" || s == "-0.00" || s == "-0.0") s.erase(0, 1);
    return s;
}

std::string fixed(const std::optional<double>& v, int decimals) {
    return v ? fixed(*v, decimals) : kMissing;
}

// Round-trippable form for CSV cells.
std::string exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

std::optional<double> read_optional(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

json stats_to_json(const CorpusStats& s) {
    return {{"total_count", s.total_count},
            {"count_generated", s.count_generated},
            {"count_human", s.count_human},
            {"mean_length_generated", optional_number(s.mean_length_generated)},
            {"mean_length_human", optional_number(s.mean_length_human)},
            {"median_length_generated", optional_number(s.median_length_generated)},
            {"median_length_human", optional_number(s.median_length_human)}};
}

CorpusStats stats_from_json(const json& j) {
    CorpusStats s;
    s.total_count = j.at("total_count").get<std::size_t>();
    s.count_generated = j.at("count_generated").get<std::size_t>();
    s.count_human = j.at("count_human").get<std::size_t>();
    s.mean_length_generated = read_optional(j, "mean_length_generated");
    s.mean_length_human = read_optional(j, "mean_length_human");
    s.median_length_generated = read_optional(j, "median_length_generated");
    s.median_length_human = read_optional(j, "median_length_human");
    return s;
}

Label label_from_json(const json& j) {
    auto label = parse_label(j.get<std::string>());
    if (!label) throw DatasetError("unknown label '" + j.get<std::string>() + "' in report");
    return *label;
}

std::string phd_cell(const std::optional<double>& mean, const std::optional<double>& sd) {
    if (!mean) return kMissing;
    return fixed(*mean, 2) + " ± " + fixed(sd.value_or(0.0), 2);
}

void write_file(const std::filesystem::path& file, const std::string& content) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + file.string());
    out << content;
    if (!out) throw Error("failed writing " + file.string());
}

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view s) {
    if (s == "json") return ReportFormat::Json;
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    return std::nullopt;
}

std::map<std::string, std::string> display_cells(const AuditReport& r) {
    std::map<std::string, std::string> d;
    d["count_generated"] = std::to_string(r.corpus.count_generated);
    d["count_human"] = std::to_string(r.corpus.count_human);
    d["mean_length_generated"] = fixed(r.corpus.mean_length_generated, 1);
    d["mean_length_human"] = fixed(r.corpus.mean_length_human, 1);
    d["median_length_generated"] = fixed(r.corpus.median_length_generated, 1);
    d["median_length_human"] = fixed(r.corpus.median_length_human, 1);
    d["sampled_per_class"] = std::to_string(r.sampled_per_class);
    d["kl_tts"] = fixed(r.scores.kl_tts, 3);
    d["phd_human"] = phd_cell(r.scores.phd_human_mean, r.scores.phd_human_std);
    d["phd_machine"] = phd_cell(r.scores.phd_machine_mean, r.scores.phd_machine_std);
    d["delta_shift"] = fixed(r.scores.delta_shift, 3);
    d["abs_delta_shift"] =
        r.scores.delta_shift ? fixed(std::fabs(*r.scores.delta_shift), 3) : std::string(kMissing);
    d["kl_shuffle"] = fixed(r.scores.kl_shuffle, 3);
    d["median_token_count"] = fixed(r.median_token_count, 1);
    d["truncated_embeddings"] = std::to_string(r.truncated_embeddings);
    for (const auto& det : r.detectors) d["macro_f1/" + det.detector] = fixed(det.macro_f1, 3);
    for (const auto& [metric, a] : r.accounting) {
        d["included_human/" + metric] = std::to_string(a.included_human);
        d["included_machine/" + metric] = std::to_string(a.included_machine);
        d["excluded_human/" + metric] = std::to_string(a.excluded_human);
        d["excluded_machine/" + metric] = std::to_string(a.excluded_machine);
    }
    return d;
}

json report_to_json(const AuditReport& r) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["tool_version"] = r.tool_version;
    j["dataset"] = r.dataset;
    j["config"] = r.config;
    j["config_text"] = r.config_text;
    j["sampled_per_class"] = r.sampled_per_class;
    j["corpus_stats"] = stats_to_json(r.corpus);
    j["sample_stats"] = stats_to_json(r.sample);
    j["scores"] = {
        {"kl_tts", optional_number(r.scores.kl_tts)},
        {"phd",
         {{"human", {{"mean", optional_number(r.scores.phd_human_mean)}, {"std", optional_number(r.scores.phd_human_std)}}},
          {"machine",
           {{"mean", optional_number(r.scores.phd_machine_mean)}, {"std", optional_number(r.scores.phd_machine_std)}}}}},
        {"delta_shift", optional_number(r.scores.delta_shift)},
        {"abs_delta_shift",
         r.scores.delta_shift ? json(std::fabs(*r.scores.delta_shift)) : json(nullptr)},
        {"kl_shuffle", optional_number(r.scores.kl_shuffle)},
        {"flags", r.scores.flags}};
    j["detectors"] = json::array();
    for (const auto& d : r.detectors)
        j["detectors"].push_back({{"detector", d.detector}, {"predictions", d.predictions}, {"macro_f1", d.macro_f1}});
    j["exclusions"] = json::array();
    for (const auto& e : r.exclusions)
        j["exclusions"].push_back({{"id", e.doc_id},
                                   {"label", std::string(to_string(e.label))},
                                   {"metric", e.metric},
                                   {"reason", e.reason}});
    j["accounting"] = json::object();
    for (const auto& [metric, a] : r.accounting)
        j["accounting"][metric] = {{"included_human", a.included_human},
                                   {"included_machine", a.included_machine},
                                   {"excluded_human", a.excluded_human},
                                   {"excluded_machine", a.excluded_machine}};
    j["median_token_count"] = optional_number(r.median_token_count);
    j["truncated_embeddings"] = r.truncated_embeddings;
    j["notes"] = r.notes;
    j["display"] = display_cells(r);
    j["timings"] = r.timings;
    return j;
}

AuditReport report_from_json(const json& j) {
    try {
        const auto version = j.at("schema_version").get<std::string>();
        if (version != kReportSchemaVersion)
            throw DatasetError("unsupported report schema_version " + version);
        AuditReport r;
        r.tool_version = j.at("tool_version").get<std::string>();
        r.dataset = j.at("dataset").get<std::string>();
        r.config = j.at("config");
        r.config_text = j.value("config_text", std::string());
        r.sampled_per_class = j.at("sampled_per_class").get<std::size_t>();
        r.corpus = stats_from_json(j.at("corpus_stats"));
        r.sample = stats_from_json(j.at("sample_stats"));
        const auto& s = j.at("scores");
        r.scores.kl_tts = read_optional(s, "kl_tts");
        r.scores.phd_human_mean = read_optional(s.at("phd").at("human"), "mean");
        r.scores.phd_human_std = read_optional(s.at("phd").at("human"), "std");
        r.scores.phd_machine_mean = read_optional(s.at("phd").at("machine"), "mean");
        r.scores.phd_machine_std = read_optional(s.at("phd").at("machine"), "std");
        r.scores.delta_shift = read_optional(s, "delta_shift");
        r.scores.kl_shuffle = read_optional(s, "kl_shuffle");
        r.scores.flags = s.at("flags").get<std::vector<std::string>>();
        for (const auto& d : j.at("detectors"))
            r.detectors.push_back({d.at("detector").get<std::string>(), d.at("predictions").get<std::size_t>(),
                                   d.at("macro_f1").get<double>()});
        for (const auto& e : j.at("exclusions"))
            r.exclusions.push_back({e.at("id").get<std::string>(), label_from_json(e.at("label")),
                                    e.at("metric").get<std::string>(), e.at("reason").get<std::string>()});
        for (const auto& [metric, a] : j.at("accounting").items())
            r.accounting[metric] = {a.at("included_human").get<std::size_t>(), a.at("included_machine").get<std::size_t>(),
                                    a.at("excluded_human").get<std::size_t>(), a.at("excluded_machine").get<std::size_t>()};
        r.median_token_count = read_optional(j, "median_token_count");
        r.truncated_embeddings = j.at("truncated_embeddings").get<std::size_t>();
        r.notes = j.at("notes").get<std::vector<std::string>>();
        if (j.contains("timings")) r.timings = j["timings"].get<std::map<std::string, double>>();
        return r;
    } catch (const json::exception& e) {
        throw DatasetError(std::string("malformed report JSON: ") + e.what());
    }
}

std::string render_markdown(const AuditReport& r) {
    const auto d = display_cells(r);
    std::ostringstream md;
    md << "# Audit report: " << r.dataset << "\n\n";
    md << "Tool version " << r.tool_version << ", report schema " << kReportSchemaVersion << ".\n\n";

    md << "## Corpus statistics\n\n";
    md << "| Dataset | Num. of Texts G | Num. of Texts H | Average Length G | Average Length H | Median Length G | "
          "Median Length H |\n";
    md << "|---|---|---|---|---|---|---|\n";
    md << "| " << r.dataset << " | " << d.at("count_generated") << " | " << d.at("count_human") << " | "
       << d.at("mean_length_generated") << " | " << d.at("mean_length_human") << " | "
       << d.at("median_length_generated") << " | " << d.at("median_length_human") << " |\n\n";

    md << "## Dataset statistics\n\n";
    md << "Balanced sample: " << d.at("sampled_per_class") << " texts per class; median token count "
       << d.at("median_token_count") << ".\n\n";
    md << "| Dataset | KL_TTS | PHD_human | PHD_machine | Δ_shift | abs(Δ_shift) | KL_shuffle |\n";
    md << "|---|---|---|---|---|---|---|\n";
    md << "| " << r.dataset << " | " << d.at("kl_tts") << " | " << d.at("phd_human") << " | " << d.at("phd_machine")
       << " | " << d.at("delta_shift") << " | " << d.at("abs_delta_shift") << " | " << d.at("kl_shuffle") << " |\n\n";

    if (!r.detectors.empty()) {
        md << "## Detector macro-F1\n\n| Detector | Macro-F1 |\n|---|---|\n";
        for (const auto& det : r.detectors)
            md << "| " << det.detector << " | " << d.at("macro_f1/" + det.detector) << " |\n";
        md << "\n";
    }

    md << "## Flags\n\n";
    if (r.scores.flags.empty()) md << "None.\n";
    for (const auto& f : r.scores.flags) md << "- `" << f << "`\n";
    md << "\n";

    md << "## Exclusions\n\n";
    md << "| Metric | Included H | Included G | Excluded H | Excluded G |\n|---|---|---|---|---|\n";
    for (const auto& [metric, a] : r.accounting) {
        (void)a;
        md << "| " << metric << " | " << d.at("included_human/" + metric) << " | "
           << d.at("included_machine/" + metric) << " | " << d.at("excluded_human/" + metric) << " | "
           << d.at("excluded_machine/" + metric) << " |\n";
    }
    md << "\n";
    if (!r.exclusions.empty()) {
        md << "| Document | Label | Metric | Reason |\n|---|---|---|---|\n";
        for (const auto& e : r.exclusions)
            md << "| " << e.doc_id << " | " << to_string(e.label) << " | " << e.metric << " | " << e.reason << " |\n";
        md << "\n";
    }
    if (r.truncated_embeddings > 0)
        md << d.at("truncated_embeddings") << " texts were truncated at the encoder's maximum length.\n\n";

    md << "## Notes\n\n";
    for (const auto& n : r.notes) md << "- " << n << "\n";
    return md.str();
}

void emit_report(const AuditReport& report, ReportFormat format, const std::filesystem::path& file) {
    if (format == ReportFormat::Json) write_file(file, report_to_json(report).dump(2) + "\n");
    else write_file(file, render_markdown(report));
}

void write_intermediates(const AuditReport& r, const std::filesystem::path& file) {
    std::ostringstream out;
    for (const auto& p : r.phd)
        out << json{{"type", "phd"},
                    {"id", p.doc_id},
                    {"label", std::string(to_string(p.label))},
                    {"token_count", p.token_count},
                    {"phd", p.phd}}
                   .dump()
            << '\n';
    for (const auto& t : r.tts) {
        json values = json::array();
        for (const auto& v : t.series.values) values.push_back(optional_number(v));
        out << json{{"type", "tts"},
                    {"id", t.doc_id},
                    {"label", std::string(to_string(t.label))},
                    {"window", t.series.window},
                    {"stride", t.series.stride},
                    {"values", values}}
                   .dump()
            << '\n';
    }
    for (const auto& s : r.shifts)
        out << json{{"type", "shift"},
                    {"id", s.doc_id},
                    {"label", std::string(to_string(s.label))},
                    {"kind", std::string(to_string(s.kind))},
                    {"shift", s.shift}}
                   .dump()
            << '\n';
    write_file(file, out.str());
}

void read_intermediates(AuditReport& r, const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DatasetError("cannot open intermediates file " + file.string());
    r.phd.clear();
    r.tts.clear();
    r.shifts.clear();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            const auto type = j.at("type").get<std::string>();
            const auto id = j.at("id").get<std::string>();
            const Label label = label_from_json(j.at("label"));
            if (type == "phd") {
                r.phd.push_back({id, label, j.at("token_count").get<std::size_t>(), j.at("phd").get<double>()});
            } else if (type == "tts") {
                TtsSeries s;
                s.window = j.at("window").get<std::size_t>();
                s.stride = j.at("stride").get<std::size_t>();
                for (const auto& v : j.at("values"))
                    s.values.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
                r.tts.push_back({id, label, std::move(s)});
            } else if (type == "shift") {
                auto kind = parse_modification_kind(j.at("kind").get<std::string>());
                if (!kind) throw DatasetError("unknown modification kind");
                r.shifts.push_back({id, label, *kind, j.at("shift").get<double>()});
            } else {
                throw DatasetError("unknown record type '" + type + "'");
            }
        } catch (const json::exception& e) {
            throw DatasetError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const DatasetError& e) {
            throw DatasetError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

PlotFiles emit_plot_data(const AuditReport& r, const std::filesystem::path& dir) {
    PlotFiles files{dir / "tts.csv", dir / "phd.csv", dir / "shifts.csv"};
    const std::string ds = csv_cell(r.dataset);

    std::ostringstream tts;
    tts << "dataset,doc_id,label,window_index,phd_value\n";
    for (const auto& t : r.tts)
        for (std::size_t w = 0; w < t.series.values.size(); ++w)
            if (t.series.values[w])
                tts << ds << ',' << csv_cell(t.doc_id) << ',' << to_string(t.label) << ',' << w << ','
                    << exact(*t.series.values[w]) << '\n';
    write_file(files.tts, tts.str());

    std::ostringstream phd;
    phd << "dataset,doc_id,label,token_count,phd\n";
    for (const auto& p : r.phd)
        phd << ds << ',' << csv_cell(p.doc_id) << ',' << to_string(p.label) << ',' << p.token_count << ','
            << exact(p.phd) << '\n';
    write_file(files.phd, phd.str());

    std::ostringstream shifts;
    shifts << "dataset,doc_id,label,kind,shift\n";
    for (const auto& s : r.shifts)
        shifts << ds << ',' << csv_cell(s.doc_id) << ',' << to_string(s.label) << ',' << to_string(s.kind) << ','
               << exact(s.shift) << '\n';
    write_file(files.shifts, shifts.str());
    return files;
}

std::string json_without_timings(const json& report_json) {
    json copy = report_json;
    copy.erase("timings");
    return copy.dump(2);
}

}  // namespace mgtaudit
