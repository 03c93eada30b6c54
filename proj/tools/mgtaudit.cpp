// Command-line front end. Exit codes: 0 ok, 1 internal, 2 config, 3 backend, 4 dataset.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgtaudit/audit.hpp"
#include "mgtaudit/errors.hpp"
#include "mgtaudit/rng.hpp"

using namespace mgtaudit;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::optional<std::string> dataset;
    std::optional<std::string> config;
    std::optional<std::string> split;
    std::optional<std::size_t> per_class;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> embed_endpoint;
    std::optional<std::string> embed_file;
    std::optional<std::string> out;
    std::string format = "json";
    bool skip_tts = false;
    bool skip_perturb = false;
    std::optional<std::string> shuffle_mode;
    std::optional<std::string> lexicon;
    std::optional<std::string> predictions;
    std::optional<std::size_t> workers;
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<Split> split_flag(const std::optional<std::string>& s) {
    if (!s) return std::nullopt;
    auto split = parse_split(*s);
    if (!split) throw ConfigError("--split must be train, dev or test");
    return split;
}

// Config file first, then flags, then the endpoint environment variable.
AuditConfig resolve_config(const CommonFlags& f, std::string& config_text) {
    AuditConfig cfg;
    if (f.config) {
        config_text = read_text(*f.config);
        try {
            cfg = AuditConfig::from_json(json::parse(config_text, nullptr, true, true));
        } catch (const json::parse_error& e) {
            throw ConfigError("config file " + *f.config + " is not valid JSON: " + e.what());
        }
    }
    if (f.dataset) cfg.dataset = *f.dataset;
    if (f.split) cfg.split = split_flag(f.split);
    if (f.per_class) cfg.per_class = *f.per_class;
    if (f.seed) {
        cfg.seed = *f.seed;
        cfg.perturbation.seed = *f.seed;
    }
    if (f.embed_file) {
        for (auto* s : {&cfg.token_source, &cfg.pooled_source}) {
            s->kind = SourceKind::PrecomputedFile;
            s->location = *f.embed_file;
        }
    }
    std::optional<std::string> endpoint = f.embed_endpoint;
    if (const char* env = std::getenv(kEndpointEnvVar); env && *env) endpoint = env;
    if (endpoint) {
        for (auto* s : {&cfg.token_source, &cfg.pooled_source}) {
            s->kind = SourceKind::HttpService;
            s->location = *endpoint;
        }
    }
    if (f.out) cfg.out_dir = *f.out;
    if (f.skip_tts) cfg.skip_tts = true;
    if (f.skip_perturb) cfg.skip_perturb = true;
    if (f.shuffle_mode) {
        auto mode = parse_shuffle_mode(*f.shuffle_mode);
        if (!mode) throw ConfigError("--shuffle-mode must be subset-permute or subseq-reverse");
        cfg.perturbation.shuffle_mode = *mode;
    }
    if (f.lexicon) cfg.lexicon = *f.lexicon;
    if (f.predictions) cfg.predictions = *f.predictions;
    if (f.workers) cfg.workers = *f.workers;
    return cfg;
}

ReportFormat format_flag(const std::string& s) {
    auto fmt = parse_report_format(s);
    if (!fmt) throw ConfigError("--format must be json or markdown");
    return *fmt;
}

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--dataset", f.dataset, "Corpus JSONL file");
    cmd->add_option("--config", f.config, "JSON config file");
    cmd->add_option("--split", f.split, "Only use documents of this split (train|dev|test)");
    cmd->add_option("--per-class", f.per_class, "Documents sampled per class");
    cmd->add_option("--seed", f.seed, "Run seed");
    cmd->add_option("--embed-endpoint", f.embed_endpoint, "Embedding service base URL");
    cmd->add_option("--embed-file", f.embed_file, "Precomputed embeddings JSONL");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--format", f.format, "Report format printed to stdout (json|markdown)");
    cmd->add_flag("--skip-tts", f.skip_tts, "Skip sliding-window TTS and KL_TTS");
    cmd->add_flag("--skip-perturb", f.skip_perturb, "Skip perturbation metrics");
    cmd->add_option("--shuffle-mode", f.shuffle_mode, "subset-permute|subseq-reverse");
    cmd->add_option("--lexicon", f.lexicon, "Synonym lexicon JSONL");
    cmd->add_option("--predictions", f.predictions, "Detector predictions JSONL for macro-F1");
    cmd->add_option("--workers", f.workers, "Worker threads");
}

int cmd_stats(const CommonFlags& f) {
    if (!f.dataset) throw ConfigError("--dataset is required");
    const Corpus corpus = load_corpus(*f.dataset, split_flag(f.split));
    AuditReport r;
    r.dataset = corpus.name();
    r.corpus = corpus_stats(corpus);
    const auto d = display_cells(r);
    if (format_flag(f.format) == ReportFormat::Json) {
        json j = {{"dataset", r.dataset},
                  {"count_generated", r.corpus.count_generated},
                  {"count_human", r.corpus.count_human},
                  {"mean_length_generated", r.corpus.mean_length_generated.value_or(NAN)},
                  {"mean_length_human", r.corpus.mean_length_human.value_or(NAN)},
                  {"median_length_generated", r.corpus.median_length_generated.value_or(NAN)},
                  {"median_length_human", r.corpus.median_length_human.value_or(NAN)}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "| Dataset | Num. of Texts G | Num. of Texts H | Average Length G | Average Length H | "
                     "Median Length G | Median Length H |\n|---|---|---|---|---|---|---|\n"
                  << "| " << r.dataset << " | " << d.at("count_generated") << " | " << d.at("count_human") << " | "
                  << d.at("mean_length_generated") << " | " << d.at("mean_length_human") << " | "
                  << d.at("median_length_generated") << " | " << d.at("median_length_human") << " |\n";
    }
    return 0;
}

int cmd_audit(const CommonFlags& f) {
    std::string config_text;
    const AuditConfig cfg = resolve_config(f, config_text);
    const auto fmt = format_flag(f.format);
    const AuditReport report = run_audit(cfg, config_text);
    const std::filesystem::path out(cfg.out_dir);
    emit_report(report, ReportFormat::Json, out / "report.json");
    emit_report(report, ReportFormat::Markdown, out / "report.md");
    emit_plot_data(report, out);
    std::cout << (fmt == ReportFormat::Json ? report_to_json(report).dump(2) + "\n" : render_markdown(report));
    return 0;
}

int cmd_phd(const CommonFlags& f, const std::vector<std::string>& ids, const std::optional<std::string>& model) {
    if (!f.dataset) throw ConfigError("--dataset is required");
    if (!f.embed_file && !f.embed_endpoint && !std::getenv(kEndpointEnvVar))
        throw ConfigError("--embed-file or --embed-endpoint is required");
    std::string unused;
    AuditConfig cfg = resolve_config(f, unused);
    if (model) cfg.token_source.model_id = *model;
    const Corpus corpus = load_corpus(cfg.dataset, cfg.split);
    EmbeddingProvider provider(cfg.token_source, nullptr);
    std::vector<const Document*> docs;
    if (ids.empty()) {
        for (const auto& d : corpus.documents()) docs.push_back(&d);
    } else {
        for (const auto& id : ids) {
            const Document* d = corpus.find(id);
            if (!d) throw DatasetError("no document with id '" + id + "'");
            docs.push_back(d);
        }
    }
    for (const Document* d : docs) {
        const auto m = provider.get_token_embeddings(*d);
        json row = {{"id", d->id}, {"label", std::string(to_string(d->label))}, {"token_count", m.rows()}};
        try {
            if (m.rows() < cfg.phd.min_points) throw PreconditionError("too short");
            row["phd"] = phd_estimate(m, cfg.phd, derive_seed(cfg.seed, "phd/" + d->id)).value;
        } catch (const Error& e) {
            row["phd"] = nullptr;
            row["reason"] = e.what();
        }
        std::cout << row.dump() << "\n";
    }
    return 0;
}

int cmd_perturb(const CommonFlags& f, const std::string& kind_name) {
    if (!f.dataset) throw ConfigError("--dataset is required");
    std::string unused;
    const AuditConfig cfg = resolve_config(f, unused);
    cfg.perturbation.validate();
    auto kind = parse_modification_kind(kind_name);
    if (!kind) throw ConfigError("--kind must be token-perturb or sentence-shuffle");
    std::optional<SynonymLexicon> lexicon;
    if (*kind == ModificationKind::TokenPerturb) {
        if (cfg.lexicon.empty()) throw ConfigError("--lexicon is required for token-perturb");
        lexicon = load_lexicon(cfg.lexicon);
    }
    const Corpus corpus = load_corpus(cfg.dataset, cfg.split);
    for (const auto& d : corpus.documents()) {
        const auto pair = lexicon ? synonym_perturb(d, *lexicon, cfg.perturbation) : shuffle_sentences(d, cfg.perturbation);
        std::cout << serialize_modified_pair(pair) << "\n";
    }
    return 0;
}

int cmd_f1(const CommonFlags& f) {
    if (!f.dataset || !f.predictions) throw ConfigError("--dataset and --predictions are required");
    const Corpus gold = load_corpus(*f.dataset, split_flag(f.split));
    for (const auto& row : import_predictions_and_score(*f.predictions, gold))
        std::cout << json{{"detector", row.detector}, {"predictions", row.predictions}, {"macro_f1", row.macro_f1}}.dump()
                  << "\n";
    return 0;
}

int cmd_export_plots(const std::string& report_dir, const std::optional<std::string>& out) {
    const std::filesystem::path dir(report_dir);
    std::ifstream in(dir / "report.json");
    if (!in) throw DatasetError("no report.json in " + report_dir);
    AuditReport report;
    try {
        report = report_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw DatasetError(std::string("report.json is not valid JSON: ") + e.what());
    }
    read_intermediates(report, dir / "intermediates.jsonl");
    const auto files = emit_plot_data(report, out ? std::filesystem::path(*out) : dir);
    std::cout << files.tts.string() << "\n" << files.phd.string() << "\n" << files.shifts.string() << "\n";
    return 0;
}

int cmd_build_lexicon(const std::string& wordnet_dir, const std::string& out, const std::string& source_id) {
    const auto lexicon = lexicon_from_wordnet(wordnet_dir, source_id);
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write " + out);
    write_lexicon(lexicon, file);
    std::cerr << "wrote " << lexicon.size() << " entries to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audit machine-generated-text detection corpora"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    CommonFlags flags;
    auto* stats = app.add_subcommand("stats", "Corpus statistics (counts, mean and median lengths)");
    add_common(stats, flags);
    auto* audit = app.add_subcommand("audit", "Full audit: sample, embed, perturb, score, report");
    add_common(audit, flags);

    std::vector<std::string> phd_ids;
    std::optional<std::string> phd_model;
    auto* phd = app.add_subcommand("phd", "Per-text PHD for documents of a corpus");
    add_common(phd, flags);
    phd->add_option("--id", phd_ids, "Document id (repeatable; default all)");
    phd->add_option("--model", phd_model, "Token-embedding model id (default: from config)");

    std::string perturb_kind = "sentence-shuffle";
    auto* perturb = app.add_subcommand("perturb", "Write modified texts as JSONL");
    add_common(perturb, flags);
    perturb->add_option("--kind", perturb_kind, "token-perturb|sentence-shuffle");

    auto* f1 = app.add_subcommand("f1", "Macro-F1 of detector predictions");
    add_common(f1, flags);

    std::string report_dir;
    std::optional<std::string> plots_out;
    auto* plots = app.add_subcommand("export-plots", "Regenerate plot CSVs from an audit output directory");
    plots->add_option("--report-dir", report_dir, "Audit output directory")->required();
    plots->add_option("--out", plots_out, "Directory for the CSVs (default: report dir)");

    std::string wordnet_dir;
    std::string lexicon_out;
    std::string lexicon_source = "wordnet-3.0";
    auto* lex = app.add_subcommand("build-lexicon", "Convert WordNet data files into a synonym lexicon");
    lex->add_option("--wordnet", wordnet_dir, "Directory with data.noun, data.verb, data.adj, data.adv")->required();
    lex->add_option("--out", lexicon_out, "Lexicon JSONL output")->required();
    lex->add_option("--source-id", lexicon_source, "Source id recorded in the lexicon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*stats) return cmd_stats(flags);
        if (*audit) return cmd_audit(flags);
        if (*phd) return cmd_phd(flags, phd_ids, phd_model);
        if (*perturb) return cmd_perturb(flags, perturb_kind);
        if (*f1) return cmd_f1(flags);
        if (*plots) return cmd_export_plots(report_dir, plots_out);
        if (*lex) return cmd_build_lexicon(wordnet_dir, lexicon_out, lexicon_source);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
