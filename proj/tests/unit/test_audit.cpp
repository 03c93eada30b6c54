#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "golden.hpp"
#include "mgtaudit/audit.hpp"
#include "mgtaudit/errors.hpp"
#include "synthetic.hpp"
#include "tempdir.hpp"

using namespace mgtaudit;
using mgtaudit::testing::TempDir;

namespace {

const std::string kSource = MGTAUDIT_SOURCE_DIR;
const std::string kLexicon = kSource + "/data/wordnet-3.0-synonyms.jsonl";

AuditConfig fixture_config(const TempDir& dir, const std::string& corpus_file, std::size_t per_class) {
    AuditConfig cfg;
    cfg.dataset = kSource + "/tests/fixtures/" + corpus_file;
    cfg.per_class = per_class;
    cfg.seed = 17;
    cfg.lexicon = kLexicon;
    cfg.token_source.location = (dir / "embeddings.jsonl").string();
    cfg.pooled_source.location = cfg.token_source.location;
    cfg.out_dir = (dir / "out").string();
    cfg.workers = 2;
    if (!std::filesystem::exists(cfg.token_source.location)) {
        std::optional<SynonymLexicon> lex = load_lexicon(kLexicon);
        mgtaudit::testing::write_synthetic_embeddings(load_corpus(cfg.dataset), cfg, lex, 5,
                                                      cfg.token_source.location);
    }
    return cfg;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

// One audit of the natural fixture shared by the report tests.
class NaturalAudit : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new TempDir;
        cfg_ = new AuditConfig(fixture_config(*dir_, "natural.jsonl", 30));
        report_ = new AuditReport(run_audit(*cfg_));
    }
    static void TearDownTestSuite() {
        delete report_;
        delete cfg_;
        delete dir_;
    }
    static TempDir* dir_;
    static AuditConfig* cfg_;
    static AuditReport* report_;
};

TempDir* NaturalAudit::dir_ = nullptr;
AuditConfig* NaturalAudit::cfg_ = nullptr;
AuditReport* NaturalAudit::report_ = nullptr;

}  // namespace

TEST(AuditConfig, JsonRoundTrip) {
    AuditConfig cfg;
    cfg.dataset = "x.jsonl";
    cfg.split = Split::Test;
    cfg.per_class = 12;
    cfg.seed = 99;
    cfg.phd.alpha = 1.5;
    cfg.phd.schedule = {50, 60, 70};
    cfg.tts_window = 80;
    cfg.kl_bins.bins = 10;
    cfg.kl_shuffle.sort_descending = false;
    cfg.perturbation.shuffle_mode = ShuffleMode::SubseqReverse;
    cfg.perturbation.seed = 4;
    cfg.token_source = {SourceKind::HttpService, "http://localhost:9000", "roberta-base", EmbeddingMode::Tokens};
    cfg.token_source.batch_size = 8;
    const auto j = cfg.to_json();
    EXPECT_EQ(AuditConfig::from_json(j).to_json(), j);
    EXPECT_EQ(AuditConfig::from_json(j).perturbation.shuffle_mode, ShuffleMode::SubseqReverse);
}

TEST(AuditConfig, PartialJsonKeepsDefaults) {
    const auto cfg = AuditConfig::from_json(nlohmann::json::parse(R"({"dataset": "d.jsonl", "seed": 3})"));
    EXPECT_EQ(cfg.dataset, "d.jsonl");
    EXPECT_EQ(cfg.per_class, 500u);
    EXPECT_EQ(cfg.perturbation.seed, 3u);
    EXPECT_EQ(cfg.tts_window, 64u);
    EXPECT_EQ(cfg.kl_bins.bins, 40u);
    EXPECT_EQ(cfg.kl_shuffle.eps, 1e-10);
    EXPECT_EQ(cfg.perturbation.token_replace_prob, 0.7);
}

TEST(AuditConfig, RejectsUnknownKeysAndBadTypes) {
    EXPECT_THROW(AuditConfig::from_json(nlohmann::json::parse(R"({"datset": "d"})")), ConfigError);
    EXPECT_THROW(AuditConfig::from_json(nlohmann::json::parse(R"({"phd": {"alfa": 1}})")), ConfigError);
    EXPECT_THROW(AuditConfig::from_json(nlohmann::json::parse(R"({"per_class": "many"})")), ConfigError);
    EXPECT_THROW(AuditConfig::from_json(nlohmann::json::parse(R"({"perturbation": {"shuffle_mode": "x"}})")),
                 ConfigError);
    TempDir dir;
    std::ofstream(dir / "bad.json") << "{ not json";
    EXPECT_THROW(AuditConfig::load(dir / "bad.json"), ConfigError);
    EXPECT_THROW(AuditConfig::load(dir / "absent.json"), ConfigError);
}

TEST(AuditConfig, Validation) {
    TempDir dir;
    AuditConfig cfg = fixture_config(dir, "short.jsonl", 5);
    EXPECT_NO_THROW(cfg.validate());
    auto broken = cfg;
    broken.dataset = (dir / "absent.jsonl").string();
    EXPECT_THROW(broken.validate(), ConfigError);
    broken = cfg;
    broken.per_class = 0;
    EXPECT_THROW(broken.validate(), ConfigError);
    broken = cfg;
    broken.tts_window = 20;
    EXPECT_THROW(broken.validate(), ConfigError);
    broken.skip_tts = true;
    EXPECT_NO_THROW(broken.validate());
    broken = cfg;
    broken.lexicon = (dir / "nope.jsonl").string();
    EXPECT_THROW(broken.validate(), ConfigError);
    broken = cfg;
    broken.token_source.location.clear();
    EXPECT_THROW(broken.validate(), ConfigError);
    broken = cfg;
    broken.kl_shuffle.eps = 0.0;
    EXPECT_THROW(broken.validate(), ConfigError);
}

TEST_F(NaturalAudit, AllScoresPopulated) {
    const auto& s = report_->scores;
    ASSERT_TRUE(s.kl_tts && s.phd_human_mean && s.phd_human_std && s.phd_machine_mean && s.phd_machine_std &&
                s.delta_shift && s.kl_shuffle);
    EXPECT_GE(*s.kl_tts, 0.0);
    EXPECT_GE(*s.kl_shuffle, 0.0);
    EXPECT_TRUE(s.flags.empty());
    EXPECT_EQ(report_->sampled_per_class, 30u);
    EXPECT_EQ(report_->sample.count_human, 30u);
    EXPECT_EQ(report_->sample.count_generated, 30u);
    EXPECT_EQ(report_->corpus.count_human, 240u);
    EXPECT_EQ(report_->corpus.count_generated, 220u);
    // The synthetic manifolds give human texts the higher intrinsic dimension.
    EXPECT_GT(*s.phd_human_mean, *s.phd_machine_mean);
    for (const char* f : {"sample.jsonl", "intermediates.jsonl", "modified_pairs.jsonl"})
        EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(cfg_->out_dir) / f)) << f;
}

TEST_F(NaturalAudit, AccountingAddsUpPerClass) {
    const auto acc = exclusion_accounting(*report_);
    for (const char* metric : {"phd", "tts", "delta_shift", "kl_shuffle"}) {
        ASSERT_TRUE(acc.count(metric)) << metric;
        const auto& a = acc.at(metric);
        EXPECT_EQ(a.included_human + a.excluded_human, 30u) << metric;
        EXPECT_EQ(a.included_machine + a.excluded_machine, 30u) << metric;
    }
    for (const auto& e : report_->exclusions) EXPECT_FALSE(e.reason.empty());
}

TEST_F(NaturalAudit, JsonRoundTripRendersSameMarkdown) {
    const auto j = report_to_json(*report_);
    EXPECT_EQ(j["schema_version"], "1.0");
    const auto back = report_from_json(j);
    EXPECT_EQ(render_markdown(back), render_markdown(*report_));
    EXPECT_EQ(report_to_json(back).dump(), j.dump());
    auto wrong = j;
    wrong["schema_version"] = "9.9";
    EXPECT_THROW(report_from_json(wrong), DatasetError);
}

TEST_F(NaturalAudit, EveryMarkdownNumberAppearsInJson) {
    const std::string md = render_markdown(*report_);
    const std::string js = report_to_json(*report_).dump();
    const std::regex number(R"(-?\d+(\.\d+)?)");
    std::size_t checked = 0;
    for (std::sregex_iterator it(md.begin(), md.end(), number), end; it != end; ++it, ++checked)
        EXPECT_NE(js.find(it->str()), std::string::npos) << it->str();
    EXPECT_GT(checked, 30u);
    const auto display = report_to_json(*report_)["display"];
    EXPECT_NE(md.find("| " + display["kl_tts"].get<std::string>() + " |"), std::string::npos);
    EXPECT_NE(md.find(display["phd_human"].get<std::string>()), std::string::npos);
}

TEST_F(NaturalAudit, MissingKlTtsRendersDash) {
    AuditReport r = *report_;
    r.scores.kl_tts.reset();
    const std::string md = render_markdown(r);
    EXPECT_NE(md.find("| natural | - | "), std::string::npos);
    EXPECT_EQ(report_to_json(r)["scores"]["kl_tts"], nullptr);
    EXPECT_EQ(display_cells(r).at("kl_tts"), "-");
}

TEST_F(NaturalAudit, IntermediatesRoundTrip) {
    TempDir dir;
    write_intermediates(*report_, dir / "i.jsonl");
    AuditReport fresh;
    read_intermediates(fresh, dir / "i.jsonl");
    ASSERT_EQ(fresh.phd.size(), report_->phd.size());
    for (std::size_t i = 0; i < fresh.phd.size(); ++i) {
        EXPECT_EQ(fresh.phd[i].doc_id, report_->phd[i].doc_id);
        EXPECT_EQ(fresh.phd[i].phd, report_->phd[i].phd);
        EXPECT_EQ(fresh.phd[i].token_count, report_->phd[i].token_count);
    }
    ASSERT_EQ(fresh.tts.size(), report_->tts.size());
    for (std::size_t i = 0; i < fresh.tts.size(); ++i) EXPECT_EQ(fresh.tts[i].series.values, report_->tts[i].series.values);
    ASSERT_EQ(fresh.shifts.size(), report_->shifts.size());
    for (std::size_t i = 0; i < fresh.shifts.size(); ++i) {
        EXPECT_EQ(fresh.shifts[i].shift, report_->shifts[i].shift);
        EXPECT_EQ(fresh.shifts[i].kind, report_->shifts[i].kind);
    }
}

TEST_F(NaturalAudit, PlotCsvsMatchReport) {
    TempDir dir;
    const auto files = emit_plot_data(*report_, dir.path());
    const auto phd = read_csv(files.phd);
    ASSERT_EQ(phd.front(), (std::vector<std::string>{"dataset", "doc_id", "label", "token_count", "phd"}));
    ASSERT_EQ(phd.size() - 1, report_->phd.size());
    std::map<std::string, std::vector<double>> by_label;
    for (std::size_t i = 1; i < phd.size(); ++i) by_label[phd[i][2]].push_back(std::stod(phd[i][4]));
    for (const auto& [label, values] : by_label) {
        double sum = 0.0;
        for (double v : values) sum += v;
        const double mean = sum / static_cast<double>(values.size());
        const auto expected = label == "human" ? report_->scores.phd_human_mean : report_->scores.phd_machine_mean;
        EXPECT_NEAR(mean, *expected, 1e-12) << label;
    }

    std::size_t windows = 0;
    for (const auto& t : report_->tts) windows += t.series.values.size() - t.series.undefined_count();
    const auto tts = read_csv(files.tts);
    EXPECT_EQ(tts.front(), (std::vector<std::string>{"dataset", "doc_id", "label", "window_index", "phd_value"}));
    EXPECT_EQ(tts.size() - 1, windows);

    const auto shifts = read_csv(files.shifts);
    std::set<std::pair<std::string, std::string>> keys;
    for (std::size_t i = 1; i < shifts.size(); ++i) EXPECT_TRUE(keys.insert({shifts[i][1], shifts[i][3]}).second);
    EXPECT_EQ(keys.size(), report_->shifts.size());
    EXPECT_EQ(keys.size(), 120u);
}

TEST_F(NaturalAudit, RerunIsIdenticalModuloTimings) {
    const AuditReport again = run_audit(*cfg_);
    EXPECT_EQ(json_without_timings(report_to_json(again)), json_without_timings(report_to_json(*report_)));
    AuditConfig serial = *cfg_;
    serial.workers = 1;
    const AuditReport one = run_audit(serial);
    auto a = report_to_json(one);
    auto b = report_to_json(*report_);
    EXPECT_EQ(a["scores"], b["scores"]);
    EXPECT_EQ(a["exclusions"], b["exclusions"]);
    EXPECT_EQ(a["display"], b["display"]);
}

TEST_F(NaturalAudit, GoldenMarkdown) {
    mgtaudit::testing::expect_golden("natural_report.md", render_markdown(*report_));
}

TEST(Audit, ShortTextsOmitKlTts) {
    TempDir dir;
    const auto cfg = fixture_config(dir, "short.jsonl", 20);
    const auto report = run_audit(cfg);
    EXPECT_FALSE(report.scores.kl_tts.has_value());
    EXPECT_TRUE(report.scores.has_flag("short-texts"));
    EXPECT_TRUE(report.scores.has_flag("phd-insufficient-texts:human"));
    EXPECT_TRUE(report.scores.has_flag("phd-insufficient-texts:machine"));
    EXPECT_LT(*report.median_token_count, 50.0);
    const auto acc = exclusion_accounting(report);
    EXPECT_EQ(acc.at("phd").excluded_human, 20u);
    EXPECT_EQ(acc.at("phd").excluded_machine, 20u);
    for (const auto& e : report.exclusions)
        if (e.metric == "phd") EXPECT_NE(e.reason.find("too short"), std::string::npos);
    EXPECT_TRUE(report.scores.kl_shuffle.has_value());
    EXPECT_NE(render_markdown(report).find("| short | - | "), std::string::npos);
}

TEST(Audit, MissingLexiconLeavesDeltaShiftOut) {
    TempDir dir;
    auto cfg = fixture_config(dir, "natural.jsonl", 8);
    cfg.lexicon.clear();
    cfg.skip_tts = true;
    const auto report = run_audit(cfg);
    EXPECT_TRUE(report.scores.has_flag("no-lexicon"));
    EXPECT_TRUE(report.scores.has_flag("tts-skipped"));
    EXPECT_FALSE(report.scores.delta_shift.has_value());
    EXPECT_FALSE(report.scores.kl_tts.has_value());
    EXPECT_TRUE(report.scores.kl_shuffle.has_value());
    EXPECT_EQ(exclusion_accounting(report).at("delta_shift").excluded_human, 8u);
    EXPECT_NE(render_markdown(report).find("| - | - |"), std::string::npos);
}

TEST(Audit, SkipPerturbation) {
    TempDir dir;
    auto cfg = fixture_config(dir, "natural.jsonl", 8);
    cfg.skip_perturb = true;
    const auto report = run_audit(cfg);
    EXPECT_TRUE(report.scores.has_flag("perturbation-skipped"));
    EXPECT_FALSE(report.scores.kl_shuffle.has_value());
    EXPECT_TRUE(report.scores.kl_tts.has_value());
}

TEST(Audit, ErrorsMapToCategories) {
    TempDir dir;
    auto cfg = fixture_config(dir, "natural.jsonl", 8);
    auto too_many = cfg;
    too_many.per_class = 1000;
    EXPECT_THROW(run_audit(too_many), DatasetError);
    std::ofstream(dir / "empty-emb.jsonl") << "";
    auto no_embeddings = cfg;
    no_embeddings.token_source.location = (dir / "empty-emb.jsonl").string();
    EXPECT_THROW(run_audit(no_embeddings), BackendError);
    auto unreachable = cfg;
    unreachable.token_source = {SourceKind::HttpService, "http://127.0.0.1:1", "roberta-base", EmbeddingMode::Tokens};
    EXPECT_THROW(run_audit(unreachable), BackendError);
    std::ofstream(dir / "humans.jsonl") << R"({"id":"a","text":"Only humans here.","label":"human"})" "\n";
    auto one_class = cfg;
    one_class.dataset = (dir / "humans.jsonl").string();
    EXPECT_THROW(run_audit(one_class), DatasetError);
}

TEST(ImportPredictions, PerDetectorRows) {
    TempDir dir;
    const Corpus gold("gold", "", {{"a", "x", Label::Human}, {"b", "x", Label::Human}, {"c", "x", Label::Machine},
                                   {"d", "x", Label::Machine}});
    std::ofstream(dir / "p.jsonl") << R"({"id":"a","pred":"human","detector":"zeta"})" "\n"
                                   << R"({"id":"b","pred":"machine","detector":"zeta"})" "\n"
                                   << R"({"id":"c","pred":"machine","detector":"zeta"})" "\n"
                                   << R"({"id":"d","pred":"machine","detector":"zeta"})" "\n"
                                   << R"({"id":"a","pred":"human","detector":"alpha"})" "\n"
                                   << R"({"id":"b","pred":"human","detector":"alpha"})" "\n"
                                   << R"({"id":"c","pred":"machine","detector":"alpha"})" "\n"
                                   << R"({"id":"d","pred":"machine","detector":"alpha"})" "\n";
    const auto rows = import_predictions_and_score(dir / "p.jsonl", gold);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].detector, "alpha");
    EXPECT_EQ(rows[0].macro_f1, 1.0);
    EXPECT_EQ(rows[1].detector, "zeta");
    EXPECT_NEAR(rows[1].macro_f1, 11.0 / 15.0, 1e-12);
    EXPECT_EQ(rows[1].predictions, 4u);
}
