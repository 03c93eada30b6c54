#include "mgtaudit/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "mgtaudit/errors.hpp"
#include "mgtaudit/rng.hpp"

namespace mgtaudit {

using nlohmann::json;

std::string_view to_string(Label label) {
    return label == Label::Human ? "human" : "machine";
}

std::string_view to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Dev: return "dev";
        case Split::Test: return "test";
    }
    return "test";
}

std::optional<Label> parse_label(std::string_view s) {
    if (s == "human") return Label::Human;
    if (s == "machine") return Label::Machine;
    return std::nullopt;
}

std::optional<Split> parse_split(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "dev") return Split::Dev;
    if (s == "test") return Split::Test;
    return std::nullopt;
}

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    });
}

std::string line_prefix(std::size_t line_no) {
    return "line " + std::to_string(line_no) + ": ";
}

}  // namespace

Corpus::Corpus(std::string name, std::string source_path, std::vector<Document> documents)
    : name_(std::move(name)), source_path_(std::move(source_path)), documents_(std::move(documents)) {
    index_.reserve(documents_.size());
    for (std::size_t i = 0; i < documents_.size(); ++i) {
        const auto& doc = documents_[i];
        if (doc.id.empty()) throw DatasetError("document #" + std::to_string(i) + " has an empty id");
        if (is_blank(doc.text)) throw DatasetError("document '" + doc.id + "' has empty text");
        if (!index_.emplace(doc.id, i).second)
            throw DatasetError("duplicate document id '" + doc.id + "'");
    }
}

std::size_t Corpus::count(Label label) const {
    return static_cast<std::size_t>(std::count_if(documents_.begin(), documents_.end(),
                                                  [label](const Document& d) { return d.label == label; }));
}

const Document* Corpus::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &documents_[it->second];
}

std::size_t utf8_length(std::string_view text) {
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (c < 0x80) len = 1, cp = c;
        else if ((c >> 5) == 0x6) len = 2, cp = c & 0x1F;
        else if ((c >> 4) == 0xE) len = 3, cp = c & 0x0F;
        else if ((c >> 3) == 0x1E) len = 4, cp = c & 0x07;
        else throw DatasetError("invalid UTF-8 lead byte at offset " + std::to_string(i));
        if (i + len > text.size()) throw DatasetError("truncated UTF-8 sequence at offset " + std::to_string(i));
        for (std::size_t k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(text[i + k]);
            if ((b >> 6) != 0x2) throw DatasetError("invalid UTF-8 continuation at offset " + std::to_string(i + k));
            cp = (cp << 6) | (b & 0x3F);
        }
        static constexpr char32_t kMinForLength[] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < kMinForLength[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            throw DatasetError("invalid UTF-8 scalar value at offset " + std::to_string(i));
        i += len;
        ++count;
    }
    return count;
}

Document parse_document_line(std::string_view line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw DatasetError(line_prefix(line_no) + "malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw DatasetError(line_prefix(line_no) + "expected a JSON object");

    auto required_string = [&](const char* key) -> std::string {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string())
            throw DatasetError(line_prefix(line_no) + "missing or non-string field '" + key + "'");
        return it->get<std::string>();
    };
    auto optional_string = [&](const char* key) -> std::optional<std::string> {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) return std::nullopt;
        if (!it->is_string()) throw DatasetError(line_prefix(line_no) + "field '" + key + "' must be a string");
        return it->get<std::string>();
    };

    Document doc;
    doc.id = required_string("id");
    if (doc.id.empty()) throw DatasetError(line_prefix(line_no) + "empty id");
    doc.text = required_string("text");
    if (is_blank(doc.text)) throw DatasetError(line_prefix(line_no) + "empty text for id '" + doc.id + "'");
    try {
        utf8_length(doc.text);
    } catch (const DatasetError& e) {
        throw DatasetError(line_prefix(line_no) + e.what());
    }
    const std::string label = required_string("label");
    auto parsed = parse_label(label);
    if (!parsed) throw DatasetError(line_prefix(line_no) + "unknown label '" + label + "'");
    doc.label = *parsed;
    doc.generator = optional_string("generator");
    doc.language = optional_string("lang");
    if (auto split = optional_string("split")) {
        auto s = parse_split(*split);
        if (!s) throw DatasetError(line_prefix(line_no) + "unknown split '" + *split + "'");
        doc.split = *s;
    }
    return doc;
}

std::string serialize_document(const Document& doc) {
    json j;
    j["id"] = doc.id;
    j["text"] = doc.text;
    j["label"] = std::string(to_string(doc.label));
    if (doc.generator) j["generator"] = *doc.generator;
    if (doc.language) j["lang"] = *doc.language;
    if (doc.split) j["split"] = std::string(to_string(*doc.split));
    return j.dump();
}

Corpus read_corpus(std::istream& in, std::string name, std::string source_path,
                   std::optional<Split> split_filter) {
    std::vector<Document> docs;
    std::unordered_map<std::string, std::size_t> first_seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) continue;
        Document doc = parse_document_line(line, line_no);
        auto [it, inserted] = first_seen.emplace(doc.id, line_no);
        if (!inserted)
            throw DatasetError(line_prefix(line_no) + "duplicate id '" + doc.id + "' (first seen on line " +
                               std::to_string(it->second) + ")");
        if (split_filter && doc.split != split_filter) continue;
        docs.push_back(std::move(doc));
    }
    if (in.bad()) throw DatasetError("I/O failure reading " + source_path);
    return Corpus(std::move(name), std::move(source_path), std::move(docs));
}

Corpus load_corpus(const std::filesystem::path& path, std::optional<Split> split_filter) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open dataset file " + path.string());
    return read_corpus(in, path.stem().string(), path.string(), split_filter);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    for (const auto& doc : corpus.documents()) out << serialize_document(doc) << '\n';
}

Corpus sample_balanced(const Corpus& corpus, std::size_t per_class, std::uint64_t seed) {
    std::vector<std::string> chosen_ids;
    for (Label label : kLabels) {
        std::vector<std::string> ids;
        for (const auto& doc : corpus.documents())
            if (doc.label == label) ids.push_back(doc.id);
        if (per_class > ids.size())
            throw PreconditionError("sample_balanced: per_class " + std::to_string(per_class) + " exceeds " +
                                    std::string(to_string(label)) + " class size " + std::to_string(ids.size()));
        std::sort(ids.begin(), ids.end());
        Rng rng(derive_seed(seed, std::string("sample_balanced/") + std::string(to_string(label))));
        for (std::size_t idx : rng.sample_indices(ids.size(), per_class)) chosen_ids.push_back(ids[idx]);
    }
    std::sort(chosen_ids.begin(), chosen_ids.end());

    std::vector<Document> docs;
    docs.reserve(chosen_ids.size());
    for (const auto& doc : corpus.documents())
        if (std::binary_search(chosen_ids.begin(), chosen_ids.end(), doc.id)) docs.push_back(doc);
    return Corpus(corpus.name(), corpus.source_path(), std::move(docs));
}

double median(std::vector<double> values) {
    if (values.empty()) throw PreconditionError("median of an empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

CorpusStats corpus_stats(const Corpus& corpus) {
    if (corpus.empty()) throw PreconditionError("corpus_stats: empty corpus");
    std::vector<double> human;
    std::vector<double> machine;
    for (const auto& doc : corpus.documents()) {
        const auto len = static_cast<double>(utf8_length(doc.text));
        (doc.label == Label::Human ? human : machine).push_back(len);
    }
    // Sorted before summing so the result does not depend on document order.
    std::sort(human.begin(), human.end());
    std::sort(machine.begin(), machine.end());
    auto mean = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };

    CorpusStats stats;
    stats.total_count = corpus.size();
    stats.count_human = human.size();
    stats.count_generated = machine.size();
    if (!human.empty()) {
        stats.mean_length_human = mean(human);
        stats.median_length_human = median(human);
    }
    if (!machine.empty()) {
        stats.mean_length_generated = mean(machine);
        stats.median_length_generated = median(machine);
    }
    return stats;
}

}  // namespace mgtaudit
