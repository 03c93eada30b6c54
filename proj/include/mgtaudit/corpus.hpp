#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mgtaudit {

enum class Label { Human, Machine };
enum class Split { Train, Dev, Test };

std::string_view to_string(Label label);
std::string_view to_string(Split split);
std::optional<Label> parse_label(std::string_view s);
std::optional<Split> parse_split(std::string_view s);

inline constexpr Label kLabels[] = {Label::Human, Label::Machine};

struct Document {
    std::string id;
    std::string text;
    Label label = Label::Human;
    std::optional<std::string> generator;
    std::optional<std::string> language;  // BCP-47
    std::optional<Split> split;

    friend bool operator==(const Document&, const Document&) = default;
};

// Ordered, immutable set of labeled documents with unique ids.
class Corpus {
public:
    Corpus() = default;
    // Throws DatasetError on duplicate ids or blank texts.
    Corpus(std::string name, std::string source_path, std::vector<Document> documents);

    const std::vector<Document>& documents() const noexcept { return documents_; }
    const std::string& name() const noexcept { return name_; }
    const std::string& source_path() const noexcept { return source_path_; }
    std::size_t size() const noexcept { return documents_.size(); }
    bool empty() const noexcept { return documents_.empty(); }
    std::size_t count(Label label) const;
    const Document* find(std::string_view id) const;

private:
    std::string name_;
    std::string source_path_;
    std::vector<Document> documents_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct CorpusStats {
    std::size_t total_count = 0;
    std::size_t count_generated = 0;
    std::size_t count_human = 0;
    // Lengths in Unicode scalar values; absent when the class is empty.
    std::optional<double> mean_length_generated;
    std::optional<double> mean_length_human;
    std::optional<double> median_length_generated;
    std::optional<double> median_length_human;
};

// Number of Unicode scalar values in a UTF-8 string. Throws DatasetError on
// malformed UTF-8.
std::size_t utf8_length(std::string_view text);

// Parses one JSONL dataset line. Throws DatasetError naming `line_no`.
Document parse_document_line(std::string_view line, std::size_t line_no);
std::string serialize_document(const Document& doc);

Corpus read_corpus(std::istream& in, std::string name, std::string source_path,
                   std::optional<Split> split_filter = std::nullopt);
Corpus load_corpus(const std::filesystem::path& path,
                   std::optional<Split> split_filter = std::nullopt);
void write_corpus(const Corpus& corpus, std::ostream& out);

// Exactly `per_class` documents of each label, without replacement.
// Candidates are ordered by id before drawing, so the result depends only on
// the id set and the seed; output keeps the input document order.
Corpus sample_balanced(const Corpus& corpus, std::size_t per_class, std::uint64_t seed);

CorpusStats corpus_stats(const Corpus& corpus);

// Mean of the two middle values for even sizes. Throws on empty input.
double median(std::vector<double> values);

}  // namespace mgtaudit
