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

#include "mgtaudit/corpus.hpp"

namespace mgtaudit {

enum class ModificationKind { TokenPerturb, SentenceShuffle };

std::string_view to_string(ModificationKind kind);
std::optional<ModificationKind> parse_modification_kind(std::string_view s);

enum class ShuffleMode {
    SubsetPermute,  // permute the selected sentences among their own slots
    SubseqReverse,  // reverse the selected sentences' order in their slots
};

std::string_view to_string(ShuffleMode mode);
std::optional<ShuffleMode> parse_shuffle_mode(std::string_view s);

// Lowercase word -> synonyms. Read-only after construction.
class SynonymLexicon {
public:
    SynonymLexicon() = default;
    // Throws DatasetError on empty synonym lists or blank synonyms.
    SynonymLexicon(std::unordered_map<std::string, std::vector<std::string>> entries, std::string source_id,
                   std::vector<std::string> languages = {"en"});

    // nullptr when the word has no entry. `word` must already be lowercase.
    const std::vector<std::string>* lookup(std::string_view word) const;
    bool covers_language(const std::optional<std::string>& bcp47) const;

    std::size_t size() const noexcept { return entries_.size(); }
    const std::string& source_id() const noexcept { return source_id_; }
    const std::unordered_map<std::string, std::vector<std::string>>& entries() const noexcept { return entries_; }

private:
    std::unordered_map<std::string, std::vector<std::string>> entries_;
    std::string source_id_;
    std::vector<std::string> languages_;
};

// Lexicon JSONL: {"word": str, "synonyms": [str, ...]} per line.
SynonymLexicon load_lexicon(const std::filesystem::path& path, std::string source_id = {});
void write_lexicon(const SynonymLexicon& lexicon, std::ostream& out);

// Builds the lexicon from a WordNet database directory (data.noun, data.verb,
// data.adj, data.adv). Every single-word lemma maps to the single-word lemmas
// of all synsets containing it, itself excluded. Closed-class English words are
// left out on both sides.
SynonymLexicon lexicon_from_wordnet(const std::filesystem::path& dict_dir, std::string source_id);

struct PerturbationConfig {
    double token_replace_prob = 0.7;
    double sentence_shuffle_frac = 0.7;
    std::uint64_t seed = 0;
    ShuffleMode shuffle_mode = ShuffleMode::SubsetPermute;

    void validate() const;
};

struct ModifiedPair {
    const Document* original = nullptr;
    std::string modified_text;
    ModificationKind kind = ModificationKind::TokenPerturb;
    std::size_t count = 0;  // tokens replaced or sentences moved
    std::optional<std::string> skip_reason;  // set when left unmodified on purpose
};

// A word or punctuation token and the whitespace that precedes it.
struct Token {
    std::string text;
    std::string leading_space;
};

// Whitespace split, then leading and trailing punctuation peeled off into
// their own tokens. Joining leading_space + text over all tokens, plus
// `trailing_space`, reproduces the input.
struct Tokenization {
    std::vector<Token> tokens;
    std::string trailing_space;

    std::string reconstruct() const;
    std::vector<std::string> texts() const;
};

Tokenization tokenize(std::string_view text);
std::vector<std::string> tokenize_simple(std::string_view text);

// True for tokens made of letters (ASCII or any non-ASCII code point) with
// optional inner apostrophes or hyphens.
bool is_alphabetic_token(std::string_view token);

ModifiedPair synonym_perturb(const Document& doc, const SynonymLexicon& lexicon, const PerturbationConfig& cfg);

// Sentence pieces; concatenating them reproduces `text` (each piece keeps its
// trailing whitespace).
std::vector<std::string> split_sentences(std::string_view text);

ModifiedPair shuffle_sentences(const Document& doc, const PerturbationConfig& cfg);

// Dump line: {"id", "kind", "modified_text", "count"}.
std::string serialize_modified_pair(const ModifiedPair& pair);

}  // namespace mgtaudit
