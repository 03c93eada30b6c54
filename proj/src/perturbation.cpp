#include "mgtaudit/perturbation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mgtaudit/errors.hpp"
#include "mgtaudit/rng.hpp"

namespace mgtaudit {

using nlohmann::json;

std::string_view to_string(ModificationKind kind) {
    return kind == ModificationKind::TokenPerturb ? "token-perturb" : "sentence-shuffle";
}

std::optional<ModificationKind> parse_modification_kind(std::string_view s) {
    if (s == "token-perturb") return ModificationKind::TokenPerturb;
    if (s == "sentence-shuffle") return ModificationKind::SentenceShuffle;
    return std::nullopt;
}

std::string_view to_string(ShuffleMode mode) {
    return mode == ShuffleMode::SubsetPermute ? "subset-permute" : "subseq-reverse";
}

std::optional<ShuffleMode> parse_shuffle_mode(std::string_view s) {
    if (s == "subset-permute") return ShuffleMode::SubsetPermute;
    if (s == "subseq-reverse") return ShuffleMode::SubseqReverse;
    return std::nullopt;
}

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Decodes the code point starting at s[i]; sets `len`. Malformed bytes decode
// as themselves with length 1.
char32_t decode(std::string_view s, std::size_t i, std::size_t& len) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t n = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
    if (i + n > s.size()) n = 1;
    char32_t cp = n == 1 ? c : n == 2 ? (c & 0x1F) : n == 3 ? (c & 0x0F) : (c & 0x07);
    for (std::size_t k = 1; k < n; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    len = n;
    return cp;
}

bool is_punct_cp(char32_t cp) {
    if (cp < 0x80) return cp > 0x20 && cp < 0x7F && !std::isalnum(static_cast<int>(cp));
    switch (cp) {
        case U'¡': case U'«': case U'»': case U'¿':
        case U'–': case U'—': case U'‘': case U'’':
        case U'“': case U'”': case U'…': case U'·':
        case U'、': case U'。':
            return true;
        default:
            return false;
    }
}

// Code-point boundaries of a chunk.
std::vector<std::size_t> boundaries(std::string_view s) {
    std::vector<std::size_t> b{0};
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t len = 1;
        decode(s, i, len);
        i += len;
        b.push_back(i);
    }
    return b;
}

void split_chunk(std::string_view chunk, std::string leading, std::vector<Token>& out) {
    const auto b = boundaries(chunk);
    const std::size_t ncp = b.size() - 1;
    auto punct_at = [&](std::size_t k) {
        std::size_t len = 1;
        return is_punct_cp(decode(chunk, b[k], len));
    };
    std::size_t first = 0;
    while (first < ncp && punct_at(first)) ++first;
    std::size_t last = ncp;
    while (last > first && punct_at(last - 1)) --last;

    auto emit = [&](std::size_t from, std::size_t to) {
        out.push_back({std::string(chunk.substr(b[from], b[to] - b[from])), std::move(leading)});
        leading.clear();
    };
    for (std::size_t k = 0; k < first; ++k) emit(k, k + 1);
    if (last > first) emit(first, last);
    for (std::size_t k = std::max(last, first); k < ncp; ++k) emit(k, k + 1);
}

bool is_upper_ascii(char c) { return c >= 'A' && c <= 'Z'; }

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (is_upper_ascii(c)) c = static_cast<char>(c - 'A' + 'a');
    return out;
}

}  // namespace

// ---------------------------------------------------------------- tokenizer

std::string Tokenization::reconstruct() const {
    std::string out;
    for (const auto& t : tokens) {
        out += t.leading_space;
        out += t.text;
    }
    return out + trailing_space;
}

std::vector<std::string> Tokenization::texts() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.text);
    return out;
}

Tokenization tokenize(std::string_view text) {
    Tokenization result;
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t space_begin = i;
        while (i < text.size() && is_space(text[i])) ++i;
        std::string leading(text.substr(space_begin, i - space_begin));
        if (i == text.size()) {
            result.trailing_space = std::move(leading);
            break;
        }
        const std::size_t chunk_begin = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        split_chunk(text.substr(chunk_begin, i - chunk_begin), std::move(leading), result.tokens);
    }
    return result;
}

std::vector<std::string> tokenize_simple(std::string_view text) { return tokenize(text).texts(); }

bool is_alphabetic_token(std::string_view token) {
    if (token.empty()) return false;
    const auto b = boundaries(token);
    const std::size_t ncp = b.size() - 1;
    for (std::size_t k = 0; k < ncp; ++k) {
        std::size_t len = 1;
        const char32_t cp = decode(token, b[k], len);
        const bool letter = (cp < 0x80) ? std::isalpha(static_cast<int>(cp)) != 0 : !is_punct_cp(cp);
        const bool joiner = cp == U'\'' || cp == U'-' || cp == U'’';
        if (letter) continue;
        if (joiner && k > 0 && k + 1 < ncp) continue;
        return false;
    }
    return true;
}

// ---------------------------------------------------------------- lexicon

SynonymLexicon::SynonymLexicon(std::unordered_map<std::string, std::vector<std::string>> entries,
                               std::string source_id, std::vector<std::string> languages)
    : entries_(std::move(entries)), source_id_(std::move(source_id)), languages_(std::move(languages)) {
    for (const auto& [word, synonyms] : entries_) {
        if (word.empty()) throw DatasetError("lexicon has an empty word");
        if (synonyms.empty()) throw DatasetError("lexicon word '" + word + "' has no synonyms");
        for (const auto& s : synonyms)
            if (std::all_of(s.begin(), s.end(), is_space))
                throw DatasetError("lexicon word '" + word + "' has a blank synonym");
    }
}

const std::vector<std::string>* SynonymLexicon::lookup(std::string_view word) const {
    auto it = entries_.find(std::string(word));
    return it == entries_.end() ? nullptr : &it->second;
}

bool SynonymLexicon::covers_language(const std::optional<std::string>& bcp47) const {
    if (!bcp47 || bcp47->empty()) return true;
    const std::string primary = lower_ascii(bcp47->substr(0, bcp47->find_first_of("-_")));
    return std::find(languages_.begin(), languages_.end(), primary) != languages_.end();
}

SynonymLexicon load_lexicon(const std::filesystem::path& path, std::string source_id) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open lexicon file " + path.string());
    std::unordered_map<std::string, std::vector<std::string>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DatasetError(where + ": malformed JSON (" + e.what() + ")");
        }
        if (!j.contains("word") || !j["word"].is_string() || !j.contains("synonyms") || !j["synonyms"].is_array())
            throw DatasetError(where + ": expected {\"word\": str, \"synonyms\": [str, ...]}");
        std::vector<std::string> synonyms;
        for (const auto& s : j["synonyms"]) {
            if (!s.is_string()) throw DatasetError(where + ": synonyms must be strings");
            synonyms.push_back(s.get<std::string>());
        }
        if (!entries.emplace(lower_ascii(j["word"].get<std::string>()), std::move(synonyms)).second)
            throw DatasetError(where + ": duplicate word '" + j["word"].get<std::string>() + "'");
    }
    if (source_id.empty()) source_id = path.filename().string();
    return SynonymLexicon(std::move(entries), std::move(source_id));
}

void write_lexicon(const SynonymLexicon& lexicon, std::ostream& out) {
    std::map<std::string, const std::vector<std::string>*> sorted;
    for (const auto& [w, s] : lexicon.entries()) sorted.emplace(w, &s);
    for (const auto& [w, s] : sorted) out << json{{"word", w}, {"synonyms", *s}}.dump() << '\n';
}

namespace {

// Closed-class English words. WordNet lists rare senses for several of them
// ("a" as a vitamin, "it" as information technology), so they never enter the lexicon.
const std::set<std::string, std::less<>> kFunctionWords = {
    "a",     "about", "above", "after",  "again", "against", "all",    "am",     "an",     "and",   "any",
    "are",   "as",    "at",    "be",     "been",  "before",  "being",  "below",  "between", "both", "but",
    "by",    "can",   "could", "did",    "do",    "does",    "doing",  "down",   "during", "each",  "few",
    "for",   "from",  "further", "had",  "has",   "have",    "having", "he",     "her",    "here",  "hers",
    "him",   "his",   "how",   "i",      "if",    "in",      "into",   "is",     "it",     "its",   "me",
    "might", "more",  "most",  "must",   "my",    "no",      "nor",    "not",    "of",     "off",   "on",
    "once",  "only",  "or",    "other",  "our",   "ours",    "out",    "over",   "own",    "same",  "shall",
    "she",   "should", "so",   "some",   "such",  "than",    "that",   "the",    "their",  "them",  "then",
    "there", "these", "they",  "this",   "those", "through", "to",     "too",    "under",  "until", "up",
    "us",    "very",  "was",   "we",     "were",  "what",    "when",   "where",  "which",  "while", "who",
    "whom",  "why",   "will",  "with",   "would", "you",     "your",   "yours",
};

}  // namespace

SynonymLexicon lexicon_from_wordnet(const std::filesystem::path& dict_dir, std::string source_id) {
    std::map<std::string, std::set<std::string>> synonyms;
    std::size_t files = 0;
    for (const char* name : {"data.noun", "data.verb", "data.adj", "data.adv"}) {
        std::ifstream in(dict_dir / name);
        if (!in) continue;
        ++files;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == ' ') continue;  // license header
            std::istringstream fields(line);
            std::string offset, lex_filenum, ss_type, w_cnt_hex;
            if (!(fields >> offset >> lex_filenum >> ss_type >> w_cnt_hex)) continue;
            const auto w_cnt = std::stoul(w_cnt_hex, nullptr, 16);
            std::vector<std::string> words;
            for (unsigned long k = 0; k < w_cnt; ++k) {
                std::string word, lex_id;
                fields >> word >> lex_id;
                if (auto paren = word.find('('); paren != std::string::npos) word.erase(paren);  // adj markers
                word = lower_ascii(word);
                if (word.find('_') != std::string::npos || !is_alphabetic_token(word)) continue;
                if (kFunctionWords.count(word) != 0) continue;
                if (std::find(words.begin(), words.end(), word) == words.end()) words.push_back(word);
            }
            for (const auto& w : words)
                for (const auto& s : words)
                    if (s != w) synonyms[w].insert(s);
        }
    }
    if (files == 0) throw DatasetError("no WordNet data.* files found in " + dict_dir.string());
    std::unordered_map<std::string, std::vector<std::string>> entries;
    for (auto& [w, s] : synonyms) entries.emplace(w, std::vector<std::string>(s.begin(), s.end()));
    return SynonymLexicon(std::move(entries), std::move(source_id));
}

// ---------------------------------------------------------------- perturbations

void PerturbationConfig::validate() const {
    if (!(token_replace_prob >= 0.0 && token_replace_prob <= 1.0))
        throw ConfigError("token_replace_prob must lie in [0, 1]");
    if (!(sentence_shuffle_frac >= 0.0 && sentence_shuffle_frac <= 1.0))
        throw ConfigError("sentence_shuffle_frac must lie in [0, 1]");
}

ModifiedPair synonym_perturb(const Document& doc, const SynonymLexicon& lexicon, const PerturbationConfig& cfg) {
    cfg.validate();
    ModifiedPair pair;
    pair.original = &doc;
    pair.kind = ModificationKind::TokenPerturb;
    if (!lexicon.covers_language(doc.language)) {
        pair.modified_text = doc.text;
        pair.skip_reason = "lexicon does not cover language '" + *doc.language + "'";
        return pair;
    }

    Tokenization tok = tokenize(doc.text);
    Rng rng(derive_seed(cfg.seed, "synonym/" + doc.id));
    for (auto& token : tok.tokens) {
        if (!is_alphabetic_token(token.text)) continue;
        // One draw per alphabetic token keeps the stream aligned across lexicons.
        const bool selected = rng.bernoulli(cfg.token_replace_prob);
        if (!selected) continue;
        const auto* candidates = lexicon.lookup(lower_ascii(token.text));
        if (!candidates) continue;
        std::string replacement = (*candidates)[rng.uniform_index(candidates->size())];
        if (is_upper_ascii(token.text.front()) && !replacement.empty() && replacement.front() >= 'a' &&
            replacement.front() <= 'z')
            replacement.front() = static_cast<char>(replacement.front() - 'a' + 'A');
        token.text = std::move(replacement);
        ++pair.count;
    }
    pair.modified_text = tok.reconstruct();
    return pair;
}

namespace {

const std::array<std::string_view, 38> kAbbreviations = {
    "Mr", "Mrs", "Ms", "Dr", "Prof", "Sr", "Jr", "St", "Mt", "vs", "etc", "e.g", "i.e", "cf", "al", "Inc", "Ltd",
    "Co", "Corp", "No", "Fig", "Vol", "pp", "approx", "Jan", "Feb", "Mar", "Apr", "Jun", "Jul", "Aug", "Sep",
    "Sept", "Oct", "Nov", "Dec", "Gen", "Gov"};

bool is_terminal(char32_t cp) { return cp == U'.' || cp == U'!' || cp == U'?' || cp == U'…'; }
bool is_closer(char32_t cp) {
    return cp == U'"' || cp == U'\'' || cp == U')' || cp == U']' || cp == U'”' || cp == U'’' ||
           cp == U'»';
}
bool is_opener(char32_t cp) {
    return cp == U'"' || cp == U'\'' || cp == U'(' || cp == U'[' || cp == U'“' || cp == U'‘' ||
           cp == U'«';
}
bool is_sentence_start(char32_t cp) {
    return (cp >= U'A' && cp <= U'Z') || is_opener(cp) || (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) ||
           (cp >= 0x410 && cp <= 0x42F);  // Latin-1 and Cyrillic capitals
}

// Word immediately before `end` (exclusive), back to the previous whitespace.
std::string_view word_before(std::string_view text, std::size_t end) {
    std::size_t begin = end;
    while (begin > 0 && !is_space(text[begin - 1])) --begin;
    std::string_view w = text.substr(begin, end - begin);
    while (!w.empty() && (w.front() == '(' || w.front() == '"' || w.front() == '\'')) w.remove_prefix(1);
    return w;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t len = 1;
        const char32_t cp = decode(text, i, len);
        if (!is_terminal(cp)) {
            i += len;
            continue;
        }
        const std::size_t term_begin = i;
        std::size_t j = i + len;
        // Runs such as "?!" or "..." and closing quotes belong to the sentence.
        while (j < text.size()) {
            std::size_t l = 1;
            const char32_t c = decode(text, j, l);
            if (!is_terminal(c) && !is_closer(c)) break;
            j += l;
        }
        std::size_t k = j;
        while (k < text.size() && is_space(text[k])) ++k;
        bool boundary = k > j && k < text.size();
        if (boundary) {
            std::size_t l = 1;
            boundary = is_sentence_start(decode(text, k, l));
        }
        if (boundary && cp == U'.' && j == term_begin + 1) {
            const std::string_view w = word_before(text, term_begin);
            boundary = std::find(kAbbreviations.begin(), kAbbreviations.end(), w) == kAbbreviations.end();
        }
        if (boundary) {
            out.emplace_back(text.substr(start, k - start));
            start = k;
        }
        i = j;
    }
    if (start < text.size()) out.emplace_back(text.substr(start));
    return out;
}

namespace {

std::pair<std::string, std::string> split_trailing_space(const std::string& s) {
    std::size_t end = s.size();
    while (end > 0 && is_space(s[end - 1])) --end;
    return {s.substr(0, end), s.substr(end)};
}

}  // namespace

ModifiedPair shuffle_sentences(const Document& doc, const PerturbationConfig& cfg) {
    cfg.validate();
    ModifiedPair pair;
    pair.original = &doc;
    pair.kind = ModificationKind::SentenceShuffle;
    pair.modified_text = doc.text;

    const auto pieces = split_sentences(doc.text);
    const std::size_t s = pieces.size();
    if (s < 2) {
        pair.skip_reason = "fewer than 2 sentences";
        return pair;
    }
    const auto k = static_cast<std::size_t>(std::ceil(cfg.sentence_shuffle_frac * static_cast<double>(s) - 1e-12));
    if (k < 2) {
        pair.skip_reason = "fewer than 2 sentences selected";
        return pair;
    }

    std::vector<std::string> bodies;
    std::vector<std::string> gaps;
    for (const auto& p : pieces) {
        auto [body, gap] = split_trailing_space(p);
        bodies.push_back(std::move(body));
        gaps.push_back(std::move(gap));
    }

    Rng rng(derive_seed(cfg.seed, "shuffle/" + doc.id));
    auto slots = rng.sample_indices(s, k);
    std::sort(slots.begin(), slots.end());

    // order[i] = which selected sentence lands in slot i.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg.shuffle_mode == ShuffleMode::SubseqReverse) {
        std::reverse(order.begin(), order.end());
    } else {
        auto has_fixed_point = [&] {
            for (std::size_t i = 0; i < k; ++i)
                if (order[i] == i) return true;
            return false;
        };
        // Rejection sampling gives a uniform derangement; the cap is never hit in practice.
        std::size_t attempts = 0;
        do {
            std::iota(order.begin(), order.end(), std::size_t{0});
            rng.shuffle(order);
        } while (has_fixed_point() && ++attempts < 1000);
        if (has_fixed_point()) std::rotate(order.begin(), order.begin() + 1, order.end());
    }

    std::vector<std::string> new_bodies = bodies;
    for (std::size_t i = 0; i < k; ++i) {
        new_bodies[slots[i]] = bodies[slots[order[i]]];
        if (order[i] != i) ++pair.count;
    }
    std::string out;
    for (std::size_t i = 0; i < s; ++i) {
        out += new_bodies[i];
        out += gaps[i];
    }
    pair.modified_text = std::move(out);
    return pair;
}

std::string serialize_modified_pair(const ModifiedPair& pair) {
    json j;
    j["id"] = pair.original ? pair.original->id : std::string();
    j["kind"] = std::string(to_string(pair.kind));
    j["modified_text"] = pair.modified_text;
    j["count"] = pair.count;
    if (pair.skip_reason) j["skip_reason"] = *pair.skip_reason;
    return j.dump();
}

}  // namespace mgtaudit
