#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "speechalign/phoneme.hpp"

namespace speechalign {

using Pronunciation = std::vector<std::string>;

// Word -> phoneme symbols in the CMU plain-text format. Keys are stored
// uppercase; lookup is case-insensitive. Stress digits are kept verbatim.
class PronouncingDictionary {
public:
    // Parses `WORD  PH1 PH2 ...` lines. `;;;` lines are comments and `(n)`
    // variants collapse onto their base word; the first pronunciation wins.
    static PronouncingDictionary parse(std::istream& in, const std::string& source = "<stream>");
    static PronouncingDictionary load(const std::filesystem::path& path);

    // Returns false (and keeps the existing entry) if the word is present.
    bool add(std::string_view word, Pronunciation phonemes);

    const Pronunciation* find(std::string_view word) const;
    bool contains(std::string_view word) const { return find(word) != nullptr; }
    std::size_t size() const { return entries_.size(); }

    const std::unordered_map<std::string, Pronunciation>& entries() const { return entries_; }

private:
    std::unordered_map<std::string, Pronunciation> entries_;
};

struct WordToken {
    std::string surface;
    std::string normalized;
    std::size_t word_index = 0;
    std::size_t char_offset = 0;
};

struct WordPhonemes {
    WordToken token;
    Pronunciation full_phonemes;
    std::vector<PhonemeLabel> detectable;
    bool oov = false;
    std::optional<std::string> stemmed_to;
};

// Fixed rules mapping undetected phonemes onto acoustically similar
// detectable ones: diphthongs to monophthongs, Z to S, CH to SH.
class SubstitutionMap {
public:
    using Rule = std::pair<std::string_view, std::string_view>;

    static const SubstitutionMap& standard();

    // Target of the rule for `symbol` (stress digits removed), or the symbol itself.
    std::string_view apply(std::string_view symbol) const;

    std::span<const Rule> rules() const { return rules_; }

private:
    SubstitutionMap();
    std::array<Rule, 7> rules_;
};

// The 39-symbol phoneme inventory of the dictionary, without stress digits.
bool is_inventory_symbol(std::string_view base_symbol);

std::string_view strip_stress(std::string_view symbol);

std::string to_upper_ascii(std::string_view s);

struct InlineMarker {
    double time_s = 0.0;
    std::size_t char_offset = 0;  // first character after the marker
};

// Finds `[t=SECONDS]` markers in document order.
std::vector<InlineMarker> extract_inline_markers(std::string_view text);

// Whitespace tokenization with punctuation trimming and hyphen splitting.
// Inline markers are skipped. word_index is the token ordinal.
std::vector<WordToken> tokenize(std::string_view text);

bool contains_digit(std::string_view token);

// Spoken form of a numeric token as lowercase words. Throws InputError when
// the token has no digits.
std::vector<std::string> verbalize_number(std::string_view token);

// Replaces numeric tokens by their spoken words (sharing the original
// surface and char_offset) and renumbers word_index consecutively.
std::vector<WordToken> expand_tokens(std::span<const WordToken> tokens);

struct StemMatch {
    std::string key;
    const Pronunciation* phonemes = nullptr;
};

// Longest dictionary prefix of `word` with at least three characters,
// found by stripping one trailing character at a time.
std::optional<StemMatch> stem_lookup(std::string_view word, const PronouncingDictionary& dict);

// Strips stress, substitutes, and keeps only detectable labels, in order.
// Throws InputError naming any symbol outside the inventory.
std::vector<PhonemeLabel> to_detectable(std::span<const std::string> full_phonemes,
                                        const SubstitutionMap& subs = SubstitutionMap::standard());

std::vector<WordPhonemes> phonemize(std::string_view text, const PronouncingDictionary& dict,
                                    const SubstitutionMap& subs = SubstitutionMap::standard());

struct PhonemizeStats {
    std::size_t words = 0;
    std::size_t oov = 0;
    std::size_t stemmed = 0;
    std::size_t zero_phoneme = 0;
    std::size_t detectable_phonemes = 0;
};

PhonemizeStats summarize(std::span<const WordPhonemes> words);

std::vector<PhonemeLabel> flatten_detectable(std::span<const WordPhonemes> words);

// `word_index<TAB>surface<TAB>labels`, labels space separated (may be empty).
void write_text_phonemes(std::ostream& out, std::span<const WordPhonemes> words);
std::vector<WordPhonemes> read_text_phonemes(std::istream& in, const std::string& source = "<stream>");

}  // namespace speechalign
