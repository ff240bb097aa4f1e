#include "speechalign/phoneme_text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "speechalign/error.hpp"
#include "speechalign/text_io.hpp"

namespace speechalign {

namespace {

constexpr std::array<std::string_view, 39> kInventory = {
    "AA", "AE", "AH", "AO", "AW", "AY", "B",  "CH", "D",  "DH", "EH", "ER", "EY",
    "F",  "G",  "HH", "IH", "IY", "JH", "K",  "L",  "M",  "N",  "NG", "OW", "OY",
    "P",  "R",  "S",  "SH", "T",  "TH", "UH", "UW", "V",  "W",  "Y",  "Z",  "ZH"};

bool is_word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u >= 0x80;
}

// "[t=12.5]" at position `at`; returns the marker length or 0
std::size_t match_marker(std::string_view text, std::size_t at, double* time_s) {
    if (text.substr(at, 3) != "[t=") return 0;
    const std::size_t close = text.find(']', at + 3);
    if (close == std::string_view::npos) return 0;
    try {
        const double t = parse_double(text.substr(at + 3, close - at - 3));
        if (time_s) *time_s = t;
    } catch (const std::invalid_argument&) {
        return 0;
    }
    return close - at + 1;
}

}  // namespace

std::string to_upper_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string_view strip_stress(std::string_view symbol) {
    while (!symbol.empty() && std::isdigit(static_cast<unsigned char>(symbol.back()))) symbol.remove_suffix(1);
    return symbol;
}

bool is_inventory_symbol(std::string_view base_symbol) {
    return std::find(kInventory.begin(), kInventory.end(), base_symbol) != kInventory.end();
}

PronouncingDictionary PronouncingDictionary::parse(std::istream& in, const std::string& source) {
    PronouncingDictionary dict;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.starts_with(";;;")) continue;
        if (trim(line).empty()) continue;
        auto fields = split_whitespace(line);
        std::string_view word = fields[0];
        if (fields.size() < 2) throw ParseError(source, line_no, "entry '" + std::string(word) + "' has no phonemes");
        if (word.size() > 3 && word.back() == ')') {
            const auto open = word.rfind('(');
            if (open != std::string_view::npos && open > 0 &&
                std::all_of(word.begin() + static_cast<std::ptrdiff_t>(open) + 1, word.end() - 1,
                            [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
                word = word.substr(0, open);
            }
        }
        Pronunciation phonemes;
        phonemes.reserve(fields.size() - 1);
        for (std::size_t i = 1; i < fields.size(); ++i) phonemes.emplace_back(fields[i]);
        dict.add(word, std::move(phonemes));
    }
    if (dict.size() == 0) throw InputError(source + ": no dictionary entries parsed");
    return dict;
}

PronouncingDictionary PronouncingDictionary::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path.string() + ": cannot open dictionary");
    return parse(in, path.string());
}

bool PronouncingDictionary::add(std::string_view word, Pronunciation phonemes) {
    if (phonemes.empty()) throw InputError("dictionary entry '" + std::string(word) + "' has no phonemes");
    return entries_.try_emplace(to_upper_ascii(word), std::move(phonemes)).second;
}

const Pronunciation* PronouncingDictionary::find(std::string_view word) const {
    const auto it = entries_.find(to_upper_ascii(word));
    return it == entries_.end() ? nullptr : &it->second;
}

SubstitutionMap::SubstitutionMap()
    : rules_{{{"AW", "AH"}, {"AY", "AH"}, {"EY", "AE"}, {"OW", "UH"}, {"OY", "AO"}, {"Z", "S"}, {"CH", "SH"}}} {}

const SubstitutionMap& SubstitutionMap::standard() {
    static const SubstitutionMap map;
    return map;
}

std::string_view SubstitutionMap::apply(std::string_view symbol) const {
    const auto base = strip_stress(symbol);
    for (const auto& [from, to] : rules_) {
        if (from == base) return to;
    }
    return base;
}

std::vector<InlineMarker> extract_inline_markers(std::string_view text) {
    std::vector<InlineMarker> out;
    for (std::size_t at = text.find("[t="); at != std::string_view::npos; at = text.find("[t=", at + 1)) {
        double t = 0.0;
        if (const std::size_t len = match_marker(text, at, &t); len > 0) out.push_back({t, at + len});
    }
    return out;
}

std::vector<WordToken> tokenize(std::string_view text) {
    std::string blanked(text);
    for (std::size_t at = blanked.find("[t="); at != std::string::npos; at = blanked.find("[t=", at + 1)) {
        if (const std::size_t len = match_marker(blanked, at, nullptr); len > 0) blanked.replace(at, len, len, ' ');
    }
    const std::string_view view = blanked;

    std::vector<WordToken> out;
    auto emit = [&](std::size_t begin, std::size_t end) {
        while (begin < end && !is_word_char(view[begin])) ++begin;
        while (end > begin && !is_word_char(view[end - 1])) --end;
        if (begin == end) return;
        WordToken t;
        t.surface = std::string(text.substr(begin, end - begin));
        t.normalized = to_upper_ascii(t.surface);
        t.word_index = out.size();
        t.char_offset = begin;
        out.push_back(std::move(t));
    };

    std::size_t i = 0;
    while (i < view.size()) {
        while (i < view.size() && std::isspace(static_cast<unsigned char>(view[i]))) ++i;
        std::size_t part = i;
        while (i < view.size() && !std::isspace(static_cast<unsigned char>(view[i]))) {
            if (view[i] == '-') {
                emit(part, i);
                part = i + 1;
            }
            ++i;
        }
        if (i > part) emit(part, i);
    }
    return out;
}

std::vector<WordToken> expand_tokens(std::span<const WordToken> tokens) {
    std::vector<WordToken> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (!contains_digit(t.surface)) {
            WordToken copy = t;
            copy.word_index = out.size();
            out.push_back(std::move(copy));
            continue;
        }
        for (auto& spoken : verbalize_number(t.surface)) {
            WordToken w;
            w.surface = t.surface;
            w.normalized = to_upper_ascii(spoken);
            w.word_index = out.size();
            w.char_offset = t.char_offset;
            out.push_back(std::move(w));
        }
    }
    return out;
}

std::optional<StemMatch> stem_lookup(std::string_view word, const PronouncingDictionary& dict) {
    for (std::size_t len = word.size(); len-- > 3;) {
        const auto prefix = word.substr(0, len);
        if (const auto* p = dict.find(prefix)) return StemMatch{to_upper_ascii(prefix), p};
    }
    return std::nullopt;
}

std::vector<PhonemeLabel> to_detectable(std::span<const std::string> full_phonemes, const SubstitutionMap& subs) {
    std::vector<PhonemeLabel> out;
    for (const auto& symbol : full_phonemes) {
        const auto base = strip_stress(symbol);
        if (!is_inventory_symbol(base)) throw InputError("unknown phoneme symbol '" + symbol + "'");
        if (const auto label = parse_label(subs.apply(base))) out.push_back(*label);
    }
    return out;
}

std::vector<WordPhonemes> phonemize(std::string_view text, const PronouncingDictionary& dict,
                                    const SubstitutionMap& subs) {
    const auto words = expand_tokens(tokenize(text));
    std::vector<WordPhonemes> out;
    out.reserve(words.size());
    for (const auto& token : words) {
        WordPhonemes wp;
        wp.token = token;
        if (const auto* p = dict.find(token.normalized)) {
            wp.full_phonemes = *p;
        } else {
            wp.oov = true;
            if (auto stem = stem_lookup(token.normalized, dict)) {
                wp.full_phonemes = *stem->phonemes;
                wp.stemmed_to = std::move(stem->key);
            }
        }
        try {
            wp.detectable = to_detectable(wp.full_phonemes, subs);
        } catch (const InputError&) {
            // A malformed dictionary entry only costs this word its phonemes.
            wp.detectable.clear();
        }
        out.push_back(std::move(wp));
    }
    return out;
}

PhonemizeStats summarize(std::span<const WordPhonemes> words) {
    PhonemizeStats s;
    s.words = words.size();
    for (const auto& w : words) {
        if (w.oov) ++s.oov;
        if (w.stemmed_to) ++s.stemmed;
        if (w.detectable.empty()) ++s.zero_phoneme;
        s.detectable_phonemes += w.detectable.size();
    }
    return s;
}

std::vector<PhonemeLabel> flatten_detectable(std::span<const WordPhonemes> words) {
    std::vector<PhonemeLabel> out;
    for (const auto& w : words) out.insert(out.end(), w.detectable.begin(), w.detectable.end());
    return out;
}

void write_text_phonemes(std::ostream& out, std::span<const WordPhonemes> words) {
    for (const auto& w : words) {
        out << w.token.word_index << '\t' << w.token.surface << '\t';
        for (std::size_t i = 0; i < w.detectable.size(); ++i) {
            if (i > 0) out << ' ';
            out << to_symbol(w.detectable[i]);
        }
        out << '\n';
    }
}

std::vector<WordPhonemes> read_text_phonemes(std::istream& in, const std::string& source) {
    std::vector<WordPhonemes> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 3) throw ParseError(source, line_no, "expected 'word_index<TAB>surface<TAB>labels'");
        WordPhonemes wp;
        try {
            const long long index = parse_integer(fields[0]);
            if (index < 0) throw std::invalid_argument("negative word index");
            wp.token.word_index = static_cast<std::size_t>(index);
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, e.what());
        }
        if (!out.empty() && wp.token.word_index <= out.back().token.word_index) {
            throw ParseError(source, line_no, "word indices must be strictly increasing");
        }
        if (fields[1].empty()) throw ParseError(source, line_no, "empty surface form");
        wp.token.surface = std::string(fields[1]);
        wp.token.normalized = to_upper_ascii(fields[1]);
        for (const auto symbol : split_whitespace(fields[2])) {
            const auto label = parse_label(symbol);
            if (!label) throw ParseError(source, line_no, "unknown phoneme '" + std::string(symbol) + "'");
            wp.detectable.push_back(*label);
        }
        out.push_back(std::move(wp));
    }
    return out;
}

}  // namespace speechalign
