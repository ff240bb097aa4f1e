#include "speechalign/phoneme.hpp"

namespace speechalign {

namespace {

constexpr std::array<std::string_view, kPhonemeCount> kSymbols = {
    "IY", "IH", "EH", "AE", "AH", "UW", "UH", "AA", "ER", "AO", "SH", "S"};

}  // namespace

std::string_view to_symbol(PhonemeLabel label) { return kSymbols[index_of(label)]; }

std::optional<PhonemeLabel> parse_label(std::string_view symbol) {
    for (std::size_t i = 0; i < kSymbols.size(); ++i) {
        if (kSymbols[i] == symbol) return kAllPhonemes[i];
    }
    return std::nullopt;
}

}  // namespace speechalign
