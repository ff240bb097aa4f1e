#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace speechalign {

// The detectable phoneme alphabet: ten monophthongs followed by two
// fricatives. Enumerator order is the canonical listing order and is used
// for tie-breaking.
enum class PhonemeLabel : std::uint8_t { IY, IH, EH, AE, AH, UW, UH, AA, ER, AO, SH, S };

inline constexpr std::size_t kPhonemeCount = 12;
inline constexpr std::size_t kMonophthongCount = 10;

inline constexpr std::array<PhonemeLabel, kPhonemeCount> kAllPhonemes = {
    PhonemeLabel::IY, PhonemeLabel::IH, PhonemeLabel::EH, PhonemeLabel::AE,
    PhonemeLabel::AH, PhonemeLabel::UW, PhonemeLabel::UH, PhonemeLabel::AA,
    PhonemeLabel::ER, PhonemeLabel::AO, PhonemeLabel::SH, PhonemeLabel::S};

constexpr std::size_t index_of(PhonemeLabel label) { return static_cast<std::size_t>(label); }

constexpr bool is_monophthong(PhonemeLabel label) { return index_of(label) < kMonophthongCount; }

std::string_view to_symbol(PhonemeLabel label);

// Accepts the bare symbol ("IY"); returns nullopt for anything else.
std::optional<PhonemeLabel> parse_label(std::string_view symbol);

}  // namespace speechalign
