#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "speechalign/error.hpp"
#include "speechalign/phoneme_text.hpp"

namespace speechalign {

namespace {

constexpr std::array<std::string_view, 20> kOnes = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};

constexpr std::array<std::string_view, 10> kTens = {
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};

constexpr std::array<std::string_view, 5> kScales = {"", "thousand", "million", "billion", "trillion"};

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!is_digit(c)) return false;
    }
    return true;
}

void push(std::vector<std::string>& out, std::string_view w) { out.emplace_back(w); }

// 0 < n < 100
void below_hundred(std::uint64_t n, std::vector<std::string>& out) {
    if (n < 20) {
        push(out, kOnes[n]);
        return;
    }
    push(out, kTens[n / 10]);
    if (n % 10 != 0) push(out, kOnes[n % 10]);
}

// 0 < n < 1000
void below_thousand(std::uint64_t n, std::vector<std::string>& out) {
    if (n >= 100) {
        push(out, kOnes[n / 100]);
        push(out, "hundred");
        n %= 100;
    }
    if (n > 0) below_hundred(n, out);
}

void compound(std::uint64_t n, std::vector<std::string>& out) {
    if (n == 0) {
        push(out, "zero");
        return;
    }
    std::array<std::uint64_t, kScales.size()> groups{};
    for (auto& g : groups) {
        g = n % 1000;
        n /= 1000;
    }
    for (std::size_t i = groups.size(); i-- > 0;) {
        if (groups[i] == 0) continue;
        below_thousand(groups[i], out);
        if (i > 0) push(out, kScales[i]);
    }
}

void digit_by_digit(std::string_view digits, std::vector<std::string>& out) {
    for (char c : digits) push(out, kOnes[static_cast<std::size_t>(c - '0')]);
}

// "nineteen fifty", "nineteen oh five", "nineteen hundred"
void year(std::uint64_t n, std::vector<std::string>& out) {
    below_hundred(n / 100, out);
    const std::uint64_t tail = n % 100;
    if (tail == 0) {
        push(out, "hundred");
    } else if (tail < 10) {
        push(out, "oh");
        push(out, kOnes[tail]);
    } else {
        below_hundred(tail, out);
    }
}

bool is_year_like(std::string_view digits, std::uint64_t value) {
    return digits.size() == 4 && ((value >= 1100 && value <= 1999) || (value >= 2010 && value <= 2999));
}

// "1,234,567" -> "1234567"; empty if the grouping is not well formed
std::string strip_grouping(std::string_view s) {
    const auto parts = [&] {
        std::vector<std::string_view> p;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= s.size(); ++i) {
            if (i == s.size() || s[i] == ',') {
                p.push_back(s.substr(start, i - start));
                start = i + 1;
            }
        }
        return p;
    }();
    if (parts.size() < 2 || parts[0].empty() || parts[0].size() > 3 || !all_digits(parts[0])) return {};
    std::string out(parts[0]);
    for (std::size_t i = 1; i < parts.size(); ++i) {
        if (parts[i].size() != 3 || !all_digits(parts[i])) return {};
        out += parts[i];
    }
    return out;
}

void integer_words(std::string_view digits, std::vector<std::string>& out) {
    if (digits.size() > 1 && digits.front() == '0') {
        digit_by_digit(digits, out);
        return;
    }
    if (digits.size() > 15) {
        digit_by_digit(digits, out);
        return;
    }
    const std::uint64_t value = std::stoull(std::string(digits));
    if (is_year_like(digits, value)) {
        year(value, out);
    } else {
        compound(value, out);
    }
}

}  // namespace

bool contains_digit(std::string_view token) {
    for (char c : token) {
        if (is_digit(c)) return true;
    }
    return false;
}

std::vector<std::string> verbalize_number(std::string_view token) {
    if (!contains_digit(token)) {
        throw InputError("verbalize_number: '" + std::string(token) + "' is not numeric");
    }
    std::vector<std::string> out;

    std::string digits(token);
    if (token.find(',') != std::string_view::npos) {
        if (auto grouped = strip_grouping(token); !grouped.empty()) digits = grouped;
    }
    if (all_digits(digits)) {
        integer_words(digits, out);
        return out;
    }

    const auto dot = digits.find('.');
    if (dot != std::string::npos && digits.find('.', dot + 1) == std::string::npos) {
        const std::string_view whole = std::string_view(digits).substr(0, dot);
        const std::string_view frac = std::string_view(digits).substr(dot + 1);
        if ((whole.empty() || all_digits(whole)) && all_digits(frac)) {
            if (whole.empty()) {
                push(out, "zero");
            } else {
                integer_words(whole, out);
            }
            push(out, "point");
            digit_by_digit(frac, out);
            return out;
        }
    }

    // Mixed token: digit runs are spelled out, letter runs pass through.
    std::size_t i = 0;
    while (i < token.size()) {
        const std::size_t start = i;
        if (is_digit(token[i])) {
            while (i < token.size() && is_digit(token[i])) ++i;
            digit_by_digit(token.substr(start, i - start), out);
        } else if (std::isalpha(static_cast<unsigned char>(token[i])) || static_cast<unsigned char>(token[i]) >= 0x80) {
            while (i < token.size() && !is_digit(token[i]) &&
                   (std::isalpha(static_cast<unsigned char>(token[i])) || token[i] == '\'' ||
                    static_cast<unsigned char>(token[i]) >= 0x80)) {
                ++i;
            }
            std::string word(token.substr(start, i - start));
            for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            out.push_back(std::move(word));
        } else {
            ++i;
        }
    }
    return out;
}

}  // namespace speechalign
