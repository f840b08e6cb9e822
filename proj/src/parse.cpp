#include "priorlens/parse.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

namespace priorlens {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

struct NumberMatch {
    double value = 0.0;
    std::size_t begin = std::string_view::npos;
    std::size_t end = 0;
    bool found = false;
};

// Scans forward from `from` for a number. Commas are treated as thousands
// separators only when they join groups of exactly three digits.
NumberMatch scan_number(std::string_view s, std::size_t from) {
    NumberMatch m;
    std::size_t i = from;
    while (i < s.size() && !is_digit(s[i])) ++i;
    if (i >= s.size()) return m;

    m.begin = i;
    std::string digits;
    while (i < s.size() && is_digit(s[i])) digits += s[i++];
    // ",ddd" groups not followed by a fourth digit.
    while (i < s.size() && s[i] == ',' && i + 3 < s.size() && is_digit(s[i + 1]) &&
           is_digit(s[i + 2]) && is_digit(s[i + 3]) &&
           (i + 4 >= s.size() || !is_digit(s[i + 4]))) {
        digits += s.substr(i + 1, 3);
        i += 4;
    }
    if (i + 1 < s.size() && s[i] == '.' && is_digit(s[i + 1])) {
        digits += '.';
        ++i;
        while (i < s.size() && is_digit(s[i])) digits += s[i++];
    }
    m.end = i;

    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || !std::isfinite(v))
        return {};
    m.value = v;
    m.found = true;
    return m;
}

// Detects "a-b" / "a to b" immediately after the first number and returns the
// partner; anything else after the number is left alone.
NumberMatch range_partner(std::string_view s, const NumberMatch& first) {
    std::size_t i = first.end;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    bool dash = false;
    if (i < s.size() && s[i] == '-') {
        dash = true;
        ++i;
    } else if (i + 1 < s.size() && (s[i] == 't' || s[i] == 'T') &&
               (s[i + 1] == 'o' || s[i + 1] == 'O') &&
               (i + 2 >= s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 2])))) {
        dash = true;
        i += 2;
    }
    if (!dash) return {};
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size() || !is_digit(s[i])) return {};
    return scan_number(s, i);
}

} // namespace

std::optional<double> parse_response(std::string_view raw, std::string_view marker) {
    std::size_t search_from = 0;
    if (!marker.empty()) {
        const std::size_t at = raw.rfind(marker);
        if (at != std::string_view::npos) search_from = at + marker.size();
    }
    NumberMatch m = scan_number(raw, search_from);
    if (!m.found && search_from > 0) m = scan_number(raw, 0);
    if (!m.found) return std::nullopt;

    const NumberMatch partner = range_partner(raw, m);
    if (partner.found) return 0.5 * (m.value + partner.value);
    return m.value;
}

} // namespace priorlens
