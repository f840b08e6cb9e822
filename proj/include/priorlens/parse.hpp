#pragma once

#include <optional>
#include <string_view>

namespace priorlens {

/// Pulls a numeric prediction out of raw model text: the first number after
/// the last occurrence of `marker`, else the first number anywhere.
/// Thousands separators are stripped, a range "a-b" or "a to b" yields the
/// midpoint, trailing unit words are ignored. Empty optional when no number
/// is present.
std::optional<double> parse_response(std::string_view raw, std::string_view marker);

} // namespace priorlens
