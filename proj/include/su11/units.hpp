#pragma once

#include <numbers>
#include <string_view>

#include <json.hpp>

namespace su11 {

namespace constants {
inline constexpr double c = 299792458.0;            // m/s
inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double epsilon0 = 8.8541878128e-12; // F/m
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
} // namespace constants

/// Physical dimension expected when parsing a quantity from text.
enum class Dimension { length, time, energy, power, frequency, area, susceptibility, dimensionless };

/// Parse "810nm", "1mm", "100um", "18ps", "0.6uJ", "1kHz", "1.2e-9" into SI.
/// A bare number is taken to be SI already. Throws ValidationError naming `field`.
double parse_quantity(std::string_view text, Dimension dim, std::string_view field);

/// Accepts a JSON number (SI) or a string with a unit suffix.
double quantity_from_json(const nlohmann::json& value, Dimension dim, std::string_view field);

} // namespace su11
