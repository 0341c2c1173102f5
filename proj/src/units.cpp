#include "su11/units.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "su11/error.hpp"

namespace su11 {
namespace {

struct Prefix {
  std::string_view symbol;
  double scale;
};

constexpr std::array<Prefix, 10> prefixes{{
    {"T", 1e12}, {"G", 1e9}, {"M", 1e6}, {"k", 1e3}, {"m", 1e-3},
    {"u", 1e-6}, {"\xC2\xB5", 1e-6}, {"n", 1e-9}, {"p", 1e-12}, {"f", 1e-15},
}};

std::string_view base_unit(Dimension dim) {
  switch (dim) {
  case Dimension::length: return "m";
  case Dimension::time: return "s";
  case Dimension::energy: return "J";
  case Dimension::power: return "W";
  case Dimension::frequency: return "Hz";
  case Dimension::area: return "m2";
  case Dimension::susceptibility: return "m/V";
  case Dimension::dimensionless: return "";
  }
  return "";
}

} // namespace

double parse_quantity(std::string_view text, Dimension dim, std::string_view field) {
  auto fail = [&](std::string_view why) -> double {
    throw ValidationError(fmt::format("{}: cannot parse '{}' ({})", field, text, why));
  };

  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) return fail("empty");

  double number = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), number);
  if (ec != std::errc{}) return fail("no leading number");
  std::string_view suffix(ptr, static_cast<std::size_t>(text.data() + text.size() - ptr));
  while (!suffix.empty() && suffix.front() == ' ') suffix.remove_prefix(1);
  if (!std::isfinite(number)) return fail("not finite");
  if (suffix.empty()) return number;

  const std::string_view unit = base_unit(dim);
  if (unit.empty()) return fail("quantity is dimensionless");
  if (!suffix.ends_with(unit)) return fail(fmt::format("expected unit '{}'", unit));
  std::string_view prefix = suffix.substr(0, suffix.size() - unit.size());
  if (prefix.empty()) return number;
  for (const auto& p : prefixes) {
    if (p.symbol == prefix) {
      // area prefixes apply to the length before squaring: 1um2 = 1e-12 m^2
      const double scale = dim == Dimension::area ? p.scale * p.scale : p.scale;
      return number * scale;
    }
  }
  return fail(fmt::format("unknown prefix '{}'", prefix));
}

double quantity_from_json(const nlohmann::json& value, Dimension dim, std::string_view field) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) return parse_quantity(value.get_ref<const std::string&>(), dim, field);
  throw ValidationError(fmt::format("{}: expected a number or a string with unit", field));
}

} // namespace su11
