#include "mrlab/value.hpp"

#include <charconv>

namespace mrlab {

Value parse_value(std::string_view token) {
  std::int64_t number = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && token.front() == '+') return std::string(token);
  auto [end, ec] = std::from_chars(first, last, number);
  if (ec == std::errc() && end == last) return number;
  return std::string(token);
}

std::string to_string(const Value& value) {
  if (const auto* number = std::get_if<std::int64_t>(&value)) return std::to_string(*number);
  return std::get<std::string>(value);
}

std::string to_literal(const Value& value) {
  if (const auto* number = std::get_if<std::int64_t>(&value)) return std::to_string(*number);
  std::string out = "'";
  for (char c : std::get<std::string>(value)) {
    if (c == '\'') out += '\'';
    out += c;
  }
  out += '\'';
  return out;
}

std::string to_string(const Row& row, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += separator;
    out += to_string(row[i]);
  }
  return out;
}

}  // namespace mrlab
