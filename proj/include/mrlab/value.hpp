#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mrlab {

/// A relational scalar. Integers order numerically, strings lexicographically,
/// and every integer orders before every string.
using Value = std::variant<std::int64_t, std::string>;
using Row = std::vector<Value>;

/// Integer if the whole token parses as one, otherwise a string.
Value parse_value(std::string_view token);

std::string to_string(const Value& value);

/// SQL-style literal: integers bare, strings single-quoted with '' escaping.
std::string to_literal(const Value& value);

std::string to_string(const Row& row, std::string_view separator = "\t");

}  // namespace mrlab
