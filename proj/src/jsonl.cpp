#include "jsonl.hpp"

#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <system_error>

namespace xlqa::detail {

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCode::io, "cannot open input '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open output '" + path.string() + "'");
  return out;
}

void rethrow_positioned(std::string_view source, std::size_t line) {
  const std::string where = std::string(source) + " line " + std::to_string(line) + ": ";
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), where + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, where + "malformed record: " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::internal, where + e.what());
  }
}

namespace {

const Json& require(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::parse, std::string("missing field '") + key + "'");
  return *it;
}

[[noreturn]] void wrong_type(const char* key, const char* expected) {
  throw Error(ErrorCode::parse, std::string("field '") + key + "' must be " + expected);
}

}  // namespace

std::string get_string(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_string()) wrong_type(key, "a string");
  return v.get<std::string>();
}

std::optional<std::string> get_optional_string(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) wrong_type(key, "a string");
  return it->get<std::string>();
}

double get_double(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number()) wrong_type(key, "a number");
  return v.get<double>();
}

std::optional<double> get_optional_double(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) wrong_type(key, "a number");
  return it->get<double>();
}

std::size_t get_size(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number_unsigned()) wrong_type(key, "a non-negative integer");
  return v.get<std::size_t>();
}

bool get_bool(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_boolean()) wrong_type(key, "a boolean");
  return v.get<bool>();
}

std::vector<std::string> get_string_array(const Json& j, const char* key) {
  const Json& v = get_array(j, key);
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_string()) wrong_type(key, "an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

const Json& get_array(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_array()) wrong_type(key, "an array");
  return v;
}

LanguageCode get_language(const Json& j, const char* key, const LanguageSet& allowed) {
  LanguageCode code = LanguageCode::parse(get_string(j, key));
  if (!allowed.contains(code)) {
    throw Error(ErrorCode::invalid_argument,
                "language '" + code.str() + "' is not in the configured language set");
  }
  return code;
}

void write_json_line(std::ostream& out, const Json& j) {
  out << j.dump() << '\n';
  if (!out) throw Error(ErrorCode::io, "write failure");
}

std::string format_double(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "non-finite value");
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error(ErrorCode::internal, "double formatting failed");
  return std::string(buf, ptr);
}

}  // namespace xlqa::detail
