#pragma once

// Helpers shared by the line-delimited readers and writers.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xlqa/error.hpp"
#include "xlqa/types.hpp"

namespace xlqa::detail {

using Json = nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path,
                         std::ios::openmode mode = std::ios::in);
std::ofstream open_output(const std::filesystem::path& path,
                          std::ios::openmode mode = std::ios::out);

// Prefixes the message of any Error thrown by `fn` with the source and line.
[[noreturn]] void rethrow_positioned(std::string_view source, std::size_t line);

template <class Fn>
void for_each_json_line(std::istream& in, std::string_view source, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Json j = Json::parse(text);
      if (!j.is_object()) throw Error(ErrorCode::parse, "record is not a JSON object");
      fn(j, line);
    } catch (...) {
      rethrow_positioned(source, line);
    }
  }
  if (in.bad()) throw Error(ErrorCode::io, std::string(source) + ": read failure");
}

std::string get_string(const Json& j, const char* key);
std::optional<std::string> get_optional_string(const Json& j, const char* key);
double get_double(const Json& j, const char* key);
std::optional<double> get_optional_double(const Json& j, const char* key);
std::size_t get_size(const Json& j, const char* key);
bool get_bool(const Json& j, const char* key);
std::vector<std::string> get_string_array(const Json& j, const char* key);
const Json& get_array(const Json& j, const char* key);
LanguageCode get_language(const Json& j, const char* key, const LanguageSet& allowed);

void write_json_line(std::ostream& out, const Json& j);

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace xlqa::detail
