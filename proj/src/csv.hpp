#pragma once

// Minimal RFC 4180 CSV: fields containing a comma, quote, CR or LF are quoted
// and embedded quotes doubled.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace xlqa::detail {

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Returns false at end of input. Throws Error(parse) on an unterminated quote.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields);

}  // namespace xlqa::detail
