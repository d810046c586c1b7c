#pragma once

// Minimal RFC 4180 reader/writer: comma separator, double-quote quoting,
// embedded quotes doubled, quoted fields may span lines.

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace veritas::csv {

struct Record {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

/// Reads all records. Blank lines are skipped. Throws DataError on an
/// unterminated quoted field.
std::vector<Record> read(std::istream& in);

/// Quotes a field if it contains a separator, quote or line break.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace veritas::csv
