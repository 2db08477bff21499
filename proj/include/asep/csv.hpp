#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace asep {

enum class ColumnType { Real, Integer, Text, Boolean };

struct Column {
  std::string name;
  ColumnType type = ColumnType::Real;
};

using CsvSchema = std::vector<Column>;
using CsvCell = std::variant<double, std::int64_t, std::string, bool>;
using CsvRecord = std::vector<CsvCell>;

// RFC-4180 text with LF line endings; reals use '.' and 17 significant digits.
// Every record must match the schema cell for cell. Non-finite reals are rejected.
std::string format_csv(const CsvSchema& schema, const std::vector<CsvRecord>& records);

// format_csv to a file; ErrorKind::Io when the path cannot be written.
void emit_results(const std::vector<CsvRecord>& records, const CsvSchema& schema, const std::string& path);

}  // namespace asep
