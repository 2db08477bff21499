#include "asep/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "asep/error.hpp"

namespace asep {

namespace {

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string real_text(double v, const std::string& column, std::size_t row) {
  if (!std::isfinite(v))
    fail(ErrorKind::InvalidArgument, "csv: non-finite value in column '" + column + "', record " + std::to_string(row));
  char buf[40];
  // to_chars never consults the locale
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string format_csv(const CsvSchema& schema, const std::vector<CsvRecord>& records) {
  require(!schema.empty(), "csv: empty schema");
  std::string out;
  for (std::size_t j = 0; j < schema.size(); ++j) out += (j ? "," : "") + quoted(schema[j].name);
  out += '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() != schema.size())
      fail(ErrorKind::InvalidArgument, "csv: record " + std::to_string(i) + " has " + std::to_string(rec.size()) +
                                           " cells, schema has " + std::to_string(schema.size()));
    for (std::size_t j = 0; j < rec.size(); ++j) {
      const auto& col = schema[j];
      if (j) out += ',';
      const auto mismatch = [&] {
        fail(ErrorKind::InvalidArgument, "csv: record " + std::to_string(i) + " column '" + col.name + "' has the wrong type");
      };
      switch (col.type) {
        case ColumnType::Real:
          if (const auto* v = std::get_if<double>(&rec[j]))
            out += real_text(*v, col.name, i);
          else
            mismatch();
          break;
        case ColumnType::Integer:
          if (const auto* v = std::get_if<std::int64_t>(&rec[j]))
            out += std::to_string(*v);
          else
            mismatch();
          break;
        case ColumnType::Text:
          if (const auto* v = std::get_if<std::string>(&rec[j]))
            out += quoted(*v);
          else
            mismatch();
          break;
        case ColumnType::Boolean:
          if (const auto* v = std::get_if<bool>(&rec[j]))
            out += *v ? "true" : "false";
          else
            mismatch();
          break;
      }
    }
    out += '\n';
  }
  return out;
}

void emit_results(const std::vector<CsvRecord>& records, const CsvSchema& schema, const std::string& path) {
  const std::string text = format_csv(schema, records);  // validate before touching the file
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, path + ": cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) fail(ErrorKind::Io, path + ": write failed");
}

}  // namespace asep
