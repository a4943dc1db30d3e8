#pragma once

// Column tables with a metadata header, serialized as CSV or JSON.
//
// Numbers are written with 17 significant digits through std::to_chars, so the
// output is locale independent and reads back bit for bit.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "twobody/errors.hpp"

namespace twobody {

struct OutputTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

enum class TableFormat { csv, json };

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string to_csv(const OutputTable& table) {
  std::string out;
  for (const auto& [key, value] : table.metadata.items()) out += "# " + key + ": " + value.dump() + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline std::string to_json(const OutputTable& table) {
  // Rows are spliced in by hand to keep the 17-digit number format.
  nlohmann::ordered_json head = nlohmann::ordered_json::object();
  head["metadata"] = table.metadata;
  head["columns"] = table.columns;
  std::string out = head.dump(2);
  out.pop_back();  // closing brace
  while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
  out += ",\n  \"rows\": [";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out += r ? ",\n    [" : "\n    [";
    for (std::size_t i = 0; i < table.rows[r].size(); ++i) {
      if (i) out += ", ";
      out += format_number(table.rows[r][i]);
    }
    out += ']';
  }
  out += table.rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

inline std::string serialize(const OutputTable& table, TableFormat format) {
  return format == TableFormat::csv ? to_csv(table) : to_json(table);
}

inline double parse_number(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::invalid_argument("not a number: " + std::string(text));
  return v;
}

inline OutputTable from_csv(std::string_view text) {
  OutputTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      const std::size_t pos = s.find(',', start);
      parts.push_back(s.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return parts;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const std::size_t colon = line.find(": ");
      if (colon == std::string::npos) continue;
      table.metadata[line.substr(2, colon - 2)] = nlohmann::ordered_json::parse(line.substr(colon + 2));
      continue;
    }
    if (!header) {
      table.columns = split(line);
      header = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(parse_number(cell));
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline OutputTable from_json(std::string_view text) {
  const auto doc = nlohmann::ordered_json::parse(text);
  OutputTable table;
  table.metadata = doc.at("metadata");
  if (doc.contains("columns")) table.columns = doc.at("columns").get<std::vector<std::string>>();
  for (const auto& row : doc.at("rows")) table.rows.push_back(row.get<std::vector<double>>());
  return table;
}

// Writes through a temporary file in the same directory and renames it over
// `path`.  "-" or an empty path means standard output.
inline void write_text_atomically(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("<stdout>", "write failed");
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    out << text;
    out.flush();
    if (!out) throw IoError(path, "write failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(path, "cannot move output into place");
  }
}

inline void write_table(const OutputTable& table, TableFormat format, const std::string& path) {
  write_text_atomically(serialize(table, format), path);
}

}  // namespace twobody
