#pragma once

// Deterministic report emission: JSON with sorted keys and 17-significant-digit
// numbers, RFC-4180 CSV, and write-then-rename file output.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace holderlab {

using json = nlohmann::json;

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void dump_string(std::ostream& os, const std::string& s) {
  // nlohmann escapes strings the same way for every run
  os << json(s).dump();
}

inline void dump_json(std::ostream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map keeps keys sorted
        if (!first) os << ",\n";
        first = false;
        os << pad;
        dump_string(os, it.key());
        os << ": ";
        dump_json(os, it.value(), indent, depth + 1);
      }
      os << '\n' << close_pad << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        dump_json(os, j[i], indent, depth + 1);
      }
      os << '\n' << close_pad << ']';
      return;
    }
    case json::value_t::number_float:
      os << format_number(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace detail

inline std::string dump_json(const json& j) {
  std::ostringstream os;
  detail::dump_json(os, j, 2, 0);
  os << '\n';
  return os.str();
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

/// Small RFC-4180 table; rows end with CRLF.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw std::invalid_argument("csv: row width does not match header");
    rows_.push_back(std::move(row));
  }

  std::string str() const {
    std::string out;
    auto emit = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(r[i]);
      }
      out += "\r\n";
    };
    emit(header_);
    for (const auto& r : rows_) emit(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes to a sibling temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os << content;
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace holderlab
