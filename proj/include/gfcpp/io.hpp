#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace gfcpp::io {

/// Shortest-safe decimal form with 17 significant digits, '.' separator.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Writes `t,value` rows with LF line endings.
inline void write_csv(const std::filesystem::path& file, std::span<const double> t, std::span<const double> value) {
  if (t.size() != value.size()) throw std::invalid_argument("write_csv: column length mismatch");
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  std::string text = "t,value\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    text += format_double(t[i]);
    text += ',';
    text += format_double(value[i]);
    text += '\n';
  }
  out << text;
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

inline void write_json(const std::filesystem::path& file, const nlohmann::ordered_json& j) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

}  // namespace gfcpp::io
