#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "einit/core.hpp"

namespace einit::io {

enum class CloudFormat { Xyz, Csv, PlyAscii };

inline CloudFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".xyz" || ext == ".txt" || ext == ".pts") return CloudFormat::Xyz;
  if (ext == ".csv") return CloudFormat::Csv;
  if (ext == ".ply") return CloudFormat::PlyAscii;
  fail(ErrorKind::InvalidInput, "cannot infer cloud format from '" + path.string() + "'");
}

/// 17 significant digits: enough for an exact double round trip.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& token, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    if (std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(line, "non-numeric field '" + token + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (sep == ' ') {
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  }
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline PointCloud rows_to_cloud(const std::vector<std::vector<double>>& rows, std::size_t first_line) {
  if (rows.empty()) throw ParseError(first_line, "no points");
  const auto d = static_cast<Index>(rows.front().size());
  Matrix m(d, static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (Index i = 0; i < d; ++i) m(i, static_cast<Index>(j)) = rows[j][static_cast<std::size_t>(i)];
  }
  return PointCloud(std::move(m));
}

/// Whitespace- or comma-separated numeric rows. Blank lines and '#' comments are skipped.
inline PointCloud read_rows(std::istream& in, char sep, bool header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_pending = header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const std::vector<std::string> fields = split(t, sep);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const std::string& f : fields) row.push_back(parse_number(f, line_no));
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw ParseError(line_no, "ragged row: expected " + std::to_string(width) + " fields, got " +
                                    std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows_to_cloud(rows, line_no);
}

/// ASCII PLY: vertex x/y/z are read, other vertex scalar properties skipped,
/// other elements skipped with a warning.
inline PointCloud read_ply(std::istream& in, std::vector<std::string>* warnings) {
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
    bool has_list = false;
  };
  std::vector<Element> elements;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line) || trim(line) != "ply") throw ParseError(1, "missing 'ply' magic");
  ++line_no;
  bool ended = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::vector<std::string> tok = split(trim(line), ' ');
    if (tok.empty()) continue;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii") throw ParseError(line_no, "only ascii PLY is supported");
    } else if (tok[0] == "comment" || tok[0] == "obj_info") {
      continue;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError(line_no, "malformed element line");
      Element e;
      e.name = tok[1];
      e.count = static_cast<std::size_t>(parse_number(tok[2], line_no));
      elements.push_back(e);
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError(line_no, "property before any element");
      if (tok.size() >= 2 && tok[1] == "list") {
        elements.back().has_list = true;
        elements.back().properties.push_back(tok.back());
      } else if (tok.size() == 3) {
        elements.back().properties.push_back(tok[2]);
      } else {
        throw ParseError(line_no, "malformed property line");
      }
    } else if (tok[0] == "end_header") {
      ended = true;
      break;
    } else {
      throw ParseError(line_no, "unexpected header line '" + tok[0] + "'");
    }
  }
  if (!ended) throw ParseError(line_no, "missing end_header");

  std::vector<std::vector<double>> rows;
  bool found_vertex = false;
  const std::size_t body_start = line_no + 1;
  for (const Element& e : elements) {
    const bool is_vertex = e.name == "vertex";
    std::array<int, 3> axes{-1, -1, -1};
    if (is_vertex) {
      found_vertex = true;
      if (e.has_list) throw ParseError(line_no, "list properties on vertices are not supported");
      for (std::size_t k = 0; k < e.properties.size(); ++k) {
        if (e.properties[k] == "x") axes[0] = static_cast<int>(k);
        if (e.properties[k] == "y") axes[1] = static_cast<int>(k);
        if (e.properties[k] == "z") axes[2] = static_cast<int>(k);
      }
      if (axes[0] < 0 || axes[1] < 0 || axes[2] < 0) throw ParseError(line_no, "vertex element lacks x, y or z");
    } else if (warnings) {
      warnings->push_back("ignored PLY element '" + e.name + "' (" + std::to_string(e.count) + " entries)");
    }
    for (std::size_t r = 0; r < e.count; ++r) {
      if (!std::getline(in, line)) throw ParseError(line_no, "unexpected end of file in element '" + e.name + "'");
      ++line_no;
      if (!is_vertex) continue;
      const std::vector<std::string> tok = split(trim(line), ' ');
      if (tok.size() != e.properties.size()) {
        throw ParseError(line_no, "expected " + std::to_string(e.properties.size()) + " vertex fields");
      }
      rows.push_back({parse_number(tok[static_cast<std::size_t>(axes[0])], line_no),
                      parse_number(tok[static_cast<std::size_t>(axes[1])], line_no),
                      parse_number(tok[static_cast<std::size_t>(axes[2])], line_no)});
    }
  }
  if (!found_vertex) throw ParseError(0, "no vertex element");
  return rows_to_cloud(rows, body_start);
}

}  // namespace detail

inline PointCloud read_cloud(std::istream& in, CloudFormat format, std::vector<std::string>* warnings = nullptr) {
  switch (format) {
    case CloudFormat::Xyz: return detail::read_rows(in, ' ', false);
    case CloudFormat::Csv: return detail::read_rows(in, ',', true);
    case CloudFormat::PlyAscii: return detail::read_ply(in, warnings);
  }
  fail(ErrorKind::InvalidInput, "unknown cloud format");
}

inline PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format,
                             std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  return read_cloud(in, format, warnings);
}

inline PointCloud load_cloud(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr) {
  return load_cloud(path, format_from_path(path), warnings);
}

inline void write_cloud(std::ostream& out, const PointCloud& cloud, CloudFormat format) {
  const Index d = cloud.dim();
  const char sep = format == CloudFormat::Csv ? ',' : ' ';
  if (format == CloudFormat::PlyAscii) {
    if (d != 3) fail(ErrorKind::InvalidInput, "PLY output needs a 3-D cloud");
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
        << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  } else if (format == CloudFormat::Csv) {
    for (Index i = 0; i < d; ++i) {
      if (i) out << ',';
      out << (d <= 3 ? std::string(1, "xyz"[i]) : "c" + std::to_string(i));
    }
    out << '\n';
  }
  for (Index j = 0; j < cloud.size(); ++j) {
    for (Index i = 0; i < d; ++i) {
      if (i) out << sep;
      out << format_double(cloud.matrix()(i, j));
    }
    out << '\n';
  }
}

inline void save_cloud(const std::filesystem::path& path, const PointCloud& cloud, CloudFormat format) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  write_cloud(out, cloud, format);
  if (!out) fail(ErrorKind::IoError, "write failed for '" + path.string() + "'");
}

inline void save_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  save_cloud(path, cloud, format_from_path(path));
}

}  // namespace einit::io
