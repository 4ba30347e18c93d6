#include "oblmp/matrix_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace oblmp {
namespace {

constexpr const char* kMagic = "oblmp-matrix";

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t line_no) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    throw ParseError("line " + std::to_string(line_no) + ": not a number: '" + cell + "'");
  }
  return v;
}

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

std::vector<std::string> numbered_columns(const std::string& prefix, Eigen::Index count) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) names.push_back(prefix + "_" + std::to_string(i));
  return names;
}

MatrixFile read_matrix_csv(std::istream& in) {
  MatrixFile file;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (line_no == 1) {
        std::istringstream ss(t.substr(1));
        std::string token;
        ss >> token;
        if (token != kMagic) continue;
        while (ss >> token) {
          const auto eq = token.find('=');
          if (eq == std::string::npos) throw ParseError("line 1: malformed metadata '" + token + "'");
          file.metadata[token.substr(0, eq)] = token.substr(eq + 1);
        }
      }
      continue;
    }
    if (!have_header) {
      file.column_names = split_commas(t);
      have_header = true;
      continue;
    }
    auto cells = split_commas(t);
    if (cells.size() != file.column_names.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(file.column_names.size()) + " columns, got " +
                       std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, line_no));
    rows.push_back(std::move(row));
  }
  if (!have_header) {
    // A matrix with no columns has no header line.
    auto it = file.metadata.find("cols");
    if (it == file.metadata.end() || it->second != "0") throw ParseError("missing column header");
    Eigen::Index nrows = 0;
    if (auto r = file.metadata.find("rows"); r != file.metadata.end()) nrows = std::stol(r->second);
    file.data.resize(nrows, 0);
    return file;
  }

  const auto ncols = static_cast<Eigen::Index>(file.column_names.size());
  file.data.resize(static_cast<Eigen::Index>(rows.size()), ncols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index c = 0; c < ncols; ++c) file.data(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  }
  if (auto it = file.metadata.find("rows"); it != file.metadata.end()) {
    if (std::to_string(file.data.rows()) != it->second) {
      throw ParseError("row count " + std::to_string(file.data.rows()) + " disagrees with header rows=" + it->second);
    }
  }
  return file;
}

MatrixFile read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_matrix_csv(in);
}

void write_matrix_csv(std::ostream& out, const MatrixFile& file) {
  if (static_cast<Eigen::Index>(file.column_names.size()) != file.data.cols()) {
    throw Error("write_matrix_csv: column names do not match data");
  }
  out << "# " << kMagic << " rows=" << file.data.rows() << " cols=" << file.data.cols();
  for (const auto& [k, v] : file.metadata) {
    if (k == "rows" || k == "cols") continue;
    out << ' ' << k << '=' << v;
  }
  out << '\n';
  if (file.data.cols() == 0) return;
  for (std::size_t i = 0; i < file.column_names.size(); ++i) {
    out << (i ? "," : "") << file.column_names[i];
  }
  out << '\n';
  for (Eigen::Index r = 0; r < file.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < file.data.cols(); ++c) {
      out << (c ? "," : "") << format_number(file.data(r, c));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const MatrixFile& file) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_matrix_csv(out, file);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace oblmp
