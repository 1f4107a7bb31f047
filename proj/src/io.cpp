#include "stocca/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "stocca/errors.hpp"

namespace stocca {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '"')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '"')) --e;
  return std::string(s.substr(b, e - b));
}

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::ifstream open_or_throw(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return in;
}

}  // namespace

MatrixXd load_csv_matrix(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<double> values;
  std::size_t width = 0;
  Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_cells(line);
    std::vector<double> parsed(cells.size());
    std::size_t numeric = 0;
    for (std::size_t j = 0; j < cells.size(); ++j) numeric += parse_double(cells[j], parsed[j]) ? 1 : 0;
    if (first_content) {
      first_content = false;
      if (numeric == 0) {
        width = cells.size();
        continue;
      }
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": ragged row (" + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(width) + ")");
    if (numeric != cells.size()) {
      for (std::size_t j = 0; j < cells.size(); ++j) {
        double tmp;
        if (!parse_double(cells[j], tmp))
          throw ConfigError(path + ":" + std::to_string(line_no) + ": non-numeric cell " + std::to_string(j + 1) +
                            " '" + cells[j] + "'");
      }
    }
    values.insert(values.end(), parsed.begin(), parsed.end());
    ++rows;
  }
  if (rows == 0) throw ConfigError(path + ": no data rows");
  // Row-major samples on disk are column-major features × samples.
  return Eigen::Map<const MatrixXd>(values.data(), static_cast<Index>(width), rows);
}

CcaDataset load_csv_pair(const std::string& path_x, const std::string& path_y, double gamma_x, double gamma_y) {
  MatrixXd x = load_csv_matrix(path_x);
  MatrixXd y = load_csv_matrix(path_y);
  if (x.cols() != y.cols())
    throw ConfigError("sample count mismatch: '" + path_x + "' has " + std::to_string(x.cols()) + " rows, '" + path_y +
                      "' has " + std::to_string(y.cols()));
  return CcaDataset::make(DataMatrix::dense(std::move(x)), DataMatrix::dense(std::move(y)), gamma_x, gamma_y,
                          Centering::apply);
}

void write_csv_matrix(const std::string& path, const MatrixXd& view) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot write '" + path + "'");
  for (Index r = 0; r < view.rows(); ++r) std::fprintf(f, r == 0 ? "f%td" : ",f%td", r);
  std::fputc('\n', f);
  for (Index i = 0; i < view.cols(); ++i) {
    for (Index r = 0; r < view.rows(); ++r) std::fprintf(f, r == 0 ? "%.17g" : ",%.17g", view(r, i));
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw ConfigError("error writing '" + path + "'");
}

SparseMatrix load_libsvm(const std::string& path, Index dim) {
  std::ifstream in = open_or_throw(path);
  std::vector<Eigen::Triplet<double, int>> triplets;
  std::string line;
  std::size_t line_no = 0;
  Index n = 0;
  Index max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;  // blank line
    // A leading token without ':' is the label.
    bool pending = tok.find(':') != std::string::npos;
    while (pending || (tokens >> tok)) {
      pending = false;
      const std::size_t colon = tok.find(':');
      long long idx = 0;
      double val = 0.0;
      bool ok = colon != std::string::npos && colon > 0;
      if (ok) {
        const auto r1 = std::from_chars(tok.data(), tok.data() + colon, idx);
        ok = r1.ec == std::errc() && r1.ptr == tok.data() + colon && idx >= 1;
      }
      if (ok) ok = parse_double(tok.substr(colon + 1), val);
      if (!ok) throw ConfigError(path + ":" + std::to_string(line_no) + ": bad feature '" + tok + "'");
      if (dim > 0 && idx > dim)
        throw ConfigError(path + ":" + std::to_string(line_no) + ": index " + std::to_string(idx) + " exceeds " +
                          std::to_string(dim));
      max_index = std::max<Index>(max_index, static_cast<Index>(idx));
      triplets.emplace_back(static_cast<int>(idx - 1), static_cast<int>(n), val);
    }
    ++n;
  }
  if (n == 0) throw ConfigError(path + ": no samples");
  SparseMatrix m(dim > 0 ? dim : std::max<Index>(max_index, 1), n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

CcaDataset load_libsvm_pair(const std::string& path_x, const std::string& path_y, double gamma_x, double gamma_y) {
  SparseMatrix x = load_libsvm(path_x);
  SparseMatrix y = load_libsvm(path_y);
  if (x.cols() != y.cols())
    throw ConfigError("sample count mismatch: '" + path_x + "' has " + std::to_string(x.cols()) + " samples, '" +
                      path_y + "' has " + std::to_string(y.cols()));
  return CcaDataset::make(DataMatrix::sparse(std::move(x)), DataMatrix::sparse(std::move(y)), gamma_x, gamma_y,
                          Centering::apply);
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ConfigError(path + ": truncated header (" + what + ")");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

CcaDataset load_mnist_idx_split(const std::string& images_path, double gamma_x, double gamma_y) {
  std::ifstream in = open_or_throw(images_path, std::ios::in | std::ios::binary);
  const std::uint32_t magic = read_be32(in, images_path, "magic");
  if (magic != 0x00000803u) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", magic);
    throw ConfigError(images_path + ": bad magic " + buf + " (expected 0x00000803)");
  }
  const std::uint32_t count = read_be32(in, images_path, "count");
  const std::uint32_t rows = read_be32(in, images_path, "rows");
  const std::uint32_t cols = read_be32(in, images_path, "cols");
  if (rows != 28 || cols != 28)
    throw ConfigError(images_path + ": expected 28x28 images, got " + std::to_string(rows) + "x" + std::to_string(cols));
  if (count == 0) throw ConfigError(images_path + ": no images");

  const Index n = count;
  constexpr int kSide = 28;
  constexpr int kHalf = 14;
  MatrixXd x(kSide * kHalf, n);
  MatrixXd y(kSide * kHalf, n);
  std::vector<unsigned char> img(kSide * kSide);
  for (Index i = 0; i < n; ++i) {
    if (!in.read(reinterpret_cast<char*>(img.data()), static_cast<std::streamsize>(img.size())))
      throw ConfigError(images_path + ": truncated at image " + std::to_string(i) + " of " + std::to_string(n));
    for (int r = 0; r < kSide; ++r) {
      for (int c = 0; c < kHalf; ++c) {
        x(r * kHalf + c, i) = img[r * kSide + c] / 255.0;
        y(r * kHalf + c, i) = img[r * kSide + kHalf + c] / 255.0;
      }
    }
  }
  return CcaDataset::make(DataMatrix::dense(std::move(x)), DataMatrix::dense(std::move(y)), gamma_x, gamma_y,
                          Centering::apply);
}

}  // namespace stocca
