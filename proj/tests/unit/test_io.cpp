#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>

#include "stocca/errors.hpp"
#include "stocca/io.hpp"
#include "stocca/reference.hpp"
#include "test_support.hpp"

using namespace stocca;
namespace fs = std::filesystem;
namespace ts = testing_support;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("stocca_test_io_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string write_text(const std::string& name, const std::string& body) {
  const fs::path p = scratch() / name;
  std::ofstream(p, std::ios::binary) << body;
  return p.string();
}

std::string error_of(const std::string& path) {
  try {
    load_csv_matrix(path);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

void put_be32(std::string& s, std::uint32_t v) {
  for (int k = 3; k >= 0; --k) s.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

std::string idx_header(std::uint32_t magic, std::uint32_t count) {
  std::string s;
  put_be32(s, magic);
  put_be32(s, count);
  put_be32(s, 28);
  put_be32(s, 28);
  return s;
}

}  // namespace

TEST_CASE("CSV rows are samples") {
  const MatrixXd m = load_csv_matrix(write_text("a.csv", "1,2\n3,4\n"));
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 2);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 0) == 2.0);
  CHECK(m(0, 1) == 3.0);
  CHECK(m(1, 1) == 4.0);
}

TEST_CASE("CSV header line and blank lines are skipped") {
  const MatrixXd m = load_csv_matrix(write_text("h.csv", "a,b,c\n\n1.5,-2,3e-1\r\n 4 , 5 ,+6\n"));
  REQUIRE(m.rows() == 3);
  REQUIRE(m.cols() == 2);
  CHECK(m(2, 0) == 0.3);
  CHECK(m(2, 1) == 6.0);
}

TEST_CASE("CSV errors name the file and line") {
  const std::string ragged = write_text("r.csv", "1,2\n3,4,5\n");
  const std::string msg = error_of(ragged);
  CHECK(msg.find(ragged + ":2") != std::string::npos);
  CHECK(msg.find("ragged row") != std::string::npos);

  const std::string bad = write_text("n.csv", "x,y\n1,2\n3,oops\n");
  const std::string msg2 = error_of(bad);
  CHECK(msg2.find(bad + ":3") != std::string::npos);
  CHECK(msg2.find("non-numeric cell") != std::string::npos);

  CHECK(!error_of(write_text("e.csv", "only,header\n")).empty());
  CHECK(!error_of((scratch() / "missing.csv").string()).empty());

  const std::string x = write_text("mx.csv", "1\n2\n3\n");
  const std::string y = write_text("my.csv", "1\n2\n");
  try {
    load_csv_pair(x, y, 0.1, 0.1);
    FAIL("expected a mismatch error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("sample count mismatch") != std::string::npos);
  }
}

TEST_CASE("a single sample centres to zero and gives ρ1 = 0") {
  const CcaDataset ds = load_csv_pair(write_text("sx.csv", "1,2,3\n"), write_text("sy.csv", "4,5\n"), 0.1, 0.2);
  CHECK(ds.n() == 1);
  CHECK(ds.x().to_dense().norm() == 0.0);
  const ReferenceSolution ref = exact_solution(ds);
  CHECK(ref.rho1() == 0.0);
  CHECK(ref.rank == 0);
}

TEST_CASE("CSV write then load round-trips") {
  std::mt19937_64 rng(4);
  const MatrixXd m = ts::gaussian(5, 17, rng) * 1e3;
  const std::string p = (scratch() / "rt.csv").string();
  write_csv_matrix(p, m);
  const MatrixXd back = load_csv_matrix(p);
  REQUIRE(back.rows() == 5);
  REQUIRE(back.cols() == 17);
  CHECK((back - m).cwiseAbs().maxCoeff() <= 1e-12 * m.cwiseAbs().maxCoeff());
}

TEST_CASE("libsvm parsing") {
  const std::string p = write_text("a.svm", "1 1:0.5 3:2\n# comment\n\n-1 2:1.25\n0 1:-1 # trailing\n");
  const SparseMatrix m = load_libsvm(p);
  REQUIRE(m.rows() == 3);
  REQUIRE(m.cols() == 3);
  const MatrixXd d = MatrixXd(m);
  CHECK(d(0, 0) == 0.5);
  CHECK(d(2, 0) == 2.0);
  CHECK(d(1, 1) == 1.25);
  CHECK(d(0, 2) == -1.0);
  CHECK(d.sum() == doctest::Approx(2.75));
  CHECK(load_libsvm(p, 6).rows() == 6);
  CHECK_THROWS_AS(load_libsvm(p, 2), ConfigError);
  CHECK_THROWS_AS(load_libsvm(write_text("b.svm", "1 0:1\n")), ConfigError);
  CHECK_THROWS_AS(load_libsvm(write_text("c.svm", "1 2:x\n")), ConfigError);

  const CcaDataset ds = load_libsvm_pair(p, write_text("d.svm", "1:1\n2:1\n1:2 2:2\n"), 0.1, 0.1);
  CHECK(ds.x().is_sparse());
  CHECK(ds.n() == 3);
  CHECK(ds.x().column_mean().norm() <= 1e-15);
  CHECK_THROWS_AS(load_libsvm_pair(p, write_text("e.svm", "1:1\n"), 0.1, 0.1), ConfigError);
}

TEST_CASE("MNIST idx images split into left and right halves") {
  std::string blank = idx_header(0x00000803u, 2);
  blank.append(2 * 784, '\0');
  const CcaDataset zero = load_mnist_idx_split(write_text("blank.idx", blank), 0.1, 0.1);
  CHECK(zero.dx() == 392);
  CHECK(zero.dy() == 392);
  CHECK(zero.n() == 2);
  CHECK(zero.x().to_dense().norm() == 0.0);
  CHECK(zero.y().to_dense().norm() == 0.0);

  // Image 1 lights pixel (row 3, col 2) on the left and (row 5, col 20) on the right.
  std::string two = idx_header(0x00000803u, 2);
  std::string pixels(2 * 784, '\0');
  pixels[784 + 3 * 28 + 2] = static_cast<char>(255);
  pixels[784 + 5 * 28 + 20] = static_cast<char>(51);
  two += pixels;
  const CcaDataset ds = load_mnist_idx_split(write_text("two.idx", two), 0.1, 0.1);
  const MatrixXd x = ds.x().to_dense();
  const MatrixXd y = ds.y().to_dense();
  CHECK(x(3 * 14 + 2, 1) == doctest::Approx(0.5));  // centred: 1 − mean 0.5
  CHECK(x(3 * 14 + 2, 0) == doctest::Approx(-0.5));
  CHECK(y(5 * 14 + 6, 1) == doctest::Approx(0.1));  // 51/255 = 0.2, minus 0.1
  CHECK(x.cwiseAbs().sum() == doctest::Approx(1.0));
  CHECK(y.cwiseAbs().sum() == doctest::Approx(0.2));

  std::string bad = idx_header(0x00000801u, 1);
  bad.append(784, '\0');
  try {
    load_mnist_idx_split(write_text("bad.idx", bad), 0.1, 0.1);
    FAIL("expected bad magic");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad magic") != std::string::npos);
  }

  std::string short_file = idx_header(0x00000803u, 3);
  short_file.append(784 + 100, '\0');
  try {
    load_mnist_idx_split(write_text("short.idx", short_file), 0.1, 0.1);
    FAIL("expected truncation");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
  }
  CHECK_THROWS_AS(load_mnist_idx_split(write_text("hdr.idx", std::string("\0\0\x08", 3)), 0.1, 0.1), ConfigError);
}
