#pragma once

#include <string>

#include "stocca/dataset.hpp"

namespace stocca {

/// A numeric CSV file read as one sample per row. A first line with no
/// numeric cell is taken as a header and skipped.
/// Returns features × samples (transposed on load).
MatrixXd load_csv_matrix(const std::string& path);

/// Both views from CSV files with one sample per row; the sample counts
/// must agree. The result is centred.
CcaDataset load_csv_pair(const std::string& path_x, const std::string& path_y, double gamma_x, double gamma_y);

/// Writes features × samples as one sample per row, with a header
/// f0,f1,... and round-trip precision.
void write_csv_matrix(const std::string& path, const MatrixXd& view);

/// "label index:value ..." text, 1-based indices, labels ignored.
/// `dim` = 0 infers the dimension from the largest index.
SparseMatrix load_libsvm(const std::string& path, Index dim = 0);

CcaDataset load_libsvm_pair(const std::string& path_x, const std::string& path_y, double gamma_x, double gamma_y);

/// Big-endian idx3 images (magic 0x00000803, 28 × 28). x is the left 14
/// pixel columns of each image and y the right 14, scaled to [0, 1].
CcaDataset load_mnist_idx_split(const std::string& images_path, double gamma_x, double gamma_y);

}  // namespace stocca
