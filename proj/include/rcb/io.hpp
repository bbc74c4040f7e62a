#pragma once

#include "rcb/array_model.hpp"
#include "rcb/beamformers.hpp"
#include "rcb/types.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcb {

/// Shortest decimal form that round-trips the exact double.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Row-major complex matrix, interleaved re/im columns.
inline void write_matrix_csv(std::ostream& os, const ComplexMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) os << ',';
      os << format_double(m(r, c).real()) << ',' << format_double(m(r, c).imag());
    }
    os << '\n';
  }
}

inline ComplexMatrix read_matrix_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() % 2 != 0) {
      throw std::invalid_argument("read_matrix_csv: odd number of columns");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("read_matrix_csv: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("read_matrix_csv: empty input");
  ComplexMatrix m(rows.size(), rows.front().size() / 2);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = Complex(rows[r][2 * c], rows[r][2 * c + 1]);
    }
  }
  return m;
}

/// One row per snapshot, interleaved re/im per element.
inline void write_snapshots_csv(std::ostream& os, const SnapshotSet& snapshots) {
  write_matrix_csv(os, snapshots.snapshots.transpose());
}

/// Columns re,im; one row per weight entry.
inline void write_weights_csv(std::ostream& os, const Beamformer& w) {
  os << "re,im\n";
  for (Eigen::Index i = 0; i < w.weights.size(); ++i) {
    os << format_double(w.weights(i).real()) << ',' << format_double(w.weights(i).imag())
       << '\n';
  }
}

/// Columns theta_rad,theta_deg,value.
inline void write_spectrum_csv(std::ostream& os, const SpectrumGrid& spectrum) {
  os << "theta_rad,theta_deg,value\n";
  for (Eigen::Index i = 0; i < spectrum.thetas.size(); ++i) {
    const double t = spectrum.thetas(i);
    os << format_double(t) << ',' << format_double(t * 180.0 / pi) << ','
       << format_double(spectrum.values(i)) << '\n';
  }
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_file: cannot open " + path);
  out << contents;
  if (!out) throw std::runtime_error("write_file: write failed for " + path);
}

}  // namespace rcb
