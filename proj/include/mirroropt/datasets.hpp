#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mirroropt/errors.hpp"
#include "mirroropt/geometry.hpp"
#include "mirroropt/rng.hpp"

namespace mirroropt {

struct Dataset {
  Mat features;  // n x d
  Vec labels;    // entries in {-1, +1}
  std::string name;

  int n() const { return static_cast<int>(features.rows()); }
  int d() const { return static_cast<int>(features.cols()); }
};

// Resolve a dataset path, honoring the MIRROROPT_DATA_DIR cache override.
inline std::string resolve_data_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::exists(path)) return path;
  if (const char* dir = std::getenv("MIRROROPT_DATA_DIR")) {
    const fs::path joined = fs::path(dir) / path;
    if (fs::exists(joined)) return joined.string();
  }
  return path;
}

// Sparse LIBSVM text format: "label idx:val idx:val ...", 1-based indices.
// Labels are remapped to {-1,+1} with 0 -> -1.
inline Dataset read_libsvm(const std::string& path) {
  const std::string resolved = resolve_data_path(path);
  std::ifstream in(resolved);
  if (!in) throw IoError("cannot open " + resolved);

  std::vector<double> labels;
  std::vector<std::vector<std::pair<int, double>>> rows;
  int max_index = 0;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip trailing comments
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line

    double label;
    try {
      size_t used = 0;
      label = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineno) + ": bad label '" + tok + "'");
    }
    if (label == 0.0) label = -1.0;
    if (label != 1.0 && label != -1.0)
      throw ParseError("line " + std::to_string(lineno) + ": label must be in {-1,0,+1}");

    std::vector<std::pair<int, double>> row;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw ParseError("line " + std::to_string(lineno) + ": expected idx:val, got '" + tok + "'");
      int idx;
      double val;
      try {
        idx = std::stoi(tok.substr(0, colon));
        val = std::stod(tok.substr(colon + 1));
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineno) + ": bad feature '" + tok + "'");
      }
      if (idx < 1) throw ParseError("line " + std::to_string(lineno) + ": indices are 1-based");
      max_index = std::max(max_index, idx);
      row.emplace_back(idx, val);
    }
    labels.push_back(label);
    rows.push_back(std::move(row));
  }

  Dataset ds;
  const int n = static_cast<int>(labels.size());
  ds.features = Mat::Zero(n, max_index);
  ds.labels = Vec(n);
  for (int i = 0; i < n; ++i) {
    ds.labels[i] = labels[i];
    for (const auto& [idx, val] : rows[i]) ds.features(i, idx - 1) = val;
  }
  ds.name = std::filesystem::path(path).filename().string();
  return ds;
}

// Replace features with the RBF kernel matrix K_ij = exp(-gamma ‖x_i - x_j‖²),
// gamma being the bandwidth parameter.
inline Dataset rbf_features(const Dataset& data, double bandwidth) {
  if (!(bandwidth > 0.0)) throw DomainError("rbf bandwidth must be positive");
  const int n = data.n();
  Dataset out;
  out.labels = data.labels;
  out.name = data.name + "_rbf";
  out.features = Mat(n, n);
  for (int i = 0; i < n; ++i) {
    out.features(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double k = std::exp(-bandwidth * (data.features.row(i) - data.features.row(j)).squaredNorm());
      out.features(i, j) = k;
      out.features(j, i) = k;
    }
  }
  return out;
}

// Linearly separable binary dataset on the unit sphere: every point satisfies
// y_i <u, x_i> >= margin for a hidden unit separator u (rejection sampling).
inline Dataset synth_margin_dataset(int n, int d, double margin, std::uint64_t seed) {
  if (n < 2 || d < 1) throw DomainError("synth_margin_dataset requires n >= 2 and d >= 1");
  if (!(margin > 0.0 && margin < 1.0)) throw DomainError("margin must lie in (0,1)");
  SplitMix64 rng(seed);

  Vec u(d);
  for (int j = 0; j < d; ++j) u[j] = rng.normal();
  u.normalize();

  Dataset ds;
  ds.features = Mat(n, d);
  ds.labels = Vec(n);
  ds.name = "synth_margin";
  Vec x(d);
  for (int i = 0; i < n; ++i) {
    double score = 0.0;
    do {
      for (int j = 0; j < d; ++j) x[j] = rng.normal();
      x.normalize();
      score = u.dot(x);
    } while (std::abs(score) < margin);
    ds.features.row(i) = x.transpose();
    ds.labels[i] = score >= 0.0 ? 1.0 : -1.0;
  }
  return ds;
}

}  // namespace mirroropt
