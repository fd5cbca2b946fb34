// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ilda/corpus.hpp"
#include "ilda/types.hpp"

namespace testutil {

// Reference digamma, independent of the library implementation: shift into
// the smooth regime with long double accumulation, then take a Richardson-
// extrapolated central difference of lgamma. Good to ~1e-12 absolute for
// x <= 100; larger arguments are covered by ref_digamma_large.
inline double ref_digamma(double x) {
  long double shift = 0.0L;
  long double xl = x;
  while (xl < 20.0L) {
    shift += 1.0L / xl;
    xl += 1.0L;
  }
  const long double h = 1e-2L;
  auto central = [&](long double step) {
    return (static_cast<long double>(
                std::lgamma(static_cast<double>(xl + step))) -
            static_cast<long double>(
                std::lgamma(static_cast<double>(xl - step)))) /
           (2.0L * step);
  };
  const long double d1 = central(h);
  const long double d2 = central(h / 2.0L);
  return static_cast<double>((4.0L * d2 - d1) / 3.0L - shift);
}

// Four-term asymptotic expansion in long double; truncation error is below
// 1e-14 for x >= 100.
inline double ref_digamma_large(double x) {
  const long double xl = x;
  const long double z = 1.0L / (xl * xl);
  return static_cast<double>(std::log(xl) - 0.5L / xl -
                             z * (1.0L / 12.0L -
                                  z * (1.0L / 120.0L - z / 252.0L)));
}

// Straight-line reimplementation of the two per-document coordinate
// updates against the reference digamma; a fixed-point oracle shared by
// several suites. Runs exactly iters rounds, no early exit.
struct OracleFit {
  ilda::Vector alpha;
  ilda::Matrix pi;
};

inline OracleFit oracle_estep(const ilda::Document& doc,
                              const ilda::Matrix& beta, double alpha0,
                              int iters) {
  const Eigen::Index K = beta.cols();
  const Eigen::Index n = static_cast<Eigen::Index>(doc.entries.size());
  const ilda::Vector colsum = beta.colwise().sum().transpose();

  ilda::Matrix elog_phi(n, K);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < K; ++k)
      elog_phi(i, k) =
          ref_digamma(beta(doc.entries[static_cast<std::size_t>(i)].word, k)) -
          ref_digamma(colsum[k]);

  OracleFit fit;
  fit.alpha = ilda::Vector::Constant(K, alpha0);
  fit.pi.resize(n, K);
  for (int it = 0; it < iters; ++it) {
    ilda::Vector elog_theta(K);
    const double dig_total = ref_digamma(fit.alpha.sum());
    for (Eigen::Index k = 0; k < K; ++k)
      elog_theta[k] = ref_digamma(fit.alpha[k]) - dig_total;

    ilda::Vector alpha_new = ilda::Vector::Constant(K, alpha0);
    for (Eigen::Index i = 0; i < n; ++i) {
      ilda::Vector logits = elog_theta + elog_phi.row(i).transpose();
      ilda::Vector w = (logits.array() - logits.maxCoeff()).exp();
      w /= w.sum();
      fit.pi.row(i) = w.transpose();
      alpha_new +=
          static_cast<double>(doc.entries[static_cast<std::size_t>(i)].count) *
          w;
    }
    fit.alpha = alpha_new;
  }
  return fit;
}

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    static std::atomic<int> counter{0};
    std::random_device rd;
    path = base / ("ilda_test_" + std::to_string(rd()) + "_" +
                   std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

// Short fixed corpus used across suites: 4 docs over 5 words.
inline ilda::Corpus toy_corpus() {
  ilda::Corpus corpus;
  corpus.vocabulary = ilda::synthetic_vocabulary(5);
  auto add = [&](std::vector<std::pair<int, int>> entries) {
    ilda::Document doc;
    doc.id = static_cast<std::int64_t>(corpus.documents.size());
    for (auto [w, c] : entries) {
      doc.entries.push_back({w, c});
      doc.n_tokens += c;
    }
    corpus.documents.push_back(std::move(doc));
  };
  add({{0, 2}, {1, 1}});
  add({{1, 3}, {2, 1}, {4, 2}});
  add({{0, 1}, {3, 2}});
  add({{2, 2}, {3, 1}, {4, 1}});
  return corpus;
}

inline bool bitwise_equal(const ilda::Matrix& a, const ilda::Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const double x = a(r, c);
      const double y = b(r, c);
      if (std::memcmp(&x, &y, sizeof(double)) != 0) return false;
    }
  return true;
}

inline double max_abs_diff(const ilda::Matrix& a, const ilda::Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_rel_diff(const ilda::Matrix& a, const ilda::Matrix& b) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const double denom = std::max({std::abs(a(r, c)), std::abs(b(r, c)), 1e-300});
      worst = std::max(worst, std::abs(a(r, c) - b(r, c)) / denom);
    }
  return worst;
}

}  // namespace testutil
