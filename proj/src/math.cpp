// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#include "ilda/math.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ilda/errors.hpp"

namespace ilda {

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: argument must be > 0");

  // Shift the argument up with psi(x) = psi(x+1) - 1/x until the asymptotic
  // series is accurate. The reciprocal sum is compensated, and each
  // reciprocal's own rounding error is recovered with an fma residual, so
  // small arguments do not lose digits to the recurrence.
  double shift = 0.0;
  double comp = 0.0;
  const auto accumulate = [&](double v) {
    const double y = v - comp;
    const double t = shift + y;
    comp = (t - shift) - y;
    shift = t;
  };
  while (x < 6.0) {
    const double term = 1.0 / x;
    accumulate(term);
    accumulate(std::fma(-term, x, 1.0) / x);
    x += 1.0;
  }

  // psi(x) ~ ln x - 1/(2x) - sum_n B_{2n} / (2n x^{2n}), truncated after
  // eight terms. Coefficients are B_{2n}/(2n).
  const double z = 1.0 / (x * x);
  const double series =
      z * (1.0 / 12.0 +
           z * (-1.0 / 120.0 +
                z * (1.0 / 252.0 +
                     z * (-1.0 / 240.0 +
                          z * (1.0 / 132.0 +
                               z * (-691.0 / 32760.0 +
                                    z * (1.0 / 12.0 +
                                         z * (-3617.0 / 8160.0))))))));
  // Fold the compensation residual in before the one subtraction at the
  // magnitude of the shift, keeping the result within half an ulp even
  // when the shift dominates (tiny x).
  return (std::log(x) - 0.5 / x - series + comp) - shift;
}

Vector dirichlet_expected_log(const Eigen::Ref<const Vector>& a) {
  const Eigen::Index n = a.size();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(a[i] > 0.0))
      throw std::domain_error("dirichlet_expected_log: entries must be > 0");
    total += a[i];
  }
  const double dig_total = digamma(total);
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = digamma(a[i]) - dig_total;
  return out;
}

namespace detail {

void normalize_exp_into(const Eigen::Ref<const Vector>& logits,
                        Eigen::Ref<Vector> out) {
  const Eigen::Index n = logits.size();
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(logits[i]))
      throw NumericError("normalize_exp: NaN in logits");
    if (logits[i] > m) m = logits[i];
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  out /= sum;
}

}  // namespace detail

Vector normalize_exp(const Eigen::Ref<const Vector>& logits) {
  Vector out(logits.size());
  detail::normalize_exp_into(logits, out);
  return out;
}

}  // namespace ilda
