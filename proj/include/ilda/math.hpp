// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ilda/types.hpp"

namespace ilda {

/// Digamma function for x > 0. Throws std::domain_error otherwise.
/// Absolute error is below 1e-10 for x >= 1e-6.
double digamma(double x);

/// E[ln theta] under Dirichlet(a): digamma(a_k) - digamma(sum(a)).
/// All entries of a must be positive.
Vector dirichlet_expected_log(const Eigen::Ref<const Vector>& a);

/// Softmax with max subtraction. Throws NumericError if any input is NaN.
Vector normalize_exp(const Eigen::Ref<const Vector>& logits);

namespace detail {
// In-place softmax core shared by normalize_exp and the E-step inner loop.
void normalize_exp_into(const Eigen::Ref<const Vector>& logits,
                        Eigen::Ref<Vector> out);
}  // namespace detail

}  // namespace ilda
