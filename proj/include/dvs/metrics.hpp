/*
 * Copyright 2026 The dvs Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Objective evaluation metrics: Frechet distance between Gaussian fits of
// two embedding sets (FAD when the embeddings come from an audio encoder),
// mean squared pairwise distance within a class (diversity), and Welch's
// t-test for comparing per-seed results.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dvs/embedding_io.hpp"

namespace dvs {

struct GaussianStats {
  Eigen::VectorXd mean;
  /// Unbiased (n-1) sample covariance, exactly symmetric.
  Eigen::MatrixXd covariance;
  std::size_t n = 0;

  Eigen::Index dim() const noexcept { return mean.size(); }
};

/// Throws ValidationError when fewer than two vectors are given.
GaussianStats fit_gaussian(std::span<const std::vector<float>> vectors);
GaussianStats fit_gaussian(const EmbeddingSet& set);

/// Symmetric PSD square root via eigendecomposition; negative eigenvalues
/// are clamped to zero. Throws ValidationError when `m` is not symmetric
/// within 1e-9 (relative to its largest entry, floor 1).
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m);

inline constexpr double kFrechetRegularization = 1e-6;

struct FrechetResult {
  double distance = 0.0;
  /// True when epsilon*I was added because a covariance was rank deficient.
  bool regularization_applied = false;
};

/// |mu1-mu2|^2 + Tr(S1 + S2 - 2 sqrt(S1^1/2 S2 S1^1/2)), clamped at 0 when
/// tiny-negative. Throws DimensionError when dims differ.
FrechetResult frechet_distance(const GaussianStats& a, const GaussianStats& b);

/// Mean squared Euclidean distance over all unordered pairs. Throws
/// ValidationError for fewer than two vectors, DimensionError for ragged input.
double pairwise_msd(std::span<const std::vector<float>> vectors);

struct MsdReport {
  std::map<std::string, double> per_class;
  /// Unweighted mean of per_class.
  double mean_over_classes = 0.0;
  std::map<std::string, std::size_t> pair_counts;
};

/// Throws ValidationError naming the first class with fewer than two vectors.
MsdReport msd_report(const std::map<std::string, std::vector<std::vector<float>>>& per_class,
                     std::size_t threads = 1);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
};

/// Welch's unequal-variance t-test. Needs |a|, |b| >= 2 and at least one
/// sample with nonzero variance (ValidationError otherwise).
TTestResult welch_ttest(std::span<const double> a, std::span<const double> b);

}  // namespace dvs
