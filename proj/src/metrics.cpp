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

#include "dvs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "dvs/error.hpp"
#include "dvs/student_t.hpp"

namespace dvs {

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen_of(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition did not converge");
  return solver;
}

bool rank_deficient(const Eigen::MatrixXd& cov) {
  const Eigen::VectorXd ev = eigen_of(cov).eigenvalues();
  const double top = std::max(1.0, ev.maxCoeff());
  return ev.minCoeff() <= 1e-12 * top;
}

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x, double mean) {
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace

GaussianStats fit_gaussian(std::span<const std::vector<float>> vectors) {
  if (vectors.size() < 2) throw ValidationError("fit_gaussian: need at least 2 vectors");
  const auto d = static_cast<Eigen::Index>(vectors.front().size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(vectors.size()), d);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (static_cast<Eigen::Index>(vectors[i].size()) != d) {
      throw DimensionError("fit_gaussian: ragged input at row " + std::to_string(i));
    }
    for (Eigen::Index k = 0; k < d; ++k) x(static_cast<Eigen::Index>(i), k) = vectors[i][k];
  }
  GaussianStats g;
  g.n = vectors.size();
  g.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - g.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(g.n - 1);
  g.covariance = 0.5 * (cov + cov.transpose());
  return g;
}

GaussianStats fit_gaussian(const EmbeddingSet& set) {
  std::vector<std::vector<float>> rows;
  rows.reserve(set.size());
  for (const auto& r : set.records()) rows.push_back(r.values);
  return fit_gaussian(std::span<const std::vector<float>>(rows));
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix_sqrt_psd: matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw ValidationError("matrix_sqrt_psd: matrix is not symmetric");
  }
  const auto solver = eigen_of(m);
  const Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& v = solver.eigenvectors();
  Eigen::MatrixXd s = v * roots.asDiagonal() * v.transpose();
  return 0.5 * (s + s.transpose());
}

FrechetResult frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("frechet_distance: dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  FrechetResult out;
  Eigen::MatrixXd s1 = a.covariance;
  Eigen::MatrixXd s2 = b.covariance;
  if (rank_deficient(s1) || rank_deficient(s2)) {
    const auto eye = Eigen::MatrixXd::Identity(a.dim(), a.dim());
    s1 += kFrechetRegularization * eye;
    s2 += kFrechetRegularization * eye;
    out.regularization_applied = true;
  }
  const Eigen::MatrixXd root1 = matrix_sqrt_psd(s1);
  Eigen::MatrixXd inner = root1 * s2 * root1;
  inner = 0.5 * (inner + inner.transpose());
  const double cross_trace = eigen_of(inner).eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double mean_term = (a.mean - b.mean).squaredNorm();
  double d = mean_term + s1.trace() + s2.trace() - 2.0 * cross_trace;
  if (d < 0.0 && d > -1e-8) d = 0.0;
  out.distance = d;
  return out;
}

double pairwise_msd(std::span<const std::vector<float>> vectors) {
  if (vectors.size() < 2) throw ValidationError("pairwise_msd: need at least 2 vectors");
  const std::size_t d = vectors.front().size();
  std::vector<double> centroid(d, 0.0);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != d) throw DimensionError("pairwise_msd: ragged input at row " + std::to_string(i));
    for (std::size_t k = 0; k < d; ++k) centroid[k] += vectors[i][k];
  }
  const double n = static_cast<double>(vectors.size());
  for (auto& c : centroid) c /= n;
  // sum_{i<j} |xi - xj|^2 = n * sum_i |xi - mean|^2
  double scatter = 0.0;
  for (const auto& v : vectors) {
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = v[k] - centroid[k];
      scatter += diff * diff;
    }
  }
  return 2.0 * scatter / (n - 1.0);
}

MsdReport msd_report(const std::map<std::string, std::vector<std::vector<float>>>& per_class, std::size_t threads) {
  if (per_class.empty()) throw ValidationError("msd_report: no classes");
  for (const auto& [name, vecs] : per_class) {
    if (vecs.size() < 2) {
      throw ValidationError("msd_report: class '" + name + "' has " + std::to_string(vecs.size()) +
                            " vectors, need at least 2");
    }
  }
  std::vector<const std::pair<const std::string, std::vector<std::vector<float>>>*> items;
  for (const auto& kv : per_class) items.push_back(&kv);
  std::vector<double> values(items.size());
  const std::size_t width = std::max<std::size_t>(1, threads);
  for (std::size_t wave = 0; wave < items.size(); wave += width) {
    const std::size_t end = std::min(items.size(), wave + width);
    std::vector<std::future<double>> pending;
    for (std::size_t i = wave; i < end; ++i) {
      pending.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async,
                                   [&, i] { return pairwise_msd(items[i]->second); }));
    }
    for (std::size_t i = wave; i < end; ++i) values[i] = pending[i - wave].get();
  }

  MsdReport report;
  double sum = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& [name, vecs] = *items[i];
    report.per_class[name] = values[i];
    report.pair_counts[name] = vecs.size() * (vecs.size() - 1) / 2;
    sum += values[i];
  }
  report.mean_over_classes = sum / static_cast<double>(items.size());
  return report;
}

TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("welch_ttest: each sample needs at least 2 values");
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double qa = sample_variance(a, ma) / static_cast<double>(a.size());
  const double qb = sample_variance(b, mb) / static_cast<double>(b.size());
  const double se2 = qa + qb;
  if (!(se2 > 0.0)) throw ValidationError("welch_ttest: undefined statistic, both samples have zero variance");
  TTestResult r;
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / (qa * qa / static_cast<double>(a.size() - 1) + qb * qb / static_cast<double>(b.size() - 1));
  r.p_two_sided = stats::student_t_two_sided_p(r.t, r.df);
  return r;
}

}  // namespace dvs
