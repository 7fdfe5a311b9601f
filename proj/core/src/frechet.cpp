// Copyright 2026 The octsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <bit>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "octsynth/error.hpp"
#include "octsynth/metrics.hpp"

namespace octsynth {
namespace {

// Symmetric PSD square root; tiny negative eigenvalues are clipped.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-8 * scale) throw ValidationError("covariance is not positive semi-definite");
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

void GaussianStats::validate() const {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw ValidationError("Gaussian stats dimensions are inconsistent");
  }
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw ValidationError("covariance is not symmetric");
  }
}

GaussianStats gaussian_stats(const std::vector<std::vector<double>>& features) {
  if (features.size() < 2) throw ValidationError("gaussian_stats needs at least 2 samples");
  const auto n = static_cast<Eigen::Index>(features.size());
  const auto d = static_cast<Eigen::Index>(features.front().size());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(features[i].size()) != d) {
      throw ValidationError("feature rows differ in dimension");
    }
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = features[i][j];
  }
  GaussianStats s;
  s.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
  s.covariance = (centered.transpose() * centered) / static_cast<double>(n - 1);
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose());
  return s;
}

double frechet_distance(const GaussianStats& s1, const GaussianStats& s2) {
  if (s1.mean.size() != s2.mean.size()) throw ValidationError("Gaussian stats dimension mismatch");
  s1.validate();
  s2.validate();
  const Eigen::MatrixXd root1 = psd_sqrt(s1.covariance);
  const Eigen::MatrixXd inner = root1 * s2.covariance * root1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()),
                                                    Eigen::EigenvaluesOnly);
  double trace_root = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    trace_root += std::sqrt(std::max(es.eigenvalues()(i), 0.0));
  }
  const double d = (s1.mean - s2.mean).squaredNorm() + s1.covariance.trace() +
                   s2.covariance.trace() - 2.0 * trace_root;
  return std::max(d, 0.0);
}

double frechet_from_features(const std::vector<std::vector<double>>& a,
                             const std::vector<std::vector<double>>& b) {
  return frechet_distance(gaussian_stats(a), gaussian_stats(b));
}

double fid_score(const std::vector<Image2D>& set_a, const std::vector<Image2D>& set_b,
                 const Embedder& e) {
  return frechet_from_features(embed_all(e, set_a), embed_all(e, set_b));
}

double fvd_score(const std::vector<Volume3D>& set_a, const std::vector<Volume3D>& set_b,
                 const Embedder& e) {
  return frechet_from_features(embed_all(e, set_a), embed_all(e, set_b));
}

// --- feature files ---------------------------------------------------------------

void write_features(const std::vector<std::vector<double>>& rows,
                    const std::filesystem::path& path) {
  const std::uint32_t dim = rows.empty() ? 0 : static_cast<std::uint32_t>(rows.front().size());
  std::vector<std::uint8_t> out = {'P', '2', 'F', '1'};
  auto put = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put(static_cast<std::uint32_t>(rows.size()));
  put(dim);
  for (const auto& r : rows) {
    if (r.size() != dim) throw ValidationError("feature rows differ in dimension");
    for (double v : r) put(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  write_file_bytes(path, out);
}

std::vector<std::vector<double>> read_features(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 12) throw FormatError("truncated payload", path.string());
  if (!(bytes[0] == 'P' && bytes[1] == '2' && bytes[2] == 'F' && bytes[3] == '1')) {
    throw FormatError("bad magic", path.string());
  }
  auto get = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[off + i]) << (8 * i);
    return v;
  };
  const std::uint32_t count = get(4), dim = get(8);
  const std::size_t expected = 12 + 4ull * count * dim;
  if (bytes.size() < expected) throw FormatError("truncated payload", path.string());
  if (bytes.size() > expected) throw FormatError("trailing bytes", path.string());
  std::vector<std::vector<double>> rows(count, std::vector<double>(dim));
  for (std::uint32_t i = 0; i < count; ++i) {
    for (std::uint32_t j = 0; j < dim; ++j) {
      rows[i][j] = std::bit_cast<float>(get(12 + 4ull * (i * dim + j)));
    }
  }
  return rows;
}

}  // namespace octsynth
