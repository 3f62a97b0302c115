#include "dawmr/whitening.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace dawmr {

void contrast_normalize(std::span<float> patch, double eps_cn) {
  double mean = 0.0;
  for (float v : patch) mean += v;
  mean /= static_cast<double>(patch.size());
  double var = 0.0;
  for (float v : patch) var += (v - mean) * (v - mean);
  const double scale = 1.0 / (std::sqrt(var / static_cast<double>(patch.size())) + eps_cn);
  for (float& v : patch) v = static_cast<float>((v - mean) * scale);
}

void WhiteningTransform::apply(std::span<float> patch, std::span<double> scratch) const {
  if (!enabled) return;
  require(patch.size() == dim, "whitening dimension mismatch");
  if (contrast_normalize) dawmr::contrast_normalize(patch, eps_cn);
  for (std::size_t i = 0; i < dim; ++i) scratch[i] = patch[i] - mean[i];
  for (std::size_t r = 0; r < dim; ++r) {
    const double* row = matrix.data() + r * dim;
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) acc += row[i] * scratch[i];
    patch[r] = static_cast<float>(acc);
  }
}

std::vector<float> WhiteningTransform::apply(std::span<const float> patch) const {
  std::vector<float> out(patch.begin(), patch.end());
  std::vector<double> scratch(out.size());
  apply(out, scratch);
  return out;
}

WhiteningTransform fit_whitening(const PatchSet& patches, const WhiteningOptions& options) {
  require(options.eps_zca >= 0.0 && options.eps_cn >= 0.0, "whitening epsilons must be >= 0");
  const std::size_t n = patches.size();
  const std::size_t dim = patches.dim;
  require(n >= 2 && dim >= 1, "fit_whitening needs at least two patches");

  Eigen::MatrixXd data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  std::vector<float> buf(dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = patches.row(i);
    std::copy(row.begin(), row.end(), buf.begin());
    if (options.contrast_normalize) contrast_normalize(buf, options.eps_cn);
    for (std::size_t j = 0; j < dim; ++j) {
      if (!std::isfinite(buf[j])) throw ValidationError("fit_whitening: non-finite patch value");
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buf[j];
    }
  }
  const Eigen::VectorXd mean = data.colwise().mean();
  data.rowwise() -= mean.transpose();
  const Eigen::MatrixXd cov = (data.transpose() * data) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::VectorXd inv_sqrt = (lambda.array() + options.eps_zca).rsqrt();
  const Eigen::MatrixXd w = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();

  WhiteningTransform t;
  t.enabled = true;
  t.contrast_normalize = options.contrast_normalize;
  t.eps_zca = options.eps_zca;
  t.eps_cn = options.eps_cn;
  t.dim = dim;
  t.mean.assign(mean.data(), mean.data() + dim);
  t.matrix.resize(dim * dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c)
      t.matrix[r * dim + c] = 0.5 * (w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) +
                                     w(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)));
  return t;
}

}  // namespace dawmr
