#include "synthaug/pca.hpp"

#include <cmath>

#include "synthaug/error.hpp"

namespace synthaug {

namespace {

constexpr int kMaxIterations = 200000;
constexpr double kTolerance = 1e-13;

using Vec = Eigen::VectorXd;
using Dense = Eigen::MatrixXd;

void orthogonalize(Vec& v, const Vec* against) {
  if (against) v -= against->dot(v) * *against;
}

// Dominant eigenpair of a symmetric PSD matrix. `against` keeps the iterate
// orthogonal to an already extracted axis.
std::pair<double, Vec> dominant(const Dense& c, const Vec* against, double scale) {
  const Eigen::Index d = c.rows();
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = 1.0 + 0.01 * static_cast<double>(i % 7);
  orthogonalize(v, against);
  if (v.norm() == 0.0) v = Vec::Unit(d, d - 1);
  v.normalize();
  for (int it = 0; it < kMaxIterations; ++it) {
    Vec w = c * v;
    orthogonalize(w, against);
    const double norm = w.norm();
    if (norm <= 1e-14 * scale) {
      // Nothing left in the remaining subspace.
      return {0.0, v};
    }
    w /= norm;
    if (w.dot(v) < 0.0) w = -w;
    const double change = (w - v).norm();
    v = w;
    if (change < kTolerance) break;
  }
  return {v.dot(c * v), v};
}

void fix_sign(Vec& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

}  // namespace

Pca2d pca_2d(const nn::Matrix& x) {
  if (x.rows() < 3) throw Error(ErrorCode::insufficient_data, "pca needs at least 3 rows");
  if (x.cols() < 1) throw Error(ErrorCode::insufficient_data, "pca needs at least one column");
  const Dense centered = x.rowwise() - x.colwise().mean();
  const Dense cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  const double total = cov.trace();
  if (!(total > 0.0)) throw Error(ErrorCode::insufficient_data, "pca: data has zero variance");

  auto [l1, v1] = dominant(cov, nullptr, total);
  const Dense deflated = cov - l1 * v1 * v1.transpose();
  auto [l2, v2] = cov.cols() > 1 ? dominant(deflated, &v1, total) : std::pair<double, Vec>{0.0, Vec::Zero(1)};
  if (cov.cols() > 1) {
    // Rayleigh quotient on the undeflated matrix is more accurate.
    l2 = std::max(0.0, v2.dot(cov * v2));
    fix_sign(v2);
  }
  fix_sign(v1);

  Pca2d out;
  out.components.resize(2, x.cols());
  out.components.row(0) = v1.transpose();
  out.components.row(1) = v2.transpose();
  out.coords = centered * out.components.transpose();
  out.explained_variance = {l1, l2};
  out.explained_ratio = {l1 / total, l2 / total};
  return out;
}

Pca2d pca_2d(const data::LabeledDataset& ds) { return pca_2d(data::to_matrix(ds.features)); }

}  // namespace synthaug
