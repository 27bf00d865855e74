#include "synthaug/similarity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "synthaug/error.hpp"

namespace synthaug::similarity {

namespace {

bool is_binary(const nn::Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double v = m.data()[i];
    if (v != 0.0 && v != 1.0) return false;
  }
  return true;
}

// Distance source for one or two point sets. {0,1} data is bit-packed and
// uses popcount; the squared distance is then an exact small integer, equal to
// the floating-point sum of squared differences.
class Distances {
 public:
  Distances(const nn::Matrix& a, const nn::Matrix& b) : a_(a), b_(b) {
    binary_ = is_binary(a) && is_binary(b);
    if (binary_) {
      words_ = (static_cast<std::size_t>(a.cols()) + 63) / 64;
      pack(a, packed_a_);
      pack(b, packed_b_);
    }
  }

  double operator()(Eigen::Index i, Eigen::Index j) const {
    if (binary_) {
      const std::uint64_t* x = packed_a_.data() + static_cast<std::size_t>(i) * words_;
      const std::uint64_t* y = packed_b_.data() + static_cast<std::size_t>(j) * words_;
      int h = 0;
      for (std::size_t w = 0; w < words_; ++w) h += std::popcount(x[w] ^ y[w]);
      return std::sqrt(static_cast<double>(h));
    }
    double s = 0.0;
    for (Eigen::Index c = 0; c < a_.cols(); ++c) {
      const double diff = a_(i, c) - b_(j, c);
      s += diff * diff;
    }
    return std::sqrt(s);
  }

 private:
  void pack(const nn::Matrix& m, std::vector<std::uint64_t>& out) const {
    out.assign(static_cast<std::size_t>(m.rows()) * words_, 0);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        if (m(r, c) != 0.0)
          out[static_cast<std::size_t>(r) * words_ + static_cast<std::size_t>(c) / 64] |=
              std::uint64_t{1} << (c % 64);
  }

  const nn::Matrix& a_;
  const nn::Matrix& b_;
  bool binary_ = false;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> packed_a_;
  std::vector<std::uint64_t> packed_b_;
};

std::vector<double> radii_with(const Distances& dist, Eigen::Index n, std::size_t k) {
  std::vector<double> radii(static_cast<std::size_t>(n));
  std::vector<double> row(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t w = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) row[w++] = dist(i, j);
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    radii[static_cast<std::size_t>(i)] = row[k - 1];
  }
  return radii;
}

void require_size(const nn::Matrix& m, std::size_t k, const char* what) {
  if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be positive");
  if (static_cast<std::size_t>(m.rows()) <= k)
    throw Error(ErrorCode::insufficient_data, std::string(what) + " set has " +
                                                  std::to_string(m.rows()) +
                                                  " rows; need more than k=" + std::to_string(k));
}

}  // namespace

std::vector<double> knn_radii(const nn::Matrix& points, std::size_t k) {
  require_size(points, k, "point");
  return radii_with(Distances(points, points), points.rows(), k);
}

PrdcScores prdc(const nn::Matrix& real, const nn::Matrix& synth, std::size_t k) {
  if (real.cols() != synth.cols())
    throw Error(ErrorCode::dimension_mismatch, "prdc: real and synthetic widths differ");
  require_size(real, k, "real");
  require_size(synth, k, "synthetic");
  const Eigen::Index n = real.rows();
  const Eigen::Index m = synth.rows();
  const std::vector<double> real_radii = radii_with(Distances(real, real), n, k);
  const std::vector<double> synth_radii = radii_with(Distances(synth, synth), m, k);

  const Distances cross(synth, real);
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  std::vector<char> recalled(static_cast<std::size_t>(n), 0);
  std::size_t precise = 0;
  std::size_t density_hits = 0;
  for (Eigen::Index y = 0; y < m; ++y) {
    const double s_y = synth_radii[static_cast<std::size_t>(y)];
    bool inside_any = false;
    for (Eigen::Index x = 0; x < n; ++x) {
      const double d = cross(y, x);
      const auto xi = static_cast<std::size_t>(x);
      if (d < real_radii[xi]) {
        inside_any = true;
        ++density_hits;
        covered[xi] = 1;
      }
      if (d < s_y) recalled[xi] = 1;
    }
    precise += inside_any;
  }
  PrdcScores s;
  s.k = k;
  s.n_real = static_cast<std::size_t>(n);
  s.n_synth = static_cast<std::size_t>(m);
  s.precision = static_cast<double>(precise) / static_cast<double>(m);
  s.recall = static_cast<double>(std::count(recalled.begin(), recalled.end(), 1)) /
             static_cast<double>(n);
  s.density = static_cast<double>(density_hits) / static_cast<double>(k * static_cast<std::size_t>(m));
  s.coverage = static_cast<double>(std::count(covered.begin(), covered.end(), 1)) /
               static_cast<double>(n);
  return s;
}

double prdc_sum(const PrdcScores& s) noexcept {
  return s.precision + s.recall + s.density + s.coverage;
}

}  // namespace synthaug::similarity
