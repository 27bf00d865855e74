#include "synthaug/utility/classifiers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "synthaug/error.hpp"
#include "synthaug/nn/loss.hpp"
#include "synthaug/nn/network.hpp"
#include "synthaug/nn/optim.hpp"

namespace synthaug::utility {

namespace {

void require_two_classes(const data::LabeledDataset& train) {
  const auto counts = train.class_counts();
  if (counts[0] == 0 || counts[1] == 0)
    throw Error(ErrorCode::insufficient_data,
                "classifier training set holds a single class (" + std::to_string(train.size()) +
                    " rows)");
}

void require_width(const data::BinaryMatrix& x, std::size_t d) {
  if (x.cols() != d)
    throw Error(ErrorCode::dimension_mismatch,
                "classifier fitted on " + std::to_string(d) + " features, scored on " +
                    std::to_string(x.cols()));
}

Eigen::VectorXd label_vector(const data::LabeledDataset& ds) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) y(static_cast<Eigen::Index>(i)) = ds.labels[i];
  return y;
}

class LogisticRegression final : public Classifier {
 public:
  explicit LogisticRegression(const ClassifierParams& p) : p_(p) {}
  ClassifierKind kind() const noexcept override { return ClassifierKind::logistic_regression; }
  double threshold() const noexcept override { return 0.0; }

  void fit(const data::LabeledDataset& train, std::uint64_t) override {
    require_two_classes(train);
    const nn::Matrix x = data::to_matrix(train.features);
    const Eigen::VectorXd y = label_vector(train);
    const double n = static_cast<double>(train.size());
    w_ = Eigen::VectorXd::Zero(x.cols());
    b_ = 0.0;
    for (std::size_t it = 0; it < p_.lr_iterations; ++it) {
      const Eigen::VectorXd z = (x * w_).array() + b_;
      const Eigen::VectorXd r = (1.0 / (1.0 + (-z.array()).exp())).matrix() - y;
      w_ -= p_.lr_step * (x.transpose() * r / n + p_.l2 * w_);
      b_ -= p_.lr_step * r.mean();
    }
  }

  std::vector<double> score(const data::BinaryMatrix& x) const override {
    require_width(x, static_cast<std::size_t>(w_.size()));
    const Eigen::VectorXd z = (data::to_matrix(x) * w_).array() + b_;
    return {z.data(), z.data() + z.size()};
  }

 private:
  ClassifierParams p_;
  Eigen::VectorXd w_;
  double b_ = 0.0;
};

class LinearSvm final : public Classifier {
 public:
  explicit LinearSvm(const ClassifierParams& p) : p_(p) {}
  ClassifierKind kind() const noexcept override { return ClassifierKind::linear_svm; }
  double threshold() const noexcept override { return 0.0; }

  void fit(const data::LabeledDataset& train, std::uint64_t seed) override {
    require_two_classes(train);
    const nn::Matrix x = data::to_matrix(train.features);
    const Eigen::VectorXd y = (2.0 * label_vector(train).array() - 1.0).matrix();
    const std::size_t n = train.size();
    const std::size_t batch = std::min(p_.svm_batch, n);
    Rng rng = make_rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = n;

    Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
    double b = 0.0;
    w_ = Eigen::VectorXd::Zero(x.cols());
    b_ = 0.0;
    std::size_t averaged = 0;
    for (std::size_t t = 1; t <= p_.svm_iterations; ++t) {
      Eigen::VectorXd gw = p_.l2 * w;
      double gb = 0.0;
      for (std::size_t k = 0; k < batch; ++k) {
        if (cursor == n) {
          std::shuffle(order.begin(), order.end(), rng);
          cursor = 0;
        }
        const auto i = static_cast<Eigen::Index>(order[cursor++]);
        if (y(i) * (x.row(i).dot(w) + b) < 1.0) {
          gw -= y(i) * x.row(i).transpose() / static_cast<double>(batch);
          gb -= y(i) / static_cast<double>(batch);
        }
      }
      const double eta = p_.svm_step / std::sqrt(static_cast<double>(t));
      w -= eta * gw;
      b -= eta * gb;
      if (2 * t > p_.svm_iterations) {
        ++averaged;
        w_ += (w - w_) / static_cast<double>(averaged);
        b_ += (b - b_) / static_cast<double>(averaged);
      }
    }
  }

  std::vector<double> score(const data::BinaryMatrix& x) const override {
    require_width(x, static_cast<std::size_t>(w_.size()));
    const Eigen::VectorXd z = (data::to_matrix(x) * w_).array() + b_;
    return {z.data(), z.data() + z.size()};
  }

 private:
  ClassifierParams p_;
  Eigen::VectorXd w_;
  double b_ = 0.0;
};

// Bernoulli naive Bayes; scores are posterior log-odds.
class NaiveBayes final : public Classifier {
 public:
  explicit NaiveBayes(const ClassifierParams& p) : p_(p) {}
  ClassifierKind kind() const noexcept override { return ClassifierKind::naive_bayes; }
  double threshold() const noexcept override { return 0.0; }

  void fit(const data::LabeledDataset& train, std::uint64_t) override {
    require_two_classes(train);
    const std::size_t d = train.feature_count();
    std::array<std::vector<double>, 2> ones{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    const auto counts = train.class_counts();
    for (std::size_t r = 0; r < train.size(); ++r)
      for (std::size_t c = 0; c < d; ++c) ones[train.labels[r]][c] += train.features.at(r, c);
    base_ = std::log(static_cast<double>(counts[1])) - std::log(static_cast<double>(counts[0]));
    present_.assign(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
      double theta[2];
      for (int k = 0; k < 2; ++k)
        theta[k] = (ones[k][c] + p_.nb_alpha) / (static_cast<double>(counts[k]) + 2.0 * p_.nb_alpha);
      const double absent = std::log1p(-theta[1]) - std::log1p(-theta[0]);
      base_ += absent;
      present_[c] = std::log(theta[1]) - std::log(theta[0]) - absent;
    }
  }

  std::vector<double> score(const data::BinaryMatrix& x) const override {
    require_width(x, present_.size());
    std::vector<double> out(x.rows(), base_);
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < x.cols(); ++c)
        if (x.at(r, c)) out[r] += present_[c];
    return out;
  }

 private:
  ClassifierParams p_;
  double base_ = 0.0;
  std::vector<double> present_;
};

std::vector<std::uint64_t> pack_rows(const data::BinaryMatrix& m, std::size_t words) {
  std::vector<std::uint64_t> out(m.rows() * words, 0);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (m.at(r, c)) out[r * words + c / 64] |= std::uint64_t{1} << (c % 64);
  return out;
}

// Hamming k-NN; the score is the label-1 share among the k nearest training
// rows, with distance ties going to the lower training index.
class Knn final : public Classifier {
 public:
  explicit Knn(const ClassifierParams& p) : p_(p) {}
  ClassifierKind kind() const noexcept override { return ClassifierKind::knn; }

  void fit(const data::LabeledDataset& train, std::uint64_t) override {
    require_two_classes(train);
    if (p_.knn_k == 0) throw Error(ErrorCode::invalid_argument, "knn: k must be > 0");
    d_ = train.feature_count();
    words_ = std::max<std::size_t>(1, (d_ + 63) / 64);
    packed_ = pack_rows(train.features, words_);
    labels_ = train.labels;
  }

  std::vector<double> score(const data::BinaryMatrix& x) const override {
    require_width(x, d_);
    const std::vector<std::uint64_t> q = pack_rows(x, words_);
    const std::size_t n = labels_.size();
    const std::size_t k = std::min(p_.knn_k, n);
    std::vector<std::pair<int, std::size_t>> dist(n);
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        int h = 0;
        for (std::size_t w = 0; w < words_; ++w)
          h += std::popcount(q[r * words_ + w] ^ packed_[i * words_ + w]);
        dist[i] = {h, i};
      }
      std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
      std::size_t pos = 0;
      for (std::size_t t = 0; t < k; ++t) pos += labels_[dist[t].second];
      out[r] = static_cast<double>(pos) / static_cast<double>(k);
    }
    return out;
  }

 private:
  ClassifierParams p_;
  std::size_t d_ = 0;
  std::size_t words_ = 1;
  std::vector<std::uint64_t> packed_;
  std::vector<std::uint8_t> labels_;
};

// Random forest over binary features: a split sends value 0 left and 1 right.
class RandomForest final : public Classifier {
 public:
  explicit RandomForest(const ClassifierParams& p) : p_(p) {}
  ClassifierKind kind() const noexcept override { return ClassifierKind::random_forest; }

  void fit(const data::LabeledDataset& train, std::uint64_t seed) override {
    require_two_classes(train);
    if (p_.forest_trees == 0) throw Error(ErrorCode::invalid_argument, "forest needs trees");
    d_ = train.feature_count();
    mtry_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d_))));
    trees_.clear();
    const std::size_t n = train.size();
    for (std::size_t t = 0; t < p_.forest_trees; ++t) {
      Rng rng = make_rng(derive_seed(seed, {t}));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      std::vector<std::size_t> sample(n);
      for (auto& s : sample) s = pick(rng);
      Tree tree;
      grow(tree, train, sample, rng);
      trees_.push_back(std::move(tree));
    }
  }

  std::vector<double> score(const data::BinaryMatrix& x) const override {
    require_width(x, d_);
    std::vector<double> out(x.rows(), 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (const Tree& tree : trees_) {
        std::size_t node = 0;
        while (tree[node].feature >= 0)
          node = x.at(r, static_cast<std::size_t>(tree[node].feature)) ? tree[node].right
                                                                         : tree[node].left;
        out[r] += tree[node].p1;
      }
      out[r] /= static_cast<double>(trees_.size());
    }
    return out;
  }

 private:
  struct Node {
    int feature = -1;
    std::size_t left = 0;
    std::size_t right = 0;
    double p1 = 0.0;
  };
  using Tree = std::vector<Node>;

  void grow(Tree& tree, const data::LabeledDataset& ds, std::vector<std::size_t> rows, Rng& rng) {
    struct Pending {
      std::size_t node;
      std::vector<std::size_t> rows;
    };
    std::vector<Pending> stack;
    tree.push_back({});
    stack.push_back({0, std::move(rows)});
    std::vector<std::size_t> features(d_);
    while (!stack.empty()) {
      Pending job = std::move(stack.back());
      stack.pop_back();
      std::size_t pos = 0;
      for (std::size_t r : job.rows) pos += ds.labels[r];
      const std::size_t n = job.rows.size();
      tree[job.node].p1 = static_cast<double>(pos) / static_cast<double>(n);
      if (pos == 0 || pos == n || n < p_.forest_min_split) continue;

      // Visit features in random order until mtry non-constant ones are seen.
      std::iota(features.begin(), features.end(), std::size_t{0});
      std::shuffle(features.begin(), features.end(), rng);
      int best = -1;
      double best_purity = -1.0;
      std::size_t seen = 0;
      for (std::size_t f : features) {
        std::size_t cnt[2][2] = {{0, 0}, {0, 0}};
        for (std::size_t r : job.rows) ++cnt[ds.features.at(r, f)][ds.labels[r]];
        const std::size_t left = cnt[0][0] + cnt[0][1];
        const std::size_t right = cnt[1][0] + cnt[1][1];
        if (left == 0 || right == 0) continue;
        const auto sq = [](std::size_t v) { return static_cast<double>(v) * static_cast<double>(v); };
        const double purity = (sq(cnt[0][0]) + sq(cnt[0][1])) / static_cast<double>(left) +
                              (sq(cnt[1][0]) + sq(cnt[1][1])) / static_cast<double>(right);
        if (purity > best_purity) {
          best_purity = purity;
          best = static_cast<int>(f);
        }
        if (++seen == mtry_) break;
      }
      if (best < 0) continue;
      std::vector<std::size_t> lo;
      std::vector<std::size_t> hi;
      for (std::size_t r : job.rows)
        (ds.features.at(r, static_cast<std::size_t>(best)) ? hi : lo).push_back(r);
      const std::size_t left = tree.size();
      tree.push_back({});
      tree.push_back({});
      tree[job.node].feature = best;
      tree[job.node].left = left;
      tree[job.node].right = left + 1;
      stack.push_back({left + 1, std::move(hi)});
      stack.push_back({left, std::move(lo)});
    }
  }

  ClassifierParams p_;
  std::size_t d_ = 0;
  std::size_t mtry_ = 1;
  std::vector<Tree> trees_;
};

class Mlp final : public Classifier {
 public:
  explicit Mlp(const ClassifierParams& p) : p_(p) {}
  ClassifierKind kind() const noexcept override { return ClassifierKind::mlp; }

  void fit(const data::LabeledDataset& train, std::uint64_t seed) override {
    require_two_classes(train);
    Rng rng = make_rng(seed);
    net_ = nn::Network(train.feature_count());
    net_.linear(p_.mlp_hidden, rng)
        .activation(nn::Activation::relu)
        .linear(1, rng)
        .activation(nn::Activation::sigmoid);
    const nn::Matrix x = data::to_matrix(train.features);
    nn::Matrix y(static_cast<Eigen::Index>(train.size()), 1);
    for (std::size_t i = 0; i < train.size(); ++i) y(static_cast<Eigen::Index>(i), 0) = train.labels[i];
    const std::vector<nn::Matrix*> params = net_.parameters();
    const nn::AdamConfig adam{p_.mlp_lr};
    nn::AdamState state;
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t batch = std::max<std::size_t>(1, p_.mlp_batch);
    for (std::size_t epoch = 0; epoch < p_.mlp_epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t lo = 0; lo < order.size(); lo += batch) {
        const std::size_t hi = std::min(order.size(), lo + batch);
        const auto m = static_cast<Eigen::Index>(hi - lo);
        nn::Matrix xb(m, x.cols());
        nn::Matrix yb(m, 1);
        for (Eigen::Index i = 0; i < m; ++i) {
          const auto src = static_cast<Eigen::Index>(order[lo + static_cast<std::size_t>(i)]);
          xb.row(i) = x.row(src);
          yb(i, 0) = y(src, 0);
        }
        const nn::ForwardResult f = net_.forward(xb, nn::Mode::train, rng);
        const nn::LossValue l = nn::bce_loss(f.output, yb);
        adam_step(params, net_.backward(f.tape, l.grad).params, adam, state);
      }
    }
  }

  std::vector<double> score(const data::BinaryMatrix& x) const override {
    require_width(x, net_.input_dim());
    const nn::Matrix p = net_.infer(data::to_matrix(x));
    return {p.data(), p.data() + p.size()};
  }

 private:
  ClassifierParams p_;
  nn::Network net_;
};

}  // namespace

const char* to_string(ClassifierKind k) noexcept {
  switch (k) {
    case ClassifierKind::logistic_regression:
      return "logistic_regression";
    case ClassifierKind::linear_svm:
      return "linear_svm";
    case ClassifierKind::naive_bayes:
      return "naive_bayes";
    case ClassifierKind::knn:
      return "knn";
    case ClassifierKind::random_forest:
      return "random_forest";
    case ClassifierKind::mlp:
      return "mlp";
  }
  return "?";
}

ClassifierKind classifier_from_string(const std::string& name) {
  for (ClassifierKind k : kAllClassifiers)
    if (name == to_string(k)) return k;
  throw Error(ErrorCode::invalid_argument, "unknown classifier '" + name + "'");
}

std::vector<std::uint8_t> Classifier::predict(const data::BinaryMatrix& x) const {
  const std::vector<double> s = score(x);
  const double t = threshold();
  std::vector<std::uint8_t> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] > t ? 1 : 0;
  return out;
}

std::unique_ptr<Classifier> make_classifier(ClassifierKind kind, const ClassifierParams& params) {
  switch (kind) {
    case ClassifierKind::logistic_regression:
      return std::make_unique<LogisticRegression>(params);
    case ClassifierKind::linear_svm:
      return std::make_unique<LinearSvm>(params);
    case ClassifierKind::naive_bayes:
      return std::make_unique<NaiveBayes>(params);
    case ClassifierKind::knn:
      return std::make_unique<Knn>(params);
    case ClassifierKind::random_forest:
      return std::make_unique<RandomForest>(params);
    case ClassifierKind::mlp:
      return std::make_unique<Mlp>(params);
  }
  throw Error(ErrorCode::invalid_argument, "unknown classifier kind");
}

}  // namespace synthaug::utility
