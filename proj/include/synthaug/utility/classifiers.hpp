#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "synthaug/data.hpp"

namespace synthaug::utility {

enum class ClassifierKind { logistic_regression, linear_svm, naive_bayes, knn, random_forest, mlp };

inline constexpr ClassifierKind kAllClassifiers[] = {
    ClassifierKind::logistic_regression, ClassifierKind::linear_svm, ClassifierKind::naive_bayes,
    ClassifierKind::knn, ClassifierKind::random_forest, ClassifierKind::mlp};

const char* to_string(ClassifierKind k) noexcept;
ClassifierKind classifier_from_string(const std::string& name);

struct ClassifierParams {
  // logistic regression: full-batch gradient descent
  std::size_t lr_iterations = 500;
  double lr_step = 0.5;
  double l2 = 1e-4;
  // linear SVM: minibatch hinge-loss SGD, same iteration budget and L2
  std::size_t svm_iterations = 500;
  std::size_t svm_batch = 256;
  double svm_step = 0.1;
  double nb_alpha = 1.0;
  std::size_t knn_k = 5;
  std::size_t forest_trees = 100;
  std::size_t forest_min_split = 2;
  std::size_t mlp_hidden = 64;
  std::size_t mlp_epochs = 100;
  std::size_t mlp_batch = 200;
  double mlp_lr = 1e-3;
};

class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ClassifierKind kind() const noexcept = 0;
  // Throws insufficient_data unless both classes are present.
  virtual void fit(const data::LabeledDataset& train, std::uint64_t seed) = 0;
  // Real-valued ranking score per row; larger means label 1 is more likely.
  virtual std::vector<double> score(const data::BinaryMatrix& x) const = 0;
  // 0.5 for probabilistic scores, 0 for margins.
  virtual double threshold() const noexcept { return 0.5; }

  std::vector<std::uint8_t> predict(const data::BinaryMatrix& x) const;
};

std::unique_ptr<Classifier> make_classifier(ClassifierKind kind, const ClassifierParams& params = {});

}  // namespace synthaug::utility
