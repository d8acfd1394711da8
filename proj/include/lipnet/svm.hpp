#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lipnet/tensor.hpp"

namespace lipnet {

struct LinearSvmModel {
  Eigen::MatrixXf weightMatrix;  // classCount x d
  Eigen::VectorXf biases;        // classCount
  float trainedC = 1.0f;

  int class_count() const { return static_cast<int>(weightMatrix.rows()); }
  int input_dim() const { return static_cast<int>(weightMatrix.cols()); }
};

struct SvmTrainConfig {
  float c = 1.0f;
  int epochs = 50;
  std::uint64_t seed = 1;
  double tolerance = 1e-5;  // stop when the epoch objective change drops below
};

// One-vs-rest L2-regularized hinge loss, Pegasos-style 1/(lambda t) schedule
// with lambda = 1/(nC). Deterministic given the seed; the binary problems are
// seeded independently so their results do not depend on training order.
LinearSvmModel train_linear_svm(const Eigen::MatrixXf& x,
                                const std::vector<int>& y,
                                const SvmTrainConfig& cfg);

// argmax of per-class scores w_i . x + b_i, lowest index wins ties.
std::pair<int, Eigen::VectorXf> predict_svm(const LinearSvmModel& model,
                                            const Eigen::VectorXf& x);

// Regularized hinge objective of one binary problem (labels +-1), used both
// by the stopping rule and by oracle tests.
double svm_binary_objective(const Eigen::VectorXf& w, float b,
                            const Eigen::MatrixXf& x, const std::vector<int>& ypm,
                            double lambda);

TensorSet svm_to_tensors(const LinearSvmModel& model);
LinearSvmModel svm_from_tensors(const TensorSet& set);

}  // namespace lipnet
