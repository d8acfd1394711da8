#include "lipnet/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "lipnet/rng.hpp"

namespace lipnet {

double svm_binary_objective(const Eigen::VectorXf& w, float b,
                            const Eigen::MatrixXf& x, const std::vector<int>& ypm,
                            double lambda) {
  double hinge = 0.0;
  for (long i = 0; i < x.rows(); ++i) {
    const double margin = static_cast<double>(ypm[static_cast<std::size_t>(i)]) *
                          (x.row(i).dot(w) + b);
    hinge += std::max(0.0, 1.0 - margin);
  }
  return 0.5 * lambda * static_cast<double>(w.squaredNorm()) +
         hinge / static_cast<double>(x.rows());
}

namespace {

// Pegasos-style sub-gradient descent for one binary problem. The bias is
// unregularized and updated with the same step size.
std::pair<Eigen::VectorXf, float> train_binary(const Eigen::MatrixXf& x,
                                               const std::vector<int>& ypm,
                                               const SvmTrainConfig& cfg,
                                               double lambda,
                                               std::uint64_t problemSeed) {
  const long n = x.rows();
  Eigen::VectorXf w = Eigen::VectorXf::Zero(x.cols());
  float b = 0.0f;
  Rng rng(problemSeed);
  std::vector<long> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  double prevObjective = svm_binary_objective(w, b, x, ypm, lambda);
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (long i : order) {
      ++t;
      const float eta = static_cast<float>(1.0 / (lambda * static_cast<double>(t)));
      const float y = static_cast<float>(ypm[static_cast<std::size_t>(i)]);
      const float margin = y * (x.row(i).dot(w) + b);
      w *= (1.0f - eta * static_cast<float>(lambda));
      if (margin < 1.0f) {
        w += eta * y * x.row(i).transpose();
        b += eta * y;
      }
    }
    const double objective = svm_binary_objective(w, b, x, ypm, lambda);
    if (std::abs(prevObjective - objective) < cfg.tolerance) break;
    prevObjective = objective;
  }
  return {std::move(w), b};
}

}  // namespace

LinearSvmModel train_linear_svm(const Eigen::MatrixXf& x,
                                const std::vector<int>& y,
                                const SvmTrainConfig& cfg) {
  const long n = x.rows();
  if (n < 2 || static_cast<long>(y.size()) != n)
    throw std::invalid_argument("train_linear_svm: need >= 2 labeled samples");
  if (cfg.c <= 0.0f || cfg.epochs < 1)
    throw std::invalid_argument("train_linear_svm: invalid training config");
  const int classCount = 1 + *std::max_element(y.begin(), y.end());
  if (std::set<int>(y.begin(), y.end()).size() < 2)
    throw std::invalid_argument("train_linear_svm: single-class data");
  for (int label : y)
    if (label < 0) throw std::invalid_argument("train_linear_svm: negative label");

  const double lambda = 1.0 / (static_cast<double>(n) * cfg.c);
  LinearSvmModel model;
  model.trainedC = cfg.c;
  model.weightMatrix.setZero(classCount, x.cols());
  model.biases.setZero(classCount);

  for (int c = 0; c < classCount; ++c) {
    std::vector<int> ypm(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i)
      ypm[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] == c ? 1 : -1;
    auto [w, b] = train_binary(
        x, ypm, cfg, lambda,
        cfg.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(c + 1));
    model.weightMatrix.row(c) = w.transpose();
    model.biases(c) = b;
  }
  return model;
}

std::pair<int, Eigen::VectorXf> predict_svm(const LinearSvmModel& model,
                                            const Eigen::VectorXf& x) {
  if (x.size() != model.weightMatrix.cols())
    throw std::invalid_argument("predict_svm: dimension mismatch");
  Eigen::VectorXf scores = model.weightMatrix * x + model.biases;
  int best = 0;
  for (int c = 1; c < scores.size(); ++c)
    if (scores(c) > scores(best)) best = c;
  return {best, std::move(scores)};
}

TensorSet svm_to_tensors(const LinearSvmModel& model) {
  TensorSet set;
  const auto rows = static_cast<std::uint32_t>(model.weightMatrix.rows());
  const auto cols = static_cast<std::uint32_t>(model.weightMatrix.cols());
  Tensor w({rows, cols});
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c)
      w.data[static_cast<std::size_t>(r) * cols + c] = model.weightMatrix(r, c);
  set.push_back({"weights", std::move(w)});
  Tensor b({rows});
  for (std::uint32_t r = 0; r < rows; ++r) b.data[r] = model.biases(r);
  set.push_back({"biases", std::move(b)});
  Tensor meta({1});
  meta.data[0] = model.trainedC;
  set.push_back({"meta/c", std::move(meta)});
  return set;
}

LinearSvmModel svm_from_tensors(const TensorSet& set) {
  const Tensor& w = find_tensor(set, "weights");
  const Tensor& b = find_tensor(set, "biases");
  if (w.dims.size() != 2 || b.dims.size() != 1 || w.dims[0] != b.dims[0])
    throw TensorFormatError("inconsistent SVM model tensors");
  LinearSvmModel model;
  const long rows = w.dims[0], cols = w.dims[1];
  model.weightMatrix.resize(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c)
      model.weightMatrix(r, c) = w.data[r * cols + c];
  model.biases.resize(rows);
  for (long r = 0; r < rows; ++r) model.biases(r) = b.data[r];
  model.trainedC = find_tensor(set, "meta/c").data.at(0);
  return model;
}

}  // namespace lipnet
