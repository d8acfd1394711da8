#include "lipnet/gradcheck.hpp"

#include <cmath>

namespace lipnet {

GradCheckReport gradient_check(const NetShape& shape, double tolerance,
                               std::uint64_t seed, long sequenceLength,
                               double epsilon, LossPlacement placement,
                               const std::optional<GradCorruption>& corruption) {
  TrainConfig cfg;
  cfg.seed = seed;
  LstmNetwork<double> net = init_network<double>(shape, cfg);

  Rng rng(seed ^ 0x1234567890abcdefULL);
  Mat<double> frames(sequenceLength, shape.inputDim);
  for (long t = 0; t < sequenceLength; ++t)
    for (int d = 0; d < shape.inputDim; ++d)
      frames(t, d) = rng.uniform(-1.0, 1.0);
  const int label = static_cast<int>(rng.next_below(shape.classCount));

  auto [loss, grad] = loss_and_gradients(net, frames, label, placement);
  (void)loss;
  if (corruption) {
    visit_params(grad, [&](const char* name, auto& block) {
      if (corruption->block == name && corruption->index < block.size())
        block.data()[corruption->index] *= corruption->factor;
    });
  }

  // denominator floor keeps near-zero gradients from amplifying finite-
  // difference noise into spurious relative error
  constexpr double floor = 1e-4;
  GradCheckReport report;
  visit_params(net, [&](const char* name, auto& block) {
    double* analyticBlock = nullptr;
    visit_params(grad, [&](const char* gname, auto& gblock) {
      if (std::string(gname) == name) analyticBlock = gblock.data();
    });
    for (long i = 0; i < block.size(); ++i) {
      const double saved = block.data()[i];
      block.data()[i] = saved + epsilon;
      const double lossPlus =
          loss_and_gradients(net, frames, label, placement).first;
      block.data()[i] = saved - epsilon;
      const double lossMinus =
          loss_and_gradients(net, frames, label, placement).first;
      block.data()[i] = saved;
      const double numeric = (lossPlus - lossMinus) / (2.0 * epsilon);
      const double analytic = analyticBlock[i];
      const double rel = std::abs(analytic - numeric) /
                         std::max(floor, std::abs(analytic) + std::abs(numeric));
      if (rel > report.maxRelError) {
        report.maxRelError = rel;
        report.worstBlock = name;
        report.worstIndex = i;
      }
    }
  });
  report.passed = report.maxRelError < tolerance;
  return report;
}

}  // namespace lipnet
