#pragma once

#include <optional>
#include <string>

#include "lipnet/net.hpp"

namespace lipnet {

struct GradCheckReport {
  double maxRelError = 0.0;
  std::string worstBlock;
  long worstIndex = 0;
  bool passed = false;
};

// Deliberate analytic-gradient corruption for fault-injection tests.
struct GradCorruption {
  std::string block;
  long index = 0;
  double factor = 2.0;
};

// Compares full-BPTT analytic gradients against central finite differences
// (64-bit arithmetic) on a randomly initialized network and sequence.
// Relative error per entry: |a - n| / max(floor, |a| + |n|).
GradCheckReport gradient_check(
    const NetShape& shape, double tolerance = 1e-4, std::uint64_t seed = 7,
    long sequenceLength = 7, double epsilon = 1e-4,
    LossPlacement placement = LossPlacement::PerFrame,
    const std::optional<GradCorruption>& corruption = std::nullopt);

}  // namespace lipnet
