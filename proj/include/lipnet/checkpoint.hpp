#pragma once

#include "lipnet/net.hpp"
#include "lipnet/tensor.hpp"

namespace lipnet {

struct CheckpointMeta {
  int epoch = 0;
  std::uint64_t seed = 0;
  double valAccuracy = 0.0;
};

TensorSet network_to_tensors(LstmNetwork<float>& net, const CheckpointMeta& meta);
LstmNetwork<float> network_from_tensors(const TensorSet& set,
                                        CheckpointMeta* metaOut = nullptr);

}  // namespace lipnet
