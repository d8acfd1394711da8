#include "lipnet/checkpoint.hpp"

namespace lipnet {

TensorSet network_to_tensors(LstmNetwork<float>& net, const CheckpointMeta& meta) {
  TensorSet set;
  Tensor shape({4});
  shape.data = {static_cast<float>(net.shape.inputDim),
                static_cast<float>(net.shape.ffUnits),
                static_cast<float>(net.shape.lstmUnits),
                static_cast<float>(net.shape.classCount)};
  set.push_back({"meta/shape", std::move(shape)});
  // epoch, valAccuracy, seed as four 16-bit chunks (exactly representable)
  Tensor m({6});
  m.data = {static_cast<float>(meta.epoch), static_cast<float>(meta.valAccuracy),
            static_cast<float>(meta.seed & 0xffff),
            static_cast<float>((meta.seed >> 16) & 0xffff),
            static_cast<float>((meta.seed >> 32) & 0xffff),
            static_cast<float>((meta.seed >> 48) & 0xffff)};
  set.push_back({"meta/train", std::move(m)});
  visit_params(net, [&](const char* name, auto& block) {
    Tensor t;
    if (block.cols() == 1) {
      t.dims = {static_cast<std::uint32_t>(block.rows())};
    } else {
      t.dims = {static_cast<std::uint32_t>(block.rows()),
                static_cast<std::uint32_t>(block.cols())};
    }
    t.data.resize(static_cast<std::size_t>(block.size()));
    for (long r = 0; r < block.rows(); ++r)
      for (long c = 0; c < block.cols(); ++c)
        t.data[static_cast<std::size_t>(r) * block.cols() + c] = block(r, c);
    set.push_back({name, std::move(t)});
  });
  return set;
}

LstmNetwork<float> network_from_tensors(const TensorSet& set,
                                        CheckpointMeta* metaOut) {
  const Tensor& shape = find_tensor(set, "meta/shape");
  if (shape.data.size() != 4)
    throw TensorFormatError("bad checkpoint shape record");
  NetShape ns{static_cast<int>(shape.data[0]), static_cast<int>(shape.data[1]),
              static_cast<int>(shape.data[2]), static_cast<int>(shape.data[3])};
  LstmNetwork<float> net;
  allocate_network(net, ns);
  visit_params(net, [&](const char* name, auto& block) {
    const Tensor& t = find_tensor(set, name);
    if (static_cast<long>(t.element_count()) != block.size())
      throw TensorFormatError(std::string("checkpoint size mismatch in ") + name);
    for (long r = 0; r < block.rows(); ++r)
      for (long c = 0; c < block.cols(); ++c)
        block(r, c) = t.data[static_cast<std::size_t>(r) * block.cols() + c];
  });
  if (metaOut) {
    const Tensor& m = find_tensor(set, "meta/train");
    if (m.data.size() != 6) throw TensorFormatError("bad checkpoint meta record");
    metaOut->epoch = static_cast<int>(m.data[0]);
    metaOut->valAccuracy = m.data[1];
    metaOut->seed = static_cast<std::uint64_t>(m.data[2]) |
                    (static_cast<std::uint64_t>(m.data[3]) << 16) |
                    (static_cast<std::uint64_t>(m.data[4]) << 32) |
                    (static_cast<std::uint64_t>(m.data[5]) << 48);
  }
  return net;
}

}  // namespace lipnet
