#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace lipnet {

// Dense row-major float tensor. The on-disk form is the `LRT1` container:
//   magic "LRT1" | u32 entry count | per entry:
//     u32 name length | name bytes | u32 rank | u32 dims[rank] | f32 data (LE)
// Every persisted artifact in the toolkit (patches, PCA models, SVM and
// network checkpoints) uses this one container.
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::uint32_t> d) : dims(std::move(d)) {
    data.assign(element_count(), 0.0f);
  }

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return dims.empty() ? 0 : n;
  }
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

using TensorSet = std::vector<NamedTensor>;

class TensorFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_tensors(const std::string& path, const TensorSet& set);
TensorSet load_tensors(const std::string& path);

// Lookup by name; throws TensorFormatError if absent.
const Tensor& find_tensor(const TensorSet& set, const std::string& name);

}  // namespace lipnet
