#include "lipnet/features.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace lipnet {

PcaModel fit_pca(const Eigen::MatrixXd& trainingFrames, int k) {
  const long n = trainingFrames.rows();
  const long dim = trainingFrames.cols();
  if (k < 1 || k > std::min(n, dim))
    throw std::invalid_argument("fit_pca: k must be in [1, min(n, dim)]");

  PcaModel model;
  model.meanVector = trainingFrames.colwise().mean();
  const Eigen::MatrixXd centered = trainingFrames.rowwise() - model.meanVector.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n - 1 > 0 ? n - 1 : 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("fit_pca: eigendecomposition failed");

  // eigenvalues come back ascending; take the top k in descending order
  model.components.resize(k, dim);
  model.variances.resize(k);
  for (int i = 0; i < k; ++i) {
    const long src = dim - 1 - i;
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    // deterministic sign: largest-magnitude entry positive
    long maxIdx = 0;
    v.cwiseAbs().maxCoeff(&maxIdx);
    if (v(maxIdx) < 0.0) v = -v;
    model.components.row(i) = v.transpose();
    model.variances(i) = std::max(0.0, solver.eigenvalues()(src));
  }
  return model;
}

Eigen::VectorXd project_eigenlips(const PcaModel& model, const Eigen::VectorXd& frame) {
  if (frame.size() != model.meanVector.size())
    throw std::invalid_argument("project_eigenlips: dimension mismatch");
  return model.components * (frame - model.meanVector);
}

int hog_descriptor_length(int patchSide, const HogConfig& cfg) {
  if (cfg.cellSize <= 0 || patchSide % cfg.cellSize != 0)
    throw std::invalid_argument("compute_hog: cell size must divide the patch side");
  if (cfg.orientationBins < 2)
    throw std::invalid_argument("compute_hog: need at least 2 orientation bins");
  const int cells = patchSide / cfg.cellSize;
  const int blocks = cells - cfg.blockSize + 1;
  if (blocks < 1)
    throw std::invalid_argument("compute_hog: block larger than cell grid");
  return blocks * blocks * cfg.blockSize * cfg.blockSize * cfg.orientationBins;
}

Eigen::VectorXf compute_hog(const Eigen::MatrixXf& patch, const HogConfig& cfg) {
  if (patch.rows() != patch.cols())
    throw std::invalid_argument("compute_hog: patch must be square");
  const int side = static_cast<int>(patch.rows());
  const int descLen = hog_descriptor_length(side, cfg);  // validates cfg
  const int cells = side / cfg.cellSize;
  const int bins = cfg.orientationBins;
  const float binWidth = 180.0f / static_cast<float>(bins);

  Eigen::MatrixXf hist = Eigen::MatrixXf::Zero(cells * cells, bins);
  auto clamp = [side](int v) { return std::min(side - 1, std::max(0, v)); };
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const float gx = patch(r, clamp(c + 1)) - patch(r, clamp(c - 1));
      const float gy = patch(clamp(r + 1), c) - patch(clamp(r - 1), c);
      const float mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0f) continue;
      float angle = std::atan2(gy, gx) * 57.29577951308232f;  // degrees
      angle = std::fmod(angle + 360.0f, 180.0f);              // unsigned
      // bilinear vote between the two nearest bin centers
      const float pos = angle / binWidth - 0.5f;
      const int b0 = static_cast<int>(std::floor(pos));
      const float frac = pos - static_cast<float>(b0);
      const int lo = (b0 % bins + bins) % bins;
      const int hi = (lo + 1) % bins;
      const int cell = (r / cfg.cellSize) * cells + c / cfg.cellSize;
      hist(cell, lo) += mag * (1.0f - frac);
      hist(cell, hi) += mag * frac;
    }
  }

  const int blocks = cells - cfg.blockSize + 1;
  const int blockLen = cfg.blockSize * cfg.blockSize * bins;
  constexpr float epsSq = 1e-12f;
  Eigen::VectorXf descriptor(descLen);
  int out = 0;
  for (int br = 0; br < blocks; ++br) {
    for (int bc = 0; bc < blocks; ++bc) {
      Eigen::VectorXf block(blockLen);
      int k = 0;
      for (int dr = 0; dr < cfg.blockSize; ++dr)
        for (int dc = 0; dc < cfg.blockSize; ++dc, k += bins)
          block.segment(k, bins) = hist.row((br + dr) * cells + (bc + dc));
      // L2-hys: normalize, clip, renormalize
      block /= std::sqrt(block.squaredNorm() + epsSq);
      block = block.cwiseMin(cfg.blockNormClip);
      block /= std::sqrt(block.squaredNorm() + epsSq);
      descriptor.segment(out, blockLen) = block;
      out += blockLen;
    }
  }
  return descriptor;
}

Eigen::VectorXf sequence_feature_vector(const std::vector<Eigen::VectorXf>& frames,
                                        int targetLength) {
  if (frames.empty())
    throw std::invalid_argument("sequence_feature_vector: empty sequence");
  if (targetLength < 1)
    throw std::invalid_argument("sequence_feature_vector: target length must be >= 1");
  const long n = static_cast<long>(frames.size());
  const long d = frames.front().size();
  for (const auto& f : frames)
    if (f.size() != d)
      throw std::invalid_argument("sequence_feature_vector: ragged frame dimensions");

  Eigen::VectorXf out(static_cast<long>(targetLength) * d);
  for (long i = 0; i < targetLength; ++i) {
    const long lo = i * n / targetLength;
    const long hi = (i + 1) * n / targetLength;
    Eigen::VectorXf slot = Eigen::VectorXf::Zero(d);
    if (hi <= lo) {
      slot = frames[static_cast<std::size_t>(lo)];  // short sequence: repeat
    } else {
      for (long j = lo; j < hi; ++j) slot += frames[static_cast<std::size_t>(j)];
      slot /= static_cast<float>(hi - lo);
    }
    out.segment(i * d, d) = slot;
  }
  return out;
}

TensorSet pca_to_tensors(const PcaModel& model) {
  const auto k = static_cast<std::uint32_t>(model.component_count());
  const auto dim = static_cast<std::uint32_t>(model.input_dim());
  TensorSet set;
  Tensor mean({dim});
  for (std::uint32_t i = 0; i < dim; ++i)
    mean.data[i] = static_cast<float>(model.meanVector(i));
  set.push_back({"mean", std::move(mean)});
  Tensor comps({k, dim});
  for (std::uint32_t r = 0; r < k; ++r)
    for (std::uint32_t c = 0; c < dim; ++c)
      comps.data[static_cast<std::size_t>(r) * dim + c] =
          static_cast<float>(model.components(r, c));
  set.push_back({"components", std::move(comps)});
  Tensor vars({k});
  for (std::uint32_t i = 0; i < k; ++i)
    vars.data[i] = static_cast<float>(model.variances(i));
  set.push_back({"variances", std::move(vars)});
  return set;
}

PcaModel pca_from_tensors(const TensorSet& set) {
  const Tensor& mean = find_tensor(set, "mean");
  const Tensor& comps = find_tensor(set, "components");
  const Tensor& vars = find_tensor(set, "variances");
  if (comps.dims.size() != 2 || mean.dims.size() != 1 || vars.dims.size() != 1 ||
      comps.dims[1] != mean.dims[0] || comps.dims[0] != vars.dims[0])
    throw TensorFormatError("inconsistent PCA model tensors");
  PcaModel model;
  const long k = comps.dims[0], dim = comps.dims[1];
  model.meanVector.resize(dim);
  for (long i = 0; i < dim; ++i) model.meanVector(i) = mean.data[i];
  model.components.resize(k, dim);
  for (long r = 0; r < k; ++r)
    for (long c = 0; c < dim; ++c)
      model.components(r, c) = comps.data[r * dim + c];
  model.variances.resize(k);
  for (long i = 0; i < k; ++i) model.variances(i) = vars.data[i];
  return model;
}

}  // namespace lipnet
