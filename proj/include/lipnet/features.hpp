#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "lipnet/tensor.hpp"

namespace lipnet {

// Eigenlips: principal components of training mouth patches. Kept in double
// so projections agree with a dense eigendecomposition oracle; persisted as
// f32 like every other tensor.
struct PcaModel {
  Eigen::VectorXd meanVector;     // dim
  Eigen::MatrixXd components;     // k x dim, rows orthonormal
  Eigen::VectorXd variances;      // k, non-increasing

  int component_count() const { return static_cast<int>(components.rows()); }
  int input_dim() const { return static_cast<int>(components.cols()); }
};

struct HogConfig {
  int cellSize = 8;
  int orientationBins = 9;     // unsigned gradients, [0, 180) degrees
  int blockSize = 2;           // cells per block side
  float blockNormClip = 0.2f;  // L2-hys clipping threshold
};

// rows = samples; top-k eigenvectors of the sample covariance, sign-fixed so
// the largest-magnitude entry of each component is positive.
PcaModel fit_pca(const Eigen::MatrixXd& trainingFrames, int k);

Eigen::VectorXd project_eigenlips(const PcaModel& model, const Eigen::VectorXd& frame);

// Dalal-Triggs HOG on a square single-channel patch (row-major values).
// [-1,0,1] central differences with replicate borders, bilinear orientation
// votes, 2x2 blocks with stride 1 cell, L2-hys normalization.
Eigen::VectorXf compute_hog(const Eigen::MatrixXf& patch, const HogConfig& cfg);

int hog_descriptor_length(int patchSide, const HogConfig& cfg);

// Fixed-length sequence feature vector: output slot i (0-based, i < L) is the
// average of input frames with index in [floor(i*n/L), floor((i+1)*n/L));
// an empty bin (n < L) copies frame floor(i*n/L). Slots are concatenated.
Eigen::VectorXf sequence_feature_vector(const std::vector<Eigen::VectorXf>& frames,
                                        int targetLength = 6);

TensorSet pca_to_tensors(const PcaModel& model);
PcaModel pca_from_tensors(const TensorSet& set);

}  // namespace lipnet
