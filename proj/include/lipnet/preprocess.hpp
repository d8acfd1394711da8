#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "lipnet/image.hpp"

namespace lipnet {

inline constexpr int kPatchSide = 40;
inline constexpr int kPatchPixels = kPatchSide * kPatchSide;

// 40x40 normalized greyscale mouth window, the universal classifier input.
struct MouthPatch {
  std::array<float, kPatchPixels> pixels{};
  int sourceFrame = 0;
  // set when mouth localization failed and the fixed lower-face window was used
  bool localizationFallback = false;
};

struct StandardizationStats {
  double mean = 0.0;
  double stdDev = 1.0;
};

// sRGB in [0,1] -> CIE L*a*b* (D65). Throws std::invalid_argument unless 3-channel.
Image rgb_to_lab(const Image& img);

// entry(r,c) = exp(-((c - w/2)^2 + (r - 0.3 h)^2) / (2 sigma^2));
// peak 1 at (w/2, 0.3 h).
Eigen::MatrixXf gaussian_weight_map(int w, int h, float sigma = 500.0f);

// (m - min) / (max - min); a constant matrix maps to all zeros.
Eigen::MatrixXf rescale_unit(const Eigen::MatrixXf& m);

// Unweighted centroid (x,y) of {(r,c) : rescale_unit(a .* weights)(r,c) > 0.9}.
// Empty mask -> nullopt (caller falls back to the fixed lower-face window).
std::optional<std::pair<float, float>> locate_mouth_center(
    const Eigen::MatrixXf& aChannel, const Eigen::MatrixXf& weights);

// Full mouth-window extraction: inflate the face box 1.5x, crop, resize to
// width 128, localize the mouth on the Gaussian-weighted A channel, cut the
// 40x40 window (clamped inside the crop), greyscale, contrast-maximize.
MouthPatch extract_mouth_patch(const Image& frame, const FaceBox& face,
                               float gaussianSigma = 500.0f);

StandardizationStats compute_standardization(const std::vector<MouthPatch>& patches);
void standardize(std::vector<MouthPatch>& patches, const StandardizationStats& stats);

// Bilinear resampling, any channel count.
Image resize_bilinear(const Image& src, int dstWidth, int dstHeight);

// Rec.601 luma (0.299, 0.587, 0.114); identity on single-channel input.
Image to_greyscale(const Image& img);

}  // namespace lipnet
