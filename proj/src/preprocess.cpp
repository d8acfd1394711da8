#include "lipnet/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lipnet {
namespace {

inline float srgb_to_linear(float c) {
  return c <= 0.04045f ? c / 12.92f
                       : std::pow((c + 0.055f) / 1.055f, 2.4f);
}

inline float lab_f(float t) {
  constexpr float delta = 6.0f / 29.0f;
  return t > delta * delta * delta
             ? std::cbrt(t)
             : t / (3.0f * delta * delta) + 4.0f / 29.0f;
}

inline int clampi(int v, int lo, int hi) { return std::min(hi, std::max(lo, v)); }

}  // namespace

Image rgb_to_lab(const Image& img) {
  if (img.channels != 3)
    throw std::invalid_argument("rgb_to_lab requires a 3-channel image");
  // D65 white point
  constexpr float Xn = 0.95047f, Yn = 1.0f, Zn = 1.08883f;
  Image out(img.width, img.height, 3);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    const float r = srgb_to_linear(img.pixels[i]);
    const float g = srgb_to_linear(img.pixels[i + 1]);
    const float b = srgb_to_linear(img.pixels[i + 2]);
    const float X = 0.4124564f * r + 0.3575761f * g + 0.1804375f * b;
    const float Y = 0.2126729f * r + 0.7151522f * g + 0.0721750f * b;
    const float Z = 0.0193339f * r + 0.1191920f * g + 0.9503041f * b;
    const float fx = lab_f(X / Xn);
    const float fy = lab_f(Y / Yn);
    const float fz = lab_f(Z / Zn);
    out.pixels[i] = 116.0f * fy - 16.0f;
    out.pixels[i + 1] = 500.0f * (fx - fy);
    out.pixels[i + 2] = 200.0f * (fy - fz);
  }
  return out;
}

Eigen::MatrixXf gaussian_weight_map(int w, int h, float sigma) {
  if (w <= 0 || h <= 0 || sigma <= 0.0f)
    throw std::invalid_argument("gaussian_weight_map: invalid geometry");
  const float cx = static_cast<float>(w) / 2.0f;
  const float cy = 0.3f * static_cast<float>(h);
  const float inv = 1.0f / (2.0f * sigma * sigma);
  Eigen::MatrixXf m(h, w);
  for (int r = 0; r < h; ++r) {
    const float dy = static_cast<float>(r) - cy;
    for (int c = 0; c < w; ++c) {
      const float dx = static_cast<float>(c) - cx;
      m(r, c) = std::exp(-(dx * dx + dy * dy) * inv);
    }
  }
  return m;
}

Eigen::MatrixXf rescale_unit(const Eigen::MatrixXf& m) {
  const float lo = m.minCoeff();
  const float hi = m.maxCoeff();
  if (hi <= lo) return Eigen::MatrixXf::Zero(m.rows(), m.cols());
  return (m.array() - lo) / (hi - lo);
}

std::optional<std::pair<float, float>> locate_mouth_center(
    const Eigen::MatrixXf& aChannel, const Eigen::MatrixXf& weights) {
  if (aChannel.rows() != weights.rows() || aChannel.cols() != weights.cols())
    throw std::invalid_argument("locate_mouth_center: shape mismatch");
  const Eigen::MatrixXf m = rescale_unit(aChannel.cwiseProduct(weights));
  double sumX = 0.0, sumY = 0.0;
  long count = 0;
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c)
      if (m(r, c) > 0.9f) {
        sumX += static_cast<double>(c);
        sumY += static_cast<double>(r);
        ++count;
      }
  if (count == 0) return std::nullopt;
  return std::make_pair(static_cast<float>(sumX / count),
                        static_cast<float>(sumY / count));
}

Image resize_bilinear(const Image& src, int dstWidth, int dstHeight) {
  if (dstWidth <= 0 || dstHeight <= 0 || src.width <= 0 || src.height <= 0)
    throw std::invalid_argument("resize_bilinear: invalid dimensions");
  Image dst(dstWidth, dstHeight, src.channels);
  const float sx = static_cast<float>(src.width) / dstWidth;
  const float sy = static_cast<float>(src.height) / dstHeight;
  for (int r = 0; r < dstHeight; ++r) {
    // pixel-center mapping
    const float fy = (static_cast<float>(r) + 0.5f) * sy - 0.5f;
    const int y0 = clampi(static_cast<int>(std::floor(fy)), 0, src.height - 1);
    const int y1 = clampi(y0 + 1, 0, src.height - 1);
    const float wy = std::min(1.0f, std::max(0.0f, fy - static_cast<float>(y0)));
    for (int c = 0; c < dstWidth; ++c) {
      const float fx = (static_cast<float>(c) + 0.5f) * sx - 0.5f;
      const int x0 = clampi(static_cast<int>(std::floor(fx)), 0, src.width - 1);
      const int x1 = clampi(x0 + 1, 0, src.width - 1);
      const float wx = std::min(1.0f, std::max(0.0f, fx - static_cast<float>(x0)));
      for (int ch = 0; ch < src.channels; ++ch) {
        const float top = src.at(y0, x0, ch) * (1.0f - wx) + src.at(y0, x1, ch) * wx;
        const float bot = src.at(y1, x0, ch) * (1.0f - wx) + src.at(y1, x1, ch) * wx;
        dst.at(r, c, ch) = top * (1.0f - wy) + bot * wy;
      }
    }
  }
  return dst;
}

Image to_greyscale(const Image& img) {
  if (img.channels == 1) return img;
  if (img.channels != 3)
    throw std::invalid_argument("to_greyscale: expected 1 or 3 channels");
  Image out(img.width, img.height, 1);
  for (std::size_t i = 0, o = 0; i < img.pixels.size(); i += 3, ++o)
    out.pixels[o] = 0.299f * img.pixels[i] + 0.587f * img.pixels[i + 1] +
                    0.114f * img.pixels[i + 2];
  return out;
}

MouthPatch extract_mouth_patch(const Image& frame, const FaceBox& face,
                               float gaussianSigma) {
  if (face.w <= 0 || face.h <= 0)
    throw std::invalid_argument("extract_mouth_patch: empty face box");
  // inflate 1.5x about the box center, clamp to the frame
  const float cx = static_cast<float>(face.x) + face.w / 2.0f;
  const float cy = static_cast<float>(face.y) + face.h / 2.0f;
  const int x0 = clampi(static_cast<int>(std::lround(cx - 0.75f * face.w)), 0, frame.width - 1);
  const int y0 = clampi(static_cast<int>(std::lround(cy - 0.75f * face.h)), 0, frame.height - 1);
  const int x1 = clampi(static_cast<int>(std::lround(cx + 0.75f * face.w)), x0 + 1, frame.width);
  const int y1 = clampi(static_cast<int>(std::lround(cy + 0.75f * face.h)), y0 + 1, frame.height);
  if (x1 <= x0 || y1 <= y0)
    throw std::invalid_argument("extract_mouth_patch: face box outside frame");

  Image crop(x1 - x0, y1 - y0, frame.channels);
  for (int r = 0; r < crop.height; ++r)
    for (int c = 0; c < crop.width; ++c)
      for (int ch = 0; ch < crop.channels; ++ch)
        crop.at(r, c, ch) = frame.at(y0 + r, x0 + c, ch);

  const int rw = 128;
  const int rh = std::max(
      1, static_cast<int>(std::lround(crop.height * 128.0 / crop.width)));
  const Image resized = resize_bilinear(crop, rw, rh);

  std::optional<std::pair<float, float>> center;
  if (resized.channels == 3) {
    const Image lab = rgb_to_lab(resized);
    Eigen::MatrixXf aCh(rh, rw);
    for (int r = 0; r < rh; ++r)
      for (int c = 0; c < rw; ++c) aCh(r, c) = lab.at(r, c, 1);
    center = locate_mouth_center(aCh, gaussian_weight_map(rw, rh, gaussianSigma));
  }

  MouthPatch patch;
  if (!center) {
    // lower-face fallback window
    center = std::make_pair(rw / 2.0f, 0.70f * static_cast<float>(rh));
    patch.localizationFallback = true;
  }

  const Image grey = to_greyscale(resized);
  const int half = kPatchSide / 2;
  const int wx = clampi(static_cast<int>(std::lround(center->first)) - half, 0,
                        std::max(0, rw - kPatchSide));
  const int wy = clampi(static_cast<int>(std::lround(center->second)) - half, 0,
                        std::max(0, rh - kPatchSide));

  Eigen::MatrixXf window(kPatchSide, kPatchSide);
  for (int r = 0; r < kPatchSide; ++r) {
    const int sr = clampi(wy + r, 0, rh - 1);  // replicate if the crop is short
    for (int c = 0; c < kPatchSide; ++c)
      window(r, c) = grey.at(sr, clampi(wx + c, 0, rw - 1));
  }
  const Eigen::MatrixXf normalized = rescale_unit(window);
  for (int r = 0; r < kPatchSide; ++r)
    for (int c = 0; c < kPatchSide; ++c)
      patch.pixels[static_cast<std::size_t>(r) * kPatchSide + c] = normalized(r, c);
  return patch;
}

StandardizationStats compute_standardization(const std::vector<MouthPatch>& patches) {
  if (patches.empty())
    throw std::invalid_argument("compute_standardization: no patches");
  // fixed reduction order: patch by patch, pixel by pixel, double accumulators
  double sum = 0.0, sumSq = 0.0;
  const double n = static_cast<double>(patches.size()) * kPatchPixels;
  for (const auto& p : patches)
    for (float v : p.pixels) {
      sum += v;
      sumSq += static_cast<double>(v) * v;
    }
  StandardizationStats stats;
  stats.mean = sum / n;
  const double var = std::max(0.0, sumSq / n - stats.mean * stats.mean);
  stats.stdDev = std::sqrt(var);
  if (stats.stdDev <= 0.0)
    throw std::runtime_error("standardize: degenerate (constant) dataset");
  return stats;
}

void standardize(std::vector<MouthPatch>& patches, const StandardizationStats& stats) {
  if (stats.stdDev <= 0.0)
    throw std::runtime_error("standardize: stdDev must be positive");
  const float mean = static_cast<float>(stats.mean);
  const float inv = static_cast<float>(1.0 / stats.stdDev);
  for (auto& p : patches)
    for (float& v : p.pixels) v = (v - mean) * inv;
}

}  // namespace lipnet
