#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lipnet {

// Channel-interleaved row-major image, values nominally in [0,1]
// (Lab images carry L in [0,100] and signed a/b instead).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> pixels;

  Image() = default;
  Image(int w, int h, int ch)
      : width(w), height(h), channels(ch),
        pixels(static_cast<std::size_t>(w) * h * ch, 0.0f) {}

  float& at(int row, int col, int ch = 0) {
    return pixels[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
  float at(int row, int col, int ch = 0) const {
    return pixels[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
};

struct FaceBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
};

// PGM (P5) / PPM (P6) loading and PGM saving, 8-bit, mapped to [0,1].
Image load_pnm(const std::string& path);
void save_pgm(const std::string& path, const Image& img);

}  // namespace lipnet
