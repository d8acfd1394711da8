#include "lipnet/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

namespace lipnet {
namespace {

int read_pnm_int(std::istream& is, const std::string& path) {
  // skip whitespace and '#' comment lines
  int c = is.get();
  for (;;) {
    while (c != EOF && std::isspace(c)) c = is.get();
    if (c == '#') {
      while (c != EOF && c != '\n') c = is.get();
    } else {
      break;
    }
  }
  int value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = is.get();
  }
  if (!any) throw std::runtime_error("malformed PNM header: " + path);
  return value;
}

}  // namespace

Image load_pnm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open image: " + path);
  char p, kind;
  is.get(p);
  is.get(kind);
  if (p != 'P' || (kind != '5' && kind != '6'))
    throw std::runtime_error("unsupported PNM type (want P5/P6): " + path);
  const int channels = kind == '5' ? 1 : 3;
  const int w = read_pnm_int(is, path);
  const int h = read_pnm_int(is, path);
  const int maxval = read_pnm_int(is, path);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw std::runtime_error("unsupported PNM geometry: " + path);
  Image img(w, h, channels);
  std::vector<unsigned char> raw(img.pixels.size());
  if (!is.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(raw.size())))
    throw std::runtime_error("truncated PNM payload: " + path);
  const float scale = 1.0f / static_cast<float>(maxval);
  for (std::size_t i = 0; i < raw.size(); ++i)
    img.pixels[i] = static_cast<float>(raw[i]) * scale;
  return img;
}

void save_pgm(const std::string& path, const Image& img) {
  if (img.channels != 1)
    throw std::invalid_argument("save_pgm expects a single-channel image");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "P5\n" << img.width << " " << img.height << "\n255\n";
  for (float v : img.pixels) {
    const float clamped = std::min(1.0f, std::max(0.0f, v));
    os.put(static_cast<char>(std::lround(clamped * 255.0f)));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace lipnet
