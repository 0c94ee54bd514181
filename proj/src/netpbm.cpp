#include "negev/netpbm.hpp"

#include <cmath>
#include <fstream>
#include <string>

namespace negev {
namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct HeaderReader {
  const std::string& bytes;
  std::size_t pos = 0;

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        return;
      }
    }
  }

  int read_int(const char* what) {
    skip_space_and_comments();
    if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9')
      throw ParseError(std::string("expected ") + what, pos);
    long v = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1 << 20) throw ParseError(std::string(what) + " out of range", pos);
      ++pos;
    }
    return static_cast<int>(v);
  }
};

std::uint8_t quantize(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3)
    throw DimensionError("write_ppm: expected [3,H,W] image");
  const int h = image.dim(1), w = image.dim(2);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + plane * 3);
  auto v = image.values();
  for (std::size_t p = 0; p < plane; ++p) {
    out.push_back(static_cast<char>(quantize(v[p])));
    out.push_back(static_cast<char>(quantize(v[plane + p])));
    out.push_back(static_cast<char>(quantize(v[2 * plane + p])));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write file: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

Tensor read_ppm(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  HeaderReader r{bytes};
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    throw ParseError("not a P6 PPM file", 0);
  r.pos = 2;
  const int w = r.read_int("width");
  const int h = r.read_int("height");
  const int maxval = r.read_int("maxval");
  if (maxval != 255) throw ParseError("unsupported maxval (want 255)", r.pos);
  if (r.pos >= bytes.size()) throw ParseError("missing payload separator", r.pos);
  ++r.pos;  // exactly one whitespace byte separates header and payload
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  if (bytes.size() - r.pos < plane * 3)
    throw ParseError("truncated PPM payload", bytes.size());

  Tensor image = Tensor::zeros({3, h, w});
  auto v = image.values_mut();
  for (std::size_t p = 0; p < plane; ++p) {
    const std::size_t at = r.pos + 3 * p;
    v[p] = static_cast<std::uint8_t>(bytes[at]) / 255.0;
    v[plane + p] = static_cast<std::uint8_t>(bytes[at + 1]) / 255.0;
    v[2 * plane + p] = static_cast<std::uint8_t>(bytes[at + 2]) / 255.0;
  }
  return image;
}

void write_pgm(const std::filesystem::path& path, int height, int width,
               const std::vector<std::uint8_t>& mask01) {
  if (height <= 0 || width <= 0 ||
      mask01.size() != static_cast<std::size_t>(height) * width)
    throw DimensionError("write_pgm: dims do not match mask size");
  std::string out =
      "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + mask01.size());
  for (std::uint8_t m : mask01) {
    if (m > 1) throw DimensionError("write_pgm: mask must be strictly binary");
    out.push_back(static_cast<char>(m ? 255 : 0));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write file: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

PgmMask read_pgm(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  HeaderReader r{bytes};
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw ParseError("not a P5 PGM file", 0);
  r.pos = 2;
  const int w = r.read_int("width");
  const int h = r.read_int("height");
  const int maxval = r.read_int("maxval");
  if (maxval != 255) throw ParseError("unsupported maxval (want 255)", r.pos);
  if (r.pos >= bytes.size()) throw ParseError("missing payload separator", r.pos);
  ++r.pos;
  const std::size_t n = static_cast<std::size_t>(h) * w;
  if (bytes.size() - r.pos < n) throw ParseError("truncated PGM payload", bytes.size());

  PgmMask mask;
  mask.height = h;
  mask.width = w;
  mask.mask01.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto b = static_cast<std::uint8_t>(bytes[r.pos + p]);
    if (b != 0 && b != 255)
      throw ParseError("mask byte is neither 0 nor 255", r.pos + p);
    mask.mask01[p] = b ? 1 : 0;
  }
  return mask;
}

}  // namespace negev
