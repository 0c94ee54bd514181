#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "negev/tensor.hpp"

namespace negev {

/// Binary PPM (P6, maxval 255). Image values in [0,1] are quantized with
/// round-to-nearest, so a write/read round-trip stays within 1/255.
void write_ppm(const std::filesystem::path& path, const Tensor& image);
Tensor read_ppm(const std::filesystem::path& path);

/// Binary PGM (P5, maxval 255) for strictly binary masks, stored as {0,255}.
/// Round-trips exactly.
void write_pgm(const std::filesystem::path& path, int height, int width,
               const std::vector<std::uint8_t>& mask01);

struct PgmMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> mask01;
};
PgmMask read_pgm(const std::filesystem::path& path);

}  // namespace negev
