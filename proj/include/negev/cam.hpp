#pragma once

#include <vector>

#include "negev/errors.hpp"

namespace negev {

/// Normalized class activation map at image resolution: values in [0,1],
/// tagged with the class it was computed for.
struct Cam {
  int height = 0;
  int width = 0;
  std::vector<double> values;
  int class_index = 0;

  std::size_t size() const { return values.size(); }

  void validate() const {
    if (height <= 0 || width <= 0 ||
        values.size() != static_cast<std::size_t>(height) * width)
      throw DimensionError("Cam: dims do not match value count");
    for (double v : values)
      if (!(v >= 0.0 && v <= 1.0))
        throw NumericError("Cam: values must lie in [0,1]");
  }
};

}  // namespace negev
