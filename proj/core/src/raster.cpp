#include "sketchcue/raster.hpp"

#include <algorithm>

namespace sketchcue {

std::size_t popcount(const Mask& m) {
  return static_cast<std::size_t>(
      std::count_if(m.data().begin(), m.data().end(), [](std::uint8_t v) { return v != 0; }));
}

}  // namespace sketchcue
