#pragma once

#include <cmath>

namespace sketchcue {

template <class T>
Image<T> warp_image(const Image<T>& src, const Homography& h, int out_w, int out_h) {
  if (src.empty()) throw Error(Errc::EmptyInput, "warp_image: empty source raster");
  Image<T> out(out_w, out_h);
  const auto m = h.inverse().m();
  for (int v = 0; v < out_h; ++v) {
    // Row-incremental evaluation of the inverse map.
    double xs = m[1] * v + m[2];
    double ys = m[4] * v + m[5];
    double ws = m[7] * v + m[8];
    for (int u = 0; u < out_w; ++u, xs += m[0], ys += m[3], ws += m[6]) {
      if (std::abs(ws) < 1e-12) continue;
      const double sx = std::nearbyint(xs / ws);
      const double sy = std::nearbyint(ys / ws);
      if (sx < 0 || sy < 0 || sx >= src.width() || sy >= src.height()) continue;
      out.at(u, v) = src.at(static_cast<int>(sx), static_cast<int>(sy));
    }
  }
  return out;
}

}  // namespace sketchcue
