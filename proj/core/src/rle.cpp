#include <nlohmann/json.hpp>

#include "sketchcue/codec.hpp"

namespace sketchcue {

std::vector<std::uint32_t> rle_encode(const Mask& m) {
  std::vector<std::uint32_t> runs;
  std::uint8_t current = 0;
  std::uint32_t length = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::uint8_t bit = m[i] != 0 ? 1 : 0;
    if (bit != current) {
      runs.push_back(length);
      current = bit;
      length = 0;
    }
    ++length;
  }
  runs.push_back(length);
  return runs;
}

Mask rle_decode(int width, int height, const std::vector<std::uint32_t>& runs) {
  Mask m(width, height, 0);
  std::size_t pos = 0;
  std::uint8_t bit = 0;
  for (std::uint32_t r : runs) {
    if (pos + r > m.size()) throw Error(Errc::MalformedInput, "mask runs exceed mask size");
    if (bit) std::fill_n(m.data().begin() + static_cast<std::ptrdiff_t>(pos), r, std::uint8_t{1});
    pos += r;
    bit ^= 1;
  }
  if (pos != m.size()) throw Error(Errc::MalformedInput, "mask runs do not cover the mask");
  return m;
}

nlohmann::json mask_to_json(const Mask& m) {
  return {{"w", m.width()}, {"h", m.height()}, {"runs", rle_encode(m)}};
}

Mask mask_from_json(const nlohmann::json& j) {
  try {
    return rle_decode(j.at("w").get<int>(), j.at("h").get<int>(),
                      j.at("runs").get<std::vector<std::uint32_t>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, std::string("mask: ") + e.what());
  }
}

}  // namespace sketchcue
