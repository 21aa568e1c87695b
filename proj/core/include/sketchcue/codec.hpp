#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sketchcue/raster.hpp"

namespace sketchcue {

std::string base64_encode(const std::uint8_t* data, std::size_t size);
inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  return base64_encode(bytes.data(), bytes.size());
}
// Throws MalformedInput on invalid characters or padding.
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Row-major run lengths of a binary mask, alternating clear/set and starting
// with a (possibly empty) clear run. JSON form: {"w":..,"h":..,"runs":[..]}.
std::vector<std::uint32_t> rle_encode(const Mask& m);
Mask rle_decode(int width, int height, const std::vector<std::uint32_t>& runs);
nlohmann::json mask_to_json(const Mask& m);
Mask mask_from_json(const nlohmann::json& j);

std::vector<std::uint8_t> encode_png(const RgbaImage& img, int compression_level = 1);
RgbaImage decode_png(const std::vector<std::uint8_t>& bytes);

}  // namespace sketchcue
