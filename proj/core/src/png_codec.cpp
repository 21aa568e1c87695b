#include <png.h>

#include <csetjmp>
#include <cstring>
#include <memory>

#include "sketchcue/codec.hpp"

namespace sketchcue {

namespace {

struct ReadCursor {
  const std::vector<std::uint8_t>* bytes = nullptr;
  std::size_t pos = 0;
};

void write_to_vector(png_structp p, png_bytep data, png_size_t len) {
  auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
  v->insert(v->end(), data, data + len);
}

void read_from_cursor(png_structp p, png_bytep data, png_size_t len) {
  auto* c = static_cast<ReadCursor*>(png_get_io_ptr(p));
  if (c->pos + len > c->bytes->size()) png_error(p, "truncated stream");
  std::memcpy(data, c->bytes->data() + c->pos, len);
  c->pos += len;
}

}  // namespace

namespace {

// The setjmp frames below hold only trivially destructible locals; the C++
// objects they fill live in the caller.
bool write_png(std::vector<std::uint8_t>* out, const RgbaImage* img, int level) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, write_to_vector, nullptr);
  png_set_compression_level(png, level);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img->width()), static_cast<png_uint_32>(img->height()), 8,
               PNG_COLOR_TYPE_RGBA, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img->height(); ++y) png_write_row(png, reinterpret_cast<png_const_bytep>(&img->at(0, y)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

bool read_png(ReadCursor* cursor, RgbaImage* img) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, cursor, read_from_cursor);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_gray_to_rgb(png);
  png_set_add_alpha(png, 0xff, PNG_FILLER_AFTER);
  png_read_update_info(png, info);
  const auto w = png_get_image_width(png, info), h = png_get_image_height(png, info);
  if (w == 0 || h == 0 || w > 16384 || h > 16384) png_error(png, "unsupported dimensions");
  *img = RgbaImage(static_cast<int>(w), static_cast<int>(h));
  for (int y = 0; y < img->height(); ++y) png_read_row(png, reinterpret_cast<png_bytep>(&img->at(0, y)), nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RgbaImage& img, int compression_level) {
  static_assert(sizeof(Rgba) == 4);
  std::vector<std::uint8_t> out;
  if (img.empty() || !write_png(&out, &img, compression_level)) throw Error(Errc::MalformedInput, "png: encoding failed");
  return out;
}

RgbaImage decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw Error(Errc::MalformedInput, "png: bad signature");
  ReadCursor cursor{&bytes, 0};
  RgbaImage img;
  if (!read_png(&cursor, &img)) throw Error(Errc::MalformedInput, "png: decoding failed");
  return img;
}

}  // namespace sketchcue
