// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "mvugpca/dataio.hpp"
#include "mvugpca/error.hpp"

namespace mvugpca::dataio {

namespace {

// Netpbm header tokens are whitespace separated; '#' starts a comment that
// runs to end of line.
class PnmReader {
 public:
  PnmReader(const std::string& bytes, const std::string& name) : bytes_(bytes), name_(name) {}

  long next_int() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) fail(ErrorKind::Input, "decode failure: malformed PGM header in " + name_);
    return std::stol(bytes_.substr(start, pos_ - start));
  }

  std::string magic() {
    if (bytes_.size() < 2) fail(ErrorKind::Input, "decode failure: truncated file " + name_);
    pos_ = 2;
    return bytes_.substr(0, 2);
  }

  // After maxval exactly one whitespace byte precedes the raster.
  std::size_t raster_offset() const { return pos_ + 1; }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

Image read_pgm(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  PnmReader rd(bytes, path.string());
  const std::string magic = rd.magic();
  if (magic == "P3" || magic == "P6")
    fail(ErrorKind::Input, "decode failure: " + path.string() + " is a color image (grayscale required)");
  if (magic != "P2" && magic != "P5") fail(ErrorKind::Input, "decode failure: " + path.string() + " is not PGM");
  const long width = rd.next_int();
  const long height = rd.next_int();
  const long maxval = rd.next_int();
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
    fail(ErrorKind::Input, "decode failure: bad PGM header in " + path.string());

  Image img(height, width);
  if (magic == "P2") {
    for (long r = 0; r < height; ++r)
      for (long c = 0; c < width; ++c) img(r, c) = static_cast<double>(rd.next_int());
  } else {
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    const std::size_t off = rd.raster_offset();
    if (bytes.size() < off + bpp * static_cast<std::size_t>(width * height))
      fail(ErrorKind::Input, "decode failure: truncated raster in " + path.string());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + off);
    for (long r = 0; r < height; ++r)
      for (long c = 0; c < width; ++c) {
        const std::size_t k = static_cast<std::size_t>(r * width + c) * bpp;
        img(r, c) = bpp == 2 ? static_cast<double>((p[k] << 8) | p[k + 1]) : static_cast<double>(p[k]);
      }
  }
  return img;
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};

Image read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail(ErrorKind::Input, "cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::Input, "decode failure: libpng initialisation");
  }
  Image img;
  std::string err;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::Input, "decode failure: " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    err = "decode failure: " + path.string() + " is not single-channel grayscale";
  } else {
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (depth == 16) png_set_swap(png);  // host order on little-endian
    png_read_update_info(png, info);
    const auto width = png_get_image_width(png, info);
    const auto height = png_get_image_height(png, info);
    const auto rowbytes = png_get_rowbytes(png, info);
    std::vector<unsigned char> raster(rowbytes * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = raster.data() + r * rowbytes;
    png_read_image(png, rows.data());
    img.resize(height, width);
    for (png_uint_32 r = 0; r < height; ++r)
      for (png_uint_32 c = 0; c < width; ++c) {
        if (depth == 16) {
          std::uint16_t v;
          std::memcpy(&v, rows[r] + 2 * c, 2);
          img(r, c) = v;
        } else {
          img(r, c) = rows[r][c];
        }
      }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!err.empty()) fail(ErrorKind::Input, err);
  return img;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) fail(ErrorKind::Input, "cannot open " + path.string());
  std::string head;
  {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) fail(ErrorKind::Input, "cannot open " + path.string());
    char buf[8] = {};
    const auto n = std::fread(buf, 1, sizeof buf, f);
    std::fclose(f);
    head.assign(buf, n);
  }
  if (head.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(head.data()), 0, 8) == 0)
    return read_png(path);
  if (head.size() >= 2 && head[0] == 'P') return read_pgm(path);
  fail(ErrorKind::Input, "decode failure: unrecognised image format " + path.string());
}

void write_pgm(const Image& image, const std::filesystem::path& path, bool binary) {
  const double maxv = image.size() ? image.maxCoeff() : 0.0;
  if (image.size() && image.minCoeff() < 0.0) fail(ErrorKind::Input, "PGM pixels must be nonnegative");
  const long maxval = maxv > 255.0 ? 65535 : 255;
  std::string out = (binary ? "P5\n" : "P2\n") + std::to_string(image.cols()) + " " + std::to_string(image.rows()) +
                    "\n" + std::to_string(maxval) + "\n";
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const auto v = static_cast<long>(std::lround(std::min(image(r, c), static_cast<double>(maxval))));
      if (binary) {
        if (maxval > 255) out += static_cast<char>((v >> 8) & 0xff);
        out += static_cast<char>(v & 0xff);
      } else {
        out += std::to_string(v);
        out += c + 1 == image.cols() ? '\n' : ' ';
      }
    }
  }
  write_text(path, out);
}

}  // namespace mvugpca::dataio
