#include "epiline/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace epiline {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

float luma601(double r, double g, double b) {
  return float(0.299 * r + 0.587 * g + 0.114 * b);
}

GrayImage load_png(const std::string& path, std::FILE* f) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw ParseError(path + ": libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw ParseError(path + ": libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(path + ": PNG decode error");
  }
  png_init_io(png, f);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);

  int channels = png_get_channels(png, info);
  std::vector<unsigned char> row(size_t(w) * channels);
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) {
      const unsigned char* px = &row[size_t(x) * channels];
      float v;
      switch (channels) {
        case 1: v = px[0]; break;
        case 2: v = px[0]; break;  // gray + alpha: alpha ignored
        case 3: v = luma601(px[0], px[1], px[2]); break;
        default: v = luma601(px[0], px[1], px[2]); break;  // RGBA
      }
      img.set(int(x), int(y), v);
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

GrayImage load_pgm(const std::string& path, std::FILE* f) {
  std::fseek(f, 0, SEEK_SET);
  auto next_token = [&]() -> long {
    int c;
    // skip whitespace and '#' comments
    for (;;) {
      c = std::fgetc(f);
      if (c == '#') {
        while (c != EOF && c != '\n') c = std::fgetc(f);
      } else if (c == EOF || !std::isspace(c)) {
        break;
      }
    }
    if (c == EOF || !std::isdigit(c))
      throw ParseError(path + ": malformed PGM header");
    long v = 0;
    while (c != EOF && std::isdigit(c)) {
      v = v * 10 + (c - '0');
      c = std::fgetc(f);
    }
    return v;
  };

  char magic[3] = {0, 0, 0};
  if (std::fread(magic, 1, 2, f) != 2 || magic[0] != 'P' || magic[1] != '5')
    throw ParseError(path + ": not a binary PGM (P5)");
  long w = next_token();
  long h = next_token();
  long maxval = next_token();
  if (w < 1 || h < 1 || maxval < 1 || maxval > 255)
    throw ParseError(path + ": unsupported PGM geometry or maxval");

  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  std::vector<unsigned char> row(static_cast<size_t>(w));
  for (long y = 0; y < h; ++y) {
    if (std::fread(row.data(), 1, size_t(w), f) != size_t(w))
      throw ParseError(path + ": truncated PGM data");
    for (long x = 0; x < w; ++x) img.set(int(x), int(y), row[size_t(x)]);
  }
  return img;
}

}  // namespace

GrayImage load_image(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw MissingFile("cannot open " + path);
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8)
    throw ParseError(path + ": file too short");
  std::fseek(f.get(), 0, SEEK_SET);
  if (!png_sig_cmp(sig, 0, 8)) return load_png(path, f.get());
  if (sig[0] == 'P' && sig[1] == '5') return load_pgm(path, f.get());
  throw ParseError(path + ": unsupported image format (need PNG or P5 PGM)");
}

void save_png_gray(const std::string& path, const GrayImage& img) {
  std::vector<unsigned char> rgb;
  rgb.reserve(size_t(img.width()) * img.height() * 3);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      auto v = (unsigned char)std::lround(
          std::clamp(double(img.at(x, y)), 0.0, 255.0));
      rgb.push_back(v);
      rgb.push_back(v);
      rgb.push_back(v);
    }
  save_png_rgb(path, img.width(), img.height(), rgb);
}

void save_png_rgb(const std::string& path, int width, int height,
                  const std::vector<unsigned char>& rgb) {
  if (rgb.size() != size_t(width) * height * 3)
    throw DomainError("save_png_rgb: buffer size mismatch");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw MissingFile("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) throw ParseError(path + ": libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw ParseError(path + ": libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ParseError(path + ": PNG encode error");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<unsigned char*>(
                           &rgb[size_t(y) * width * 3]));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw MissingFile("cannot write " + path);
  f << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      f.put(char((unsigned char)std::lround(
          std::clamp(double(img.at(x, y)), 0.0, 255.0))));
  if (!f) throw ParseError("short write to " + path);
}

}  // namespace epiline
