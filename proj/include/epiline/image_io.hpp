#pragma once

#include <array>
#include <string>
#include <vector>

#include "epiline/imaging.hpp"

namespace epiline {

/// Loads an 8-bit PNG (gray, gray+alpha, RGB or RGBA) or binary PGM (P5).
/// Color is reduced to luma with the ITU 601 weights.
GrayImage load_image(const std::string& path);

void save_png_gray(const std::string& path, const GrayImage& img);

/// Row-major RGB buffer, 3 bytes per pixel.
void save_png_rgb(const std::string& path, int width, int height,
                  const std::vector<unsigned char>& rgb);

void save_pgm(const std::string& path, const GrayImage& img);

}  // namespace epiline
