#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "inpaintopt/grid.hpp"

namespace inpaintopt {

// Netpbm greymaps (P2 ASCII / P5 binary, maxval <= 255). Decoded values are
// rescaled to [0,255]; encoding rounds to nearest and clamps.
Image decode_pgm(std::string_view bytes);
std::string encode_pgm(const Image& img, bool ascii = false);
Image read_pgm(const std::filesystem::path& path);
void write_pgm(const Image& img, const std::filesystem::path& path, bool ascii = false);

// Masks as P4 bitmaps (P1 is accepted on input). A set bit (black) marks a
// stored pixel.
Mask decode_pbm(std::string_view bytes);
std::string encode_pbm(const Mask& mask);
Mask read_pbm(const std::filesystem::path& path);
void write_pbm(const Mask& mask, const std::filesystem::path& path);

// Tonal data as "index,value" lines (17 significant digits), one per mask
// pixel in ascending index order.
std::string encode_tonal_csv(const Image& values, const Mask& mask);
Image decode_tonal_csv(std::string_view text, int width, int height);
void write_tonal_csv(const Image& values, const Mask& mask, const std::filesystem::path& path);
Image read_tonal_csv(const std::filesystem::path& path, int width, int height);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace inpaintopt
