#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "garment/raster.hpp"

namespace garment {

class ImageDecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Bytes = std::vector<std::uint8_t>;

/// Fixed-point scale for 16-bit shading PNGs: 4096 encodes a shading value of 1.0.
inline constexpr double kShadingScale = 4096.0;

std::uint8_t to_u8(double v);

/// Decodes PNG (any color type) or JPEG into RGB; alpha is dropped.
RasterImage decode_image(std::span<const std::uint8_t> bytes);
/// Decodes a PNG/JPEG and averages channels into [0,1].
GrayImage decode_gray(std::span<const std::uint8_t> bytes);
/// Decodes a 16-bit grayscale shading PNG (value / 4096).
GrayImage decode_shading(std::span<const std::uint8_t> bytes);

Bytes encode_png(const RasterImage& img);
/// 8-bit grayscale; values are clamped to [0,1] and scaled by 255.
Bytes encode_png_gray(const GrayImage& img);
/// 8-bit grayscale mask: 255 for on pixels, 0 otherwise.
Bytes encode_png_mask(const GrayImage& mask);
/// 16-bit grayscale shading with value * 4096, clamped to [0, 65535].
Bytes encode_png_shading(const GrayImage& shading);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

RasterImage load_image(const std::filesystem::path& path);
GrayImage load_mask(const std::filesystem::path& path);

}  // namespace garment
