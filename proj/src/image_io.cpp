#include "garment/image_io.hpp"

#include <png.h>

// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

namespace garment {

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

namespace {

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_read_from_cursor(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

void png_error_throw(png_structp png, png_const_charp msg) {
  auto* message = static_cast<std::string*>(png_get_error_ptr(png));
  if (message) *message = msg;
  png_longjmp(png, 1);
}

void png_warning_ignore(png_structp, png_const_charp) {}

/// Raw decoded PNG samples: either 8- or 16-bit, 1 (gray) or 3 (RGB) channels.
struct PngSamples {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> values;
};

PngSamples decode_png_samples(std::span<const std::uint8_t> bytes, bool keep_16bit) {
  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_throw, png_warning_ignore);
  if (!png) throw ImageDecodeError("png: cannot allocate read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw ImageDecodeError("png: cannot allocate info struct");
  }
  ReadCursor cursor{bytes, 0};
  PngSamples out;
  std::vector<png_byte> row;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageDecodeError("png: " + message);
  }

  png_set_read_fn(png, &cursor, png_read_from_cursor);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (depth == 16 && !keep_16bit) png_set_strip_16(png);
  if (depth == 16 && keep_16bit) png_set_swap(png);  // host little-endian samples
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  row.resize(rowbytes);
  out.values.resize(static_cast<std::size_t>(out.width) * out.height * out.channels);
  for (int y = 0; y < out.height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int i = 0; i < out.width * out.channels; ++i) {
      std::uint16_t v;
      if (out.bit_depth == 16) {
        std::memcpy(&v, row.data() + 2 * i, 2);
      } else {
        v = row[static_cast<std::size_t>(i)];
      }
      out.values[static_cast<std::size_t>(y) * out.width * out.channels + i] = v;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

RasterImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  std::vector<std::uint8_t> pixels;
  int width = 0;
  int height = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw ImageDecodeError(std::string("jpeg: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  pixels.resize(static_cast<std::size_t>(width) * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW rowptr = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &rowptr, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);

  RasterImage img(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(x, y, c) = pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c] / 255.0;
  return img;
}

Bytes encode_png_raw(int width, int height, int channels, int bit_depth, const std::vector<std::uint8_t>& rows) {
  std::string message;
  Bytes out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_throw, png_warning_ignore);
  if (!png) throw std::runtime_error("png: cannot allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png: cannot allocate info struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png: " + message);
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, rows.data() + static_cast<std::size_t>(y) * stride);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
  if (is_jpeg(bytes)) return decode_jpeg(bytes);
  if (!is_png(bytes)) throw ImageDecodeError("unrecognized image format (expected PNG or JPEG)");
  const PngSamples s = decode_png_samples(bytes, false);
  RasterImage img(s.width, s.height);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      for (int c = 0; c < 3; ++c) {
        const int src_c = s.channels == 3 ? c : 0;
        img.at(x, y, c) = s.values[(static_cast<std::size_t>(y) * s.width + x) * s.channels + src_c] / 255.0;
      }
  return img;
}

GrayImage decode_gray(std::span<const std::uint8_t> bytes) {
  const RasterImage rgb = decode_image(bytes);
  GrayImage out(rgb.width(), rgb.height());
  for (int y = 0; y < rgb.height(); ++y)
    for (int x = 0; x < rgb.width(); ++x)
      out.at(x, y) = (rgb.at(x, y, 0) + rgb.at(x, y, 1) + rgb.at(x, y, 2)) / 3.0;
  return out;
}

GrayImage decode_shading(std::span<const std::uint8_t> bytes) {
  if (!is_png(bytes)) throw ImageDecodeError("shading image must be a PNG");
  const PngSamples s = decode_png_samples(bytes, true);
  if (s.channels != 1 || s.bit_depth != 16) throw ImageDecodeError("shading PNG must be 16-bit grayscale");
  GrayImage out(s.width, s.height);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      out.at(x, y) = s.values[static_cast<std::size_t>(y) * s.width + x] / kShadingScale;
  return out;
}

Bytes encode_png(const RasterImage& img) {
  std::vector<std::uint8_t> rows(static_cast<std::size_t>(img.width()) * img.height() * 3);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c)
        rows[(static_cast<std::size_t>(y) * img.width() + x) * 3 + c] = to_u8(img.at(x, y, c));
  return encode_png_raw(img.width(), img.height(), 3, 8, rows);
}

Bytes encode_png_gray(const GrayImage& img) {
  std::vector<std::uint8_t> rows(img.size());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      rows[static_cast<std::size_t>(y) * img.width() + x] = to_u8(img.at(x, y));
  return encode_png_raw(img.width(), img.height(), 1, 8, rows);
}

Bytes encode_png_mask(const GrayImage& mask) {
  std::vector<std::uint8_t> rows(mask.size());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      rows[static_cast<std::size_t>(y) * mask.width() + x] = mask.on(x, y) ? 255 : 0;
  return encode_png_raw(mask.width(), mask.height(), 1, 8, rows);
}

Bytes encode_png_shading(const GrayImage& shading) {
  // PNG stores 16-bit samples big-endian.
  std::vector<std::uint8_t> rows(shading.size() * 2);
  for (int y = 0; y < shading.height(); ++y)
    for (int x = 0; x < shading.width(); ++x) {
      const double scaled = std::clamp(shading.at(x, y) * kShadingScale, 0.0, 65535.0);
      const auto v = static_cast<std::uint16_t>(std::lround(scaled));
      const std::size_t i = (static_cast<std::size_t>(y) * shading.width() + x) * 2;
      rows[i] = static_cast<std::uint8_t>(v >> 8);
      rows[i + 1] = static_cast<std::uint8_t>(v & 0xFF);
    }
  return encode_png_raw(shading.width(), shading.height(), 1, 16, rows);
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

RasterImage load_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

GrayImage load_mask(const std::filesystem::path& path) {
  GrayImage g = decode_gray(read_file(path));
  for (double& v : g.data()) v = v > 0.5 ? 1.0 : 0.0;
  return g;
}

}  // namespace garment
