// Copyright 2026 The segbn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "segbn/raster_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace segbn {
namespace {

struct MemoryReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* r = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (r->pos + n > r->size) {
    png_error(png, "unexpected end of PNG stream");
  }
  std::memcpy(out, r->data + r->pos, n);
  r->pos += n;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t n) {
  auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  v->insert(v->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

GrayImage decode_png_gray(const std::vector<std::uint8_t>& bytes, const std::string& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorKind::kIo, "libpng initialization failed for " + path);
  }

  MemoryReader reader{bytes.data(), bytes.size(), 0};
  std::vector<png_bytep> row_ptrs;
  GrayImage img;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorKind::kFormat, "corrupt PNG file: " + path);
  }

  png_set_read_fn(png, &reader, png_read_from_memory);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16) png_set_strip_16(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorKind::kFormat, "unsupported PNG channel layout in " + path);
  }

  std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h * channels);
  row_ptrs.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) {
    row_ptrs[y] = raw.data() + static_cast<std::size_t>(y) * w * channels;
  }
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.data.resize(static_cast<std::size_t>(w) * h);
  if (channels == 1) {
    img.data = std::move(raw);
  } else {
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      img.data[i] = luma709(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_png(int width, int height, int channels,
                                     const std::vector<std::uint8_t>& raw) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    raise(ErrorKind::kIo, "libpng initialization failed");
  }

  std::vector<std::uint8_t> out;
  std::vector<png_bytep> row_ptrs(height);
  for (int y = 0; y < height; ++y) {
    row_ptrs[y] = const_cast<png_bytep>(raw.data() + static_cast<std::size_t>(y) * width * channels);
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    raise(ErrorKind::kIo, "PNG encode failed");
  }

  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  // Fixed encoder settings keep output byte-identical across runs.
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_set_IHDR(png, info, width, height, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

bool has_png_signature(const std::vector<std::uint8_t>& bytes) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

// Skips PGM whitespace and '#' comment lines; returns the next integer token.
long pgm_next_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = static_cast<char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
    raise(ErrorKind::kFormat, "malformed PGM header");
  }
  long value = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1'000'000'000L) raise(ErrorKind::kFormat, "PGM header value out of range");
    ++pos;
  }
  return value;
}

Rgb hsv_to_rgb(double hue_deg, double s, double v) {
  const double h = hue_deg / 60.0;
  const int i = static_cast<int>(std::floor(h)) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  double r = 0, g = 0, b = 0;
  switch (i) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
  auto to8 = [](double x) { return static_cast<std::uint8_t>(std::floor(x * 255.0 + 0.5)); };
  return Rgb{to8(r), to8(g), to8(b)};
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kConfiguration: return "configuration";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kSpec: return "spec";
  }
  return "unknown";
}

std::uint8_t luma709(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double y = 0.2126 * r + 0.7152 * g + 0.0722 * b;
  return static_cast<std::uint8_t>(std::floor(y + 0.5));
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::kIo, "cannot open file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) raise(ErrorKind::kIo, "read error on file: " + path);
  return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::kIo, "cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrorKind::kIo, "write error on file: " + path);
}

GrayImage load_gray(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  if (has_png_signature(bytes)) return decode_png_gray(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P') {
    raise(ErrorKind::kFormat, "only binary (P5) PGM is supported: " + path);
  }
  raise(ErrorKind::kFormat, "unsupported image format (expected PNG or P5 PGM): " + path);
}

GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    raise(ErrorKind::kFormat, "not a binary PGM stream");
  }
  std::size_t pos = 2;
  const long w = pgm_next_int(bytes, pos);
  const long h = pgm_next_int(bytes, pos);
  const long maxval = pgm_next_int(bytes, pos);
  if (w <= 0 || h <= 0) raise(ErrorKind::kFormat, "PGM with non-positive dimensions");
  if (maxval <= 0 || maxval > 255) {
    raise(ErrorKind::kFormat, "PGM maxval must be in 1..255");
  }
  ++pos;  // single whitespace byte after maxval
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (pos + need > bytes.size()) raise(ErrorKind::kFormat, "PGM pixel data truncated");
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  std::copy(bytes.begin() + pos, bytes.begin() + pos + need, img.data.begin());
  return img;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  std::ostringstream header;
  header << "P5\n" << img.width << " " << img.height << "\n255\n";
  const std::string head = header.str();
  std::vector<std::uint8_t> out(head.begin(), head.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

void save_pgm(const GrayImage& img, const std::string& path) {
  write_file(path, encode_pgm(img));
}

Palette default_palette(int k) {
  if (k < 1 || k > 16) {
    raise(ErrorKind::kConfiguration,
          "default palette covers 1..16 classes; supply an explicit palette");
  }
  Palette p;
  for (int c = 1; c <= k; ++c) {
    p[c] = hsv_to_rgb(360.0 * (c - 1) / k, 0.85, 0.95);
  }
  return p;
}

std::vector<std::uint8_t> render_labels(const LabelImage& labels, const Palette& palette) {
  std::set<int> present(labels.labels.begin(), labels.labels.end());
  for (int c : present) {
    if (!palette.count(c)) {
      raise(ErrorKind::kConfiguration, "palette has no color for label " + std::to_string(c));
    }
  }
  std::vector<std::uint8_t> raw(labels.labels.size() * 3);
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const Rgb c = palette.at(labels.labels[i]);
    raw[3 * i] = c.r;
    raw[3 * i + 1] = c.g;
    raw[3 * i + 2] = c.b;
  }
  return encode_png(labels.width, labels.height, 3, raw);
}

std::vector<std::uint8_t> render_boundary_overlay(const GrayImage& img,
                                                  const std::vector<int>& assignment) {
  if (assignment.size() != img.pixel_count()) {
    raise(ErrorKind::kParameter, "assignment size does not match image");
  }
  std::vector<std::uint8_t> raw(img.pixel_count() * 3);
  auto id = [&](int x, int y) { return assignment[static_cast<std::size_t>(y) * img.width + x]; };
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
      const bool edge = (x + 1 < img.width && id(x + 1, y) != id(x, y)) ||
                        (y + 1 < img.height && id(x, y + 1) != id(x, y)) ||
                        (x > 0 && id(x - 1, y) != id(x, y)) ||
                        (y > 0 && id(x, y - 1) != id(x, y));
      if (edge) {
        raw[3 * i] = 255;
        raw[3 * i + 1] = 0;
        raw[3 * i + 2] = 0;
      } else {
        raw[3 * i] = raw[3 * i + 1] = raw[3 * i + 2] = img.data[i];
      }
    }
  }
  return encode_png(img.width, img.height, 3, raw);
}

std::vector<std::uint8_t> encode_id_pgm16(int width, int height,
                                          const std::vector<int>& assignment) {
  if (assignment.size() != static_cast<std::size_t>(width) * height) {
    raise(ErrorKind::kParameter, "assignment size does not match dimensions");
  }
  std::ostringstream header;
  header << "P5\n" << width << " " << height << "\n65535\n";
  const std::string head = header.str();
  std::vector<std::uint8_t> out(head.begin(), head.end());
  out.reserve(out.size() + assignment.size() * 2);
  for (int v : assignment) {
    if (v < 0 || v > 65535) raise(ErrorKind::kParameter, "superpixel id exceeds 16-bit range");
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
  }
  return out;
}

}  // namespace segbn
