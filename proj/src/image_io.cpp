// Copyright 2026 The realsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "realsr/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "realsr/common.hpp"

namespace realsr {

namespace fs = std::filesystem;

uint8_t to_byte(float v) {
  const double scaled = std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0;
  return static_cast<uint8_t>(std::lround(scaled));
}

std::vector<uint8_t> to_rgb8(const Image& img) {
  std::vector<uint8_t> out(img.size());
  const auto s = img.samples();
  std::transform(s.begin(), s.end(), out.begin(), to_byte);
  return out;
}

Image from_rgb8(int height, int width, std::span<const uint8_t> rgb) {
  std::vector<float> samples(rgb.size());
  std::transform(rgb.begin(), rgb.end(), samples.begin(),
                 [](uint8_t b) { return static_cast<float>(b) / 255.0f; });
  return Image(height, width, std::move(samples));
}

std::vector<uint8_t> encode_png(const Image& img) {
  png_image meta;
  std::memset(&meta, 0, sizeof(meta));
  meta.version = PNG_IMAGE_VERSION;
  meta.width = static_cast<png_uint_32>(img.width());
  meta.height = static_cast<png_uint_32>(img.height());
  meta.format = PNG_FORMAT_RGB;
  const std::vector<uint8_t> rgb = to_rgb8(img);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&meta, nullptr, &size, 0, rgb.data(), 0, nullptr)) {
    throw IoError(std::string("png encode failed: ") + meta.message);
  }
  std::vector<uint8_t> out(size);
  if (!png_image_write_to_memory(&meta, out.data(), &size, 0, rgb.data(), 0, nullptr)) {
    throw IoError(std::string("png encode failed: ") + meta.message);
  }
  out.resize(size);
  return out;
}

Image decode_png(std::span<const uint8_t> bytes) {
  png_image meta;
  std::memset(&meta, 0, sizeof(meta));
  meta.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&meta, bytes.data(), bytes.size())) {
    throw IoError(std::string("png decode failed: ") + meta.message);
  }
  meta.format = PNG_FORMAT_RGB;
  std::vector<uint8_t> rgb(PNG_IMAGE_SIZE(meta));
  if (!png_image_finish_read(&meta, nullptr, rgb.data(), 0, nullptr)) {
    png_image_free(&meta);
    throw IoError(std::string("png decode failed: ") + meta.message);
  }
  return from_rgb8(static_cast<int>(meta.height), static_cast<int>(meta.width), rgb);
}

std::vector<uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, std::span<const uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

bool write_file_if_changed(const fs::path& path, std::span<const uint8_t> bytes) {
  std::error_code ec;
  if (fs::is_regular_file(path, ec) && fs::file_size(path, ec) == bytes.size()) {
    const auto existing = read_file(path);
    if (std::equal(existing.begin(), existing.end(), bytes.begin(), bytes.end())) return false;
  }
  write_file(path, bytes);
  return true;
}

Image read_png(const fs::path& path) {
  try {
    return decode_png(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_png(const fs::path& path, const Image& img) { write_file(path, encode_png(img)); }

std::vector<fs::path> list_png_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace realsr
