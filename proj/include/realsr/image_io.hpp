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

#ifndef REALSR_IMAGE_IO_HPP_
#define REALSR_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "realsr/image.hpp"

namespace realsr {

// [0,1] -> [0,255], rounding half away from zero, clamped.
uint8_t to_byte(float v);

std::vector<uint8_t> to_rgb8(const Image& img);
Image from_rgb8(int height, int width, std::span<const uint8_t> rgb);

// 8-bit RGB PNG. Gray/alpha inputs are converted to RGB on decode.
std::vector<uint8_t> encode_png(const Image& img);
Image decode_png(std::span<const uint8_t> bytes);

Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);

std::vector<uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const uint8_t> bytes);

// Writes only if the on-disk bytes differ. Returns true when a write happened.
bool write_file_if_changed(const std::filesystem::path& path, std::span<const uint8_t> bytes);

// Sorted list of *.png files directly inside `dir`.
std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir);

}  // namespace realsr

#endif  // REALSR_IMAGE_IO_HPP_
