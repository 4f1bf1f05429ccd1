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

#include "realsr/degrade.hpp"

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

// clang-format off
#include <jpeglib.h>
#include <jerror.h>
// clang-format on

#include "realsr/common.hpp"
#include "realsr/image_io.hpp"
#include "realsr/random.hpp"

namespace realsr {
namespace {

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

std::vector<uint8_t> jpeg_encode(const std::vector<uint8_t>& rgb, int height, int width,
                                 int quality) {
  jpeg_compress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw IoError(std::string("jpeg encode failed: ") + jerr.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(width);
  cinfo.image_height = static_cast<JDIMENSION>(height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  cinfo.dct_method = JDCT_ISLOW;
  cinfo.optimize_coding = FALSE;
  // 4:2:0
  cinfo.comp_info[0].h_samp_factor = 2;
  cinfo.comp_info[0].v_samp_factor = 2;
  cinfo.comp_info[1].h_samp_factor = 1;
  cinfo.comp_info[1].v_samp_factor = 1;
  cinfo.comp_info[2].h_samp_factor = 1;
  cinfo.comp_info[2].v_samp_factor = 1;
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(&rgb[static_cast<size_t>(cinfo.next_scanline) * width * 3]);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<uint8_t> out(buffer, buffer + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buffer);
  return out;
}

std::vector<uint8_t> jpeg_decode(const std::vector<uint8_t>& bytes, int height, int width) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  std::vector<uint8_t> rgb(static_cast<size_t>(height) * width * 3);
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw IoError(std::string("jpeg decode failed: ") + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  cinfo.dct_method = JDCT_ISLOW;
  cinfo.do_fancy_upsampling = TRUE;
  jpeg_start_decompress(&cinfo);
  if (static_cast<int>(cinfo.output_height) != height ||
      static_cast<int>(cinfo.output_width) != width || cinfo.output_components != 3) {
    jpeg_destroy_decompress(&cinfo);
    throw IoError("jpeg decode produced unexpected geometry");
  }
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = &rgb[static_cast<size_t>(cinfo.output_scanline) * width * 3];
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return rgb;
}

void require_divisible(const Image& img, int scale) {
  if (scale < 1) throw ValidationError("scale must be >= 1");
  if (img.height() % scale != 0 || img.width() % scale != 0) {
    throw ValidationError("image " + std::to_string(img.height()) + "x" +
                          std::to_string(img.width()) + " is not divisible by scale " +
                          std::to_string(scale));
  }
}

}  // namespace

void DegradationRecipe::validate() const {
  if (kind == Kind::kSensorNoise && !(sigma_8bit >= 0.0)) {
    throw ValidationError("sensor noise sigma must be >= 0");
  }
  if (kind == Kind::kJpeg && (quality < 1 || quality > 100)) {
    throw ValidationError("jpeg quality must be within [1, 100]");
  }
}

std::string DegradationRecipe::kind_name() const {
  return kind == Kind::kSensorNoise ? "sensor_noise" : "jpeg";
}

std::string DegradationRecipe::short_name() const {
  return kind == Kind::kSensorNoise ? "noise" : "jpeg";
}

std::string DegradationRecipe::params() const {
  if (kind == Kind::kJpeg) return "quality=" + std::to_string(quality);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "sigma_8bit=%.17g", sigma_8bit);
  return buf;
}

Image apply_sensor_noise(const Image& img, double sigma_8bit, uint64_t seed) {
  if (!(sigma_8bit >= 0.0)) throw ValidationError("sensor noise sigma must be >= 0");
  if (sigma_8bit == 0.0) return img;
  const double sigma = sigma_8bit / 255.0;
  Rng rng(seed);
  std::vector<float> out(img.samples().begin(), img.samples().end());
  for (float& v : out) v = static_cast<float>(std::clamp(v + sigma * rng.normal(), 0.0, 1.0));
  return Image(img.height(), img.width(), std::move(out));
}

Image apply_jpeg(const Image& img, int quality) {
  if (quality < 1 || quality > 100) throw ValidationError("jpeg quality must be within [1, 100]");
  const auto rgb = to_rgb8(img);
  const auto encoded = jpeg_encode(rgb, img.height(), img.width(), quality);
  const auto decoded = jpeg_decode(encoded, img.height(), img.width());
  return from_rgb8(img.height(), img.width(), decoded);
}

std::string jpeg_codec_id() {
#ifdef LIBJPEG_TURBO_VERSION
  return "libjpeg-turbo api" + std::to_string(JPEG_LIB_VERSION) + " islow 4:2:0 baseline";
#else
  return "libjpeg api" + std::to_string(JPEG_LIB_VERSION) + " islow 4:2:0 baseline";
#endif
}

Image apply_degradation(const Image& img, const DegradationRecipe& recipe) {
  recipe.validate();
  if (recipe.kind == DegradationRecipe::Kind::kJpeg) return apply_jpeg(img, recipe.quality);
  return apply_sensor_noise(img, recipe.sigma_8bit, recipe.seed);
}

Image make_train_input(const Image& original, int scale, const DegradationRecipe& recipe) {
  require_divisible(original, scale);
  return apply_degradation(downsample(original, scale), recipe);
}

Image make_train_output(const Image& original, int scale) {
  require_divisible(original, scale);
  return downsample(original, scale);
}

EvalPair make_dsr_eval_pair(const Image& original, int scale, const DegradationRecipe& recipe) {
  require_divisible(original, scale);
  recipe.validate();
  const auto in_recipe = recipe.with_seed(derive_seed(recipe.seed, "pair", "eval_input"));
  const auto gt_recipe = recipe.with_seed(derive_seed(recipe.seed, "pair", "eval_gt"));
  return {apply_degradation(downsample(original, scale), in_recipe),
          apply_degradation(original, gt_recipe)};
}

EvalPair make_csr_eval_pair(const Image& original, int scale, const DegradationRecipe& recipe) {
  require_divisible(original, scale);
  recipe.validate();
  const auto in_recipe = recipe.with_seed(derive_seed(recipe.seed, "pair", "eval_input"));
  return {apply_degradation(downsample(original, scale), in_recipe), original};
}

CenterCrop center_crop_for(int height, int width, int scale) {
  CenterCrop c;
  c.height = height - height % scale;
  c.width = width - width % scale;
  if (c.height < scale || c.width < scale) {
    throw ValidationError("image " + std::to_string(height) + "x" + std::to_string(width) +
                          " is smaller than scale " + std::to_string(scale));
  }
  c.y0 = (height - c.height) / 2;
  c.x0 = (width - c.width) / 2;
  return c;
}

std::string to_string(Scenario s) { return s == Scenario::kDSR ? "DSR" : "CSR"; }

Scenario parse_scenario(const std::string& s) {
  if (s == "DSR" || s == "dsr") return Scenario::kDSR;
  if (s == "CSR" || s == "csr") return Scenario::kCSR;
  throw ValidationError("unknown scenario '" + s + "' (expected dsr or csr)");
}

}  // namespace realsr
