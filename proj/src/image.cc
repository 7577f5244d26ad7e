// Copyright 2026 The degradekit Authors
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

#include "degradekit/image.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>

#include "degradekit/error.h"

namespace degradekit {

ImageBuffer::ImageBuffer(int height, int width, double fill)
    : height_(height), width_(width) {
  if (height < 1 || width < 1) {
    throw DataError("image dimensions must be positive, got " +
                    std::to_string(height) + "x" + std::to_string(width));
  }
  data_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
}

int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

void clamp01(ImageBuffer& image) {
  for (double& v : image.data()) v = std::clamp(v, 0.0, 1.0);
}

ImageBuffer crop(const ImageBuffer& image, int top, int left, int height,
                 int width) {
  if (top < 0 || left < 0 || top + height > image.height() ||
      left + width > image.width()) {
    throw DataError("crop window exceeds image bounds");
  }
  ImageBuffer out(height, width);
  for (int y = 0; y < height; ++y) {
    const double* src = &image.data()[((static_cast<std::size_t>(top + y)) *
                                           image.width() + left) *
                                      ImageBuffer::kChannels];
    std::copy(src, src + static_cast<std::size_t>(width) * ImageBuffer::kChannels,
              &out.at(y, 0, 0));
  }
  return out;
}

ImageBuffer modcrop(const ImageBuffer& image, int scale) {
  const int h = image.height() - image.height() % scale;
  const int w = image.width() - image.width() % scale;
  if (h == 0 || w == 0) {
    throw DataError("image smaller than scale factor " + std::to_string(scale));
  }
  if (h == image.height() && w == image.width()) return image;
  return crop(image, 0, 0, h, w);
}

ImageBuffer read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw DataError("cannot read PNG " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw DataError("cannot decode PNG " + path.string() + ": " + msg);
  }
  ImageBuffer out(static_cast<int>(img.height), static_cast<int>(img.width));
  auto& data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = pixels[i] / 255.0;
  return out;
}

void write_png(const std::filesystem::path& path, const ImageBuffer& image) {
  std::vector<std::uint8_t> pixels(image.size());
  const auto& data = image.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    pixels[i] = static_cast<std::uint8_t>(
        std::lround(std::clamp(data[i], 0.0, 1.0) * 255.0));
  }
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, pixels.data(), 0,
                               nullptr)) {
    throw DataError("cannot write PNG " + path.string() + ": " + img.message);
  }
}

ImageBuffer quantize8(const ImageBuffer& image) {
  ImageBuffer out = image;
  for (double& v : out.data()) {
    v = std::lround(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  }
  return out;
}

}  // namespace degradekit
