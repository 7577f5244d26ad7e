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

#ifndef DEGRADEKIT_IMAGE_H_
#define DEGRADEKIT_IMAGE_H_

#include <cstddef>
#include <filesystem>
#include <vector>

namespace degradekit {

// H x W x 3 RGB image, interleaved row-major, values nominally in [0,1].
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;

  ImageBuffer() = default;
  ImageBuffer(int height, int width, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  double& at(int y, int x, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }
  double at(int y, int x, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const ImageBuffer& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

// Single-channel plane (luma, kernels, feature channels).
struct Plane {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(int h, int w, double fill = 0.0)
      : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

  double& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

// Reflect-101 index mapping (..., 2, 1, | 0, 1, ..., n-1, | n-2, ...).
int reflect101(int i, int n);

void clamp01(ImageBuffer& image);

ImageBuffer crop(const ImageBuffer& image, int top, int left, int height,
                 int width);

// Crops bottom/right so both sides are multiples of `scale`.
ImageBuffer modcrop(const ImageBuffer& image, int scale);

// 8-bit RGB PNG I/O. Reading converts with /255; writing with round(x*255)
// after clamping. Grey and RGBA inputs are converted to RGB.
ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageBuffer& image);

// Rounds to 8 bits and back, i.e. what a PNG round trip would produce.
ImageBuffer quantize8(const ImageBuffer& image);

}  // namespace degradekit

#endif  // DEGRADEKIT_IMAGE_H_
