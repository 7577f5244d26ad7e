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

#ifndef DEGRADEKIT_CODEC_H_
#define DEGRADEKIT_CODEC_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "degradekit/image.h"

namespace degradekit {

// Baseline sequential JPEG encode + decode through libjpeg, 4:2:0 chroma,
// libjpeg quality scaling, integer DCT. Quality must be in [1, 100].
ImageBuffer compress_jpeg(const ImageBuffer& image, int quality);

// Single-frame planar YUV 4:2:0, 8-bit, BT.601 studio swing. Odd sides are
// padded by edge replication to even before chroma subsampling.
struct YuvFrame {
  int width = 0;   // padded, even
  int height = 0;  // padded, even
  std::vector<std::uint8_t> bytes;  // Y plane, then Cb, then Cr
};

YuvFrame rgb_to_yuv420(const ImageBuffer& image);
// Crops back to `height` x `width`.
ImageBuffer yuv420_to_rgb(const YuvFrame& frame, int height, int width);

// User-configured single-frame H.264 round trip. The command template is run
// through the shell after substituting {input}, {output}, {qpi}, {width} and
// {height}; it must read the raw frame at {input} and leave the decoded raw
// frame (same layout) at {output}.
struct ExternalEncoder {
  static constexpr const char* kEnvVar = "DEGRADEKIT_H264_CMD";

  std::string command_template;

  // Reads DEGRADEKIT_H264_CMD; nullopt when unset or empty.
  static std::optional<ExternalEncoder> from_env();
};

// Throws BackendUnavailable when `backend` is null and BackendError when the
// command fails or produces a malformed frame.
ImageBuffer compress_h264(const ImageBuffer& image, int qpi,
                          const ExternalEncoder* backend);

}  // namespace degradekit

#endif  // DEGRADEKIT_CODEC_H_
