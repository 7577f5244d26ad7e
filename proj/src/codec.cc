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

#include "degradekit/codec.h"

#include <jpeglib.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include "degradekit/error.h"

namespace degradekit {
namespace {

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void on_jpeg_error(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

std::vector<std::uint8_t> to_rgb8(const ImageBuffer& image) {
  std::vector<std::uint8_t> out(image.size());
  const auto& data = image.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(
        std::lround(std::clamp(data[i], 0.0, 1.0) * 255.0));
  }
  return out;
}

std::vector<std::uint8_t> encode_jpeg(const std::vector<std::uint8_t>& rgb,
                                      int width, int height, int quality) {
  jpeg_compress_struct cinfo;
  JpegErrorManager jerr;
  unsigned char* buffer = nullptr;
  unsigned long buffer_size = 0;
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = on_jpeg_error;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw DataError(std::string("JPEG encode failed: ") + jerr.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &buffer_size);
  cinfo.image_width = static_cast<JDIMENSION>(width);
  cinfo.image_height = static_cast<JDIMENSION>(height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  cinfo.dct_method = JDCT_ISLOW;
  cinfo.optimize_coding = FALSE;
  cinfo.comp_info[0].h_samp_factor = 2;
  cinfo.comp_info[0].v_samp_factor = 2;
  cinfo.comp_info[1].h_samp_factor = 1;
  cinfo.comp_info[1].v_samp_factor = 1;
  cinfo.comp_info[2].h_samp_factor = 1;
  cinfo.comp_info[2].v_samp_factor = 1;
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(width) * 3;
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(&rgb[cinfo.next_scanline * stride]);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::vector<std::uint8_t> out(buffer, buffer + buffer_size);
  std::free(buffer);
  return out;
}

ImageBuffer decode_jpeg(const std::vector<std::uint8_t>& bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  std::vector<std::uint8_t> rgb;
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = on_jpeg_error;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DataError(std::string("JPEG decode failed: ") + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_decompress(&cinfo);
  const int width = static_cast<int>(cinfo.output_width);
  const int height = static_cast<int>(cinfo.output_height);
  const std::size_t stride = static_cast<std::size_t>(width) * 3;
  rgb.resize(stride * height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = &rgb[cinfo.output_scanline * stride];
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);

  ImageBuffer out(height, width);
  for (std::size_t i = 0; i < rgb.size(); ++i) out.data()[i] = rgb[i] / 255.0;
  return out;
}

// BT.601 studio-swing forward matrix (RGB in [0,1] -> 8-bit code values).
constexpr std::array<std::array<double, 3>, 3> kRgbToYcc = {{
    {65.481, 128.553, 24.966},
    {-37.797, -74.203, 112.0},
    {112.0, -93.786, -18.214},
}};
constexpr std::array<double, 3> kYccOffset = {16.0, 128.0, 128.0};

std::array<std::array<double, 3>, 3> invert3(
    const std::array<std::array<double, 3>, 3>& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  std::array<std::array<double, 3>, 3> inv{};
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return inv;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

std::string replace_all(std::string text, const std::string& key,
                        const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
  return text;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string read_file_tail(const std::filesystem::path& path, std::size_t max) {
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text.size() > max ? text.substr(text.size() - max) : text;
}

class TempDir {
 public:
  TempDir() {
    std::string pattern =
        (std::filesystem::temp_directory_path() / "degradekit-h264-XXXXXX")
            .string();
    if (::mkdtemp(pattern.data()) == nullptr) {
      throw BackendError("cannot create temporary directory for H.264 frame");
    }
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace

ImageBuffer compress_jpeg(const ImageBuffer& image, int quality) {
  if (quality < 1 || quality > 100) {
    throw DataError("JPEG quality " + std::to_string(quality) +
                    " outside [1, 100]");
  }
  const auto bytes =
      encode_jpeg(to_rgb8(image), image.width(), image.height(), quality);
  return decode_jpeg(bytes);
}

YuvFrame rgb_to_yuv420(const ImageBuffer& image) {
  YuvFrame frame;
  frame.width = image.width() + image.width() % 2;
  frame.height = image.height() + image.height() % 2;
  const int w = frame.width;
  const int h = frame.height;
  std::vector<double> planes[3];
  for (auto& p : planes) p.resize(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const int sy = std::min(y, image.height() - 1);
    for (int x = 0; x < w; ++x) {
      const int sx = std::min(x, image.width() - 1);
      for (int k = 0; k < 3; ++k) {
        double v = kYccOffset[k];
        for (int c = 0; c < 3; ++c) v += kRgbToYcc[k][c] * image.at(sy, sx, c);
        planes[k][static_cast<std::size_t>(y) * w + x] = v;
      }
    }
  }
  const std::size_t luma = static_cast<std::size_t>(w) * h;
  const std::size_t chroma = luma / 4;
  frame.bytes.resize(luma + 2 * chroma);
  for (std::size_t i = 0; i < luma; ++i) frame.bytes[i] = to_byte(planes[0][i]);
  for (int k = 1; k < 3; ++k) {
    std::uint8_t* dst = &frame.bytes[luma + (k - 1) * chroma];
    for (int y = 0; y < h / 2; ++y) {
      for (int x = 0; x < w / 2; ++x) {
        const auto& p = planes[k];
        const std::size_t i0 = static_cast<std::size_t>(2 * y) * w + 2 * x;
        const double avg = 0.25 * (p[i0] + p[i0 + 1] + p[i0 + w] + p[i0 + w + 1]);
        dst[static_cast<std::size_t>(y) * (w / 2) + x] = to_byte(avg);
      }
    }
  }
  return frame;
}

ImageBuffer yuv420_to_rgb(const YuvFrame& frame, int height, int width) {
  const int w = frame.width;
  const std::size_t luma = static_cast<std::size_t>(w) * frame.height;
  const std::size_t chroma = luma / 4;
  if (frame.bytes.size() != luma + 2 * chroma) {
    throw BackendError("decoded YUV frame has " +
                       std::to_string(frame.bytes.size()) + " bytes, expected " +
                       std::to_string(luma + 2 * chroma));
  }
  if (height > frame.height || width > frame.width) {
    throw DataError("YUV frame smaller than requested output");
  }
  static const auto inv = invert3(kRgbToYcc);
  ImageBuffer out(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t ci = static_cast<std::size_t>(y / 2) * (w / 2) + x / 2;
      const double ycc[3] = {
          frame.bytes[static_cast<std::size_t>(y) * w + x] - kYccOffset[0],
          frame.bytes[luma + ci] - kYccOffset[1],
          frame.bytes[luma + chroma + ci] - kYccOffset[2]};
      for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        for (int k = 0; k < 3; ++k) v += inv[c][k] * ycc[k];
        out.at(y, x, c) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

std::optional<ExternalEncoder> ExternalEncoder::from_env() {
  const char* value = std::getenv(kEnvVar);
  if (value == nullptr || *value == '\0') return std::nullopt;
  return ExternalEncoder{value};
}

ImageBuffer compress_h264(const ImageBuffer& image, int qpi,
                          const ExternalEncoder* backend) {
  if (backend == nullptr) {
    throw BackendUnavailable(
        std::string("H.264 backend not configured (set ") +
        ExternalEncoder::kEnvVar + ")");
  }
  if (qpi < 20 || qpi > 40) {
    throw DataError("H.264 QPI " + std::to_string(qpi) + " outside [20, 40]");
  }
  const YuvFrame frame = rgb_to_yuv420(image);
  TempDir dir;
  const auto input = dir.path() / "input.yuv";
  const auto output = dir.path() / "output.yuv";
  const auto log = dir.path() / "backend.log";
  {
    std::ofstream out(input, std::ios::binary);
    out.write(reinterpret_cast<const char*>(frame.bytes.data()),
              static_cast<std::streamsize>(frame.bytes.size()));
    if (!out) throw BackendError("cannot write raw frame " + input.string());
  }
  std::string cmd = backend->command_template;
  cmd = replace_all(cmd, "{input}", shell_quote(input.string()));
  cmd = replace_all(cmd, "{output}", shell_quote(output.string()));
  cmd = replace_all(cmd, "{qpi}", std::to_string(qpi));
  cmd = replace_all(cmd, "{width}", std::to_string(frame.width));
  cmd = replace_all(cmd, "{height}", std::to_string(frame.height));
  const std::string full = "( " + cmd + " ) > " + shell_quote(log.string()) +
                           " 2>&1";
  const int status = std::system(full.c_str());
  if (status != 0) {
    std::ostringstream msg;
    msg << "H.264 backend exited with status " << status << ": "
        << read_file_tail(log, 2000);
    throw BackendError(msg.str());
  }
  YuvFrame decoded;
  decoded.width = frame.width;
  decoded.height = frame.height;
  {
    std::ifstream in(output, std::ios::binary);
    if (!in) {
      throw BackendError("H.264 backend produced no output frame; log: " +
                         read_file_tail(log, 2000));
    }
    decoded.bytes.assign(std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>());
  }
  return yuv420_to_rgb(decoded, image.height(), image.width());
}

}  // namespace degradekit
