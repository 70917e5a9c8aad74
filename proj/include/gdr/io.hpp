#pragma once

#include <string>

#include "gdr/image.hpp"

namespace gdr {

// 8-bit grayscale/RGB PNG at the boundary. Values are clamped to [0,1] and
// quantized on write; reads map back to [0,1].
Image read_png(const std::string& path);
void write_png(const std::string& path, const Image& img);

// Raw tensor sidecar: magic "BGT1", three u32 LE (H, W, C), then H*W*C
// float32 LE row-major.
Image read_tensor(const std::string& path);
void write_tensor(const std::string& path, const Image& img);

// Write to <path>.tmp then rename into place.
void atomic_write_png(const std::string& path, const Image& img);
void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace gdr
