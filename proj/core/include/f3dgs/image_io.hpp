#pragma once

#include <filesystem>

#include "f3dgs/types.hpp"

namespace f3dgs {

/// Binary 8-bit PPM (P6). Channels are rounded to the nearest 1/255.
void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);

}  // namespace f3dgs
