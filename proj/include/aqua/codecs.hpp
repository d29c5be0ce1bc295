#pragma once

#include <filesystem>
#include <string>

#include "aqua/grid.hpp"

namespace aqua {

/// 8-bit RGB PNG. Values are mapped v/255 on read and round(v*255) on write.
ImageGrid read_png_rgb8(const std::filesystem::path& path);
void write_png_rgb8(const std::filesystem::path& path, const ImageGrid& rgb);

/// 16-bit grayscale PNG, v/65535 on read, round(clamp(v,0,1)*65535) on write.
/// Round-trips exactly for values on the 1/65535 lattice.
DepthGrid read_png_gray16(const std::filesystem::path& path);
void write_png_gray16(const std::filesystem::path& path, const DepthGrid& d);

/// Grayscale PFM ("Pf" header, width height, scale line; negative scale
/// means little-endian; rows are stored bottom-up). Bit-exact round-trip.
DepthGrid read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const DepthGrid& d);

/// Dispatch on extension: .pfm -> PFM, .png -> 16-bit gray PNG.
DepthGrid read_depth_any(const std::filesystem::path& path);

/// 8-bit RGB PNG decoded into unit normals (see decode_normals).
NormalGrid read_normal_png(const std::filesystem::path& path);
/// Encodes unit normals back to 8-bit RGB ((v+1)/2*255 per channel).
void write_normal_png(const std::filesystem::path& path, const NormalGrid& n);

}  // namespace aqua
