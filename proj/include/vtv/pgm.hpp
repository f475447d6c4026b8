#ifndef VTV_PGM_HPP
#define VTV_PGM_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vtv/image.hpp"

namespace vtv {

// Binary 8-bit PGM (P5, maxval <= 255). Export clamps to [0, 255] and rounds
// half away from zero, so integer-valued images round-trip bit-exactly.

Imaged read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Imaged& image);

Imaged decode_pgm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_pgm(const Imaged& image);

/// Clamp + round-half-away-from-zero quantisation used on export.
std::uint8_t quantize_pixel(double value);

/// Affine map of [min, max] onto [0, 255]; a flat image maps to 0.
Imaged rescale_to_display(const Imaged& image);

}  // namespace vtv

#endif  // VTV_PGM_HPP
