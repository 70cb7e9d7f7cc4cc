#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace codemap::image {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

Rgb parse_hex(std::string_view hex);  // "#rrggbb"
std::string to_hex(Rgb c);
Rgb lerp(Rgb a, Rgb b, double t);

// 8-bit RGBA, rows top to bottom. Output is deterministic for equal input.
std::vector<std::uint8_t> encode_png(std::size_t width, std::size_t height,
                                     std::span<const std::uint8_t> rgba);

std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace codemap::image
