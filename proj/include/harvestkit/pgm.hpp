#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hk {

struct Image8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
};

struct Image16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> pixels;

    std::uint16_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint16_t& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
};

// Binary PGM ("P5"). 8-bit uses maxval 255; 16-bit uses maxval 65535 with
// big-endian sample order per the format.
Image8 load_pgm8(const std::string& path);
void save_pgm8(const Image8& img, const std::string& path);
Image16 load_pgm16(const std::string& path);
void save_pgm16(const Image16& img, const std::string& path);

Image8 parse_pgm8(const std::string& bytes, const std::string& origin);
Image16 parse_pgm16(const std::string& bytes, const std::string& origin);
std::string pgm8_bytes(const Image8& img);
std::string pgm16_bytes(const Image16& img);

}  // namespace hk
