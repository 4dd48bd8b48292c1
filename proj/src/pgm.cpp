#include "harvestkit/pgm.hpp"

#include <cctype>

#include "harvestkit/error.hpp"
#include "harvestkit/io_util.hpp"

namespace hk {

namespace {

struct PgmHeader {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::size_t data_offset = 0;
};

// P5 header: magic, then width/height/maxval tokens separated by
// whitespace, '#' comments allowed, one whitespace byte before the data.
PgmHeader parse_header(const std::string& bytes, const std::string& origin) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        raise(ErrorCode::ParseError, origin + ": not a binary PGM (missing P5 magic)");
    }
    std::size_t pos = 2;
    auto next_int = [&]() -> int {
        while (pos < bytes.size()) {
            const char c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
        if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            raise(ErrorCode::ParseError, origin + ": malformed PGM header");
        }
        long v = 0;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1000000000L) raise(ErrorCode::ParseError, origin + ": PGM header value overflow");
            ++pos;
        }
        return static_cast<int>(v);
    };
    PgmHeader h;
    h.width = next_int();
    h.height = next_int();
    h.maxval = next_int();
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        raise(ErrorCode::ParseError, origin + ": PGM header not terminated");
    }
    h.data_offset = pos + 1;
    if (h.width <= 0 || h.height <= 0) {
        raise(ErrorCode::ParseError, origin + ": PGM dimensions must be positive");
    }
    return h;
}

}  // namespace

Image8 parse_pgm8(const std::string& bytes, const std::string& origin) {
    const PgmHeader h = parse_header(bytes, origin);
    if (h.maxval != 255) {
        raise(ErrorCode::ParseError, origin + ": expected 8-bit PGM (maxval 255), got maxval " +
                                         std::to_string(h.maxval));
    }
    const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
    if (bytes.size() - h.data_offset < n) {
        raise(ErrorCode::ParseError, origin + ": PGM pixel data truncated");
    }
    Image8 img;
    img.width = h.width;
    img.height = h.height;
    img.pixels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        img.pixels[i] = static_cast<std::uint8_t>(bytes[h.data_offset + i]);
    }
    return img;
}

Image16 parse_pgm16(const std::string& bytes, const std::string& origin) {
    const PgmHeader h = parse_header(bytes, origin);
    if (h.maxval != 65535) {
        raise(ErrorCode::ParseError, origin + ": expected 16-bit PGM (maxval 65535), got maxval " +
                                         std::to_string(h.maxval));
    }
    const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
    if (bytes.size() - h.data_offset < 2 * n) {
        raise(ErrorCode::ParseError, origin + ": PGM pixel data truncated");
    }
    Image16 img;
    img.width = h.width;
    img.height = h.height;
    img.pixels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto hi = static_cast<std::uint8_t>(bytes[h.data_offset + 2 * i]);
        const auto lo = static_cast<std::uint8_t>(bytes[h.data_offset + 2 * i + 1]);
        img.pixels[i] = static_cast<std::uint16_t>((hi << 8) | lo);
    }
    return img;
}

std::string pgm8_bytes(const Image8& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * img.height) {
        raise(ErrorCode::InvalidArgument, "image dims disagree with pixel count");
    }
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n255\n";
    out.reserve(out.size() + img.pixels.size());
    for (std::uint8_t p : img.pixels) out.push_back(static_cast<char>(p));
    return out;
}

std::string pgm16_bytes(const Image16& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * img.height) {
        raise(ErrorCode::InvalidArgument, "image dims disagree with pixel count");
    }
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n65535\n";
    out.reserve(out.size() + 2 * img.pixels.size());
    for (std::uint16_t p : img.pixels) {
        out.push_back(static_cast<char>(p >> 8));
        out.push_back(static_cast<char>(p & 0xFF));
    }
    return out;
}

Image8 load_pgm8(const std::string& path) { return parse_pgm8(read_file(path), path); }

void save_pgm8(const Image8& img, const std::string& path) {
    atomic_write_file(path, pgm8_bytes(img));
}

Image16 load_pgm16(const std::string& path) { return parse_pgm16(read_file(path), path); }

void save_pgm16(const Image16& img, const std::string& path) {
    atomic_write_file(path, pgm16_bytes(img));
}

}  // namespace hk
