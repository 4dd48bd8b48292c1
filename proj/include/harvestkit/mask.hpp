#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "harvestkit/error.hpp"
#include "harvestkit/pgm.hpp"

namespace hk {

// Foreground/background grid; foreground marks the instance.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);

    int width() const { return width_; }
    int height() const { return height_; }
    bool at(int x, int y) const {
        return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
    }
    void set(int x, int y, bool v) {
        bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
    }
    std::size_t area() const;  // foreground pixel count
    bool empty_foreground() const { return area() == 0; }
    bool same_dims(const BinaryMask& o) const {
        return width_ == o.width_ && height_ == o.height_;
    }
    bool operator==(const BinaryMask& o) const = default;

    const std::vector<std::uint8_t>& bits() const { return bits_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct Polygon {
    std::vector<std::array<double, 2>> vertices;  // (x, y) pixel coordinates
};

void validate_polygon(const Polygon& poly);

// Pixel (i,j) is foreground iff its center (i+0.5, j+0.5) lies inside the
// polygon under the even-odd rule; geometry outside the image is clipped.
BinaryMask rasterize_polygon(const Polygon& poly, int width, int height);

// |a n b| / |a u b|; 1.0 when both masks are empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

enum class BorderPolicy {
    BorderIsBackground,  // virtual background ring just outside the image
    BorderIsNeutral,     // distances measured to in-image background only
};

// Exact squared Euclidean distances to the nearest background pixel.
class DistanceField {
public:
    static constexpr std::int64_t kUnreachable = std::numeric_limits<std::int64_t>::max();

    DistanceField() = default;
    DistanceField(int width, int height)
        : width_(width), height_(height),
          d2_(static_cast<std::size_t>(width) * height, 0) {}

    int width() const { return width_; }
    int height() const { return height_; }
    std::int64_t at(int x, int y) const {
        return d2_[static_cast<std::size_t>(y) * width_ + x];
    }
    std::int64_t& at(int x, int y) { return d2_[static_cast<std::size_t>(y) * width_ + x]; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::int64_t> d2_;
};

DistanceField edt(const BinaryMask& mask,
                  BorderPolicy policy = BorderPolicy::BorderIsBackground);

struct PickingPoint {
    int x = 0;
    int y = 0;
    double clearance = 0.0;  // Euclidean distance to nearest background
};

// Foreground pixel maximizing distance-to-background (border counts as
// background); ties break to the smallest row, then smallest column.
PickingPoint picking_point(const BinaryMask& mask);

// Morphological erosion by a Euclidean disk of the given radius: a pixel
// survives iff its squared clearance exceeds radius^2.
BinaryMask erode(const BinaryMask& mask, double radius);

// PGM P5 maxval 255; 0 = background, 255 = foreground.
BinaryMask load_mask_pgm(const std::string& path);
void save_mask_pgm(const BinaryMask& mask, const std::string& path);
BinaryMask mask_from_image(const Image8& img);
Image8 mask_to_image(const BinaryMask& mask);

}  // namespace hk
