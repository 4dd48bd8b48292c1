#include "harvestkit/mask.hpp"

#include <algorithm>
#include <cmath>

namespace hk {

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        raise(ErrorCode::InvalidArgument, "mask must be at least 1x1");
    }
    bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::area() const {
    std::size_t n = 0;
    for (std::uint8_t b : bits_) n += b;
    return n;
}

void validate_polygon(const Polygon& poly) {
    if (poly.vertices.size() < 3) {
        raise(ErrorCode::InvalidArgument,
              "polygon needs >= 3 vertices, got " + std::to_string(poly.vertices.size()));
    }
    for (const auto& v : poly.vertices) {
        if (!std::isfinite(v[0]) || !std::isfinite(v[1])) {
            raise(ErrorCode::InvalidArgument, "polygon vertex is not finite");
        }
    }
}

BinaryMask rasterize_polygon(const Polygon& poly, int width, int height) {
    validate_polygon(poly);
    BinaryMask mask(width, height);
    const std::size_t n = poly.vertices.size();
    std::vector<double> xs;
    for (int j = 0; j < height; ++j) {
        const double yc = j + 0.5;
        xs.clear();
        for (std::size_t e = 0; e < n; ++e) {
            const auto& p = poly.vertices[e];
            const auto& q = poly.vertices[(e + 1) % n];
            if ((p[1] > yc) != (q[1] > yc)) {
                xs.push_back(p[0] + (yc - p[1]) * (q[0] - p[0]) / (q[1] - p[1]));
            }
        }
        if (xs.empty()) continue;
        std::sort(xs.begin(), xs.end());
        for (int i = 0; i < width; ++i) {
            const double xc = i + 0.5;
            // Even-odd rule: count crossings strictly right of the center.
            const auto it = std::upper_bound(xs.begin(), xs.end(), xc);
            if ((xs.end() - it) % 2 != 0) mask.set(i, j, true);
        }
    }
    return mask;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_dims(b)) raise(ErrorCode::ShapeMismatch, "mask dims differ");
    std::size_t inter = 0, uni = 0;
    const auto& ab = a.bits();
    const auto& bb = b.bits();
    for (std::size_t i = 0; i < ab.size(); ++i) {
        const bool av = ab[i] != 0, bv = bb[i] != 0;
        inter += (av && bv) ? 1 : 0;
        uni += (av || bv) ? 1 : 0;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

constexpr std::int64_t kFarDistance = 1 << 20;  // saturation for unreachable columns

// 1-D squared-distance lower envelope over parabolas rooted at pos[i] with
// heights f[i]; evaluates the envelope at integer points 0..n-1. Positions
// must be strictly increasing. Intersections use doubles; every input here
// stays far below 2^53, so the arithmetic is exact.
void envelope_pass(const std::vector<int>& pos, const std::vector<std::int64_t>& f, int n,
                   std::int64_t* out) {
    const int m = static_cast<int>(pos.size());
    std::vector<int> v(static_cast<std::size_t>(m));
    std::vector<double> z(static_cast<std::size_t>(m) + 1);
    auto intersect = [&](int q, int p) {
        return (static_cast<double>(f[static_cast<std::size_t>(q)] - f[static_cast<std::size_t>(p)]) +
                (static_cast<double>(pos[static_cast<std::size_t>(q)]) * pos[static_cast<std::size_t>(q)] -
                 static_cast<double>(pos[static_cast<std::size_t>(p)]) * pos[static_cast<std::size_t>(p)])) /
               (2.0 * (pos[static_cast<std::size_t>(q)] - pos[static_cast<std::size_t>(p)]));
    };
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < m; ++q) {
        double s = intersect(q, v[static_cast<std::size_t>(k)]);
        while (s <= z[static_cast<std::size_t>(k)]) {
            --k;
            s = intersect(q, v[static_cast<std::size_t>(k)]);
        }
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = s;
        z[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
    }
    int kk = 0;
    for (int x = 0; x < n; ++x) {
        while (z[static_cast<std::size_t>(kk) + 1] < x) ++kk;
        const int p = v[static_cast<std::size_t>(kk)];
        const std::int64_t dx = x - pos[static_cast<std::size_t>(p)];
        out[x] = dx * dx + f[static_cast<std::size_t>(p)];
    }
}

}  // namespace

DistanceField edt(const BinaryMask& mask, BorderPolicy policy) {
    const int W = mask.width(), H = mask.height();
    if (W < 1 || H < 1) raise(ErrorCode::InvalidArgument, "mask must be at least 1x1");
    const bool ring = policy == BorderPolicy::BorderIsBackground;

    // Column pass: per-pixel distance (in rows) to the nearest background
    // within the same column, saturated for columns with no background.
    std::vector<std::int64_t> g(static_cast<std::size_t>(W) * H);
    for (int x = 0; x < W; ++x) {
        std::int64_t d = ring ? 0 : kFarDistance;
        for (int y = 0; y < H; ++y) {
            d = mask.at(x, y) ? std::min<std::int64_t>(d + 1, kFarDistance) : 0;
            g[static_cast<std::size_t>(y) * W + x] = d;
        }
        d = ring ? 0 : kFarDistance;
        for (int y = H - 1; y >= 0; --y) {
            d = mask.at(x, y) ? std::min<std::int64_t>(d + 1, kFarDistance) : 0;
            std::int64_t& cell = g[static_cast<std::size_t>(y) * W + x];
            cell = std::min(cell, d);
        }
    }

    // Row pass: lower envelope over the squared column distances, with
    // zero-height parabolas just outside the image when the border counts
    // as background.
    DistanceField field(W, H);
    std::vector<int> pos;
    std::vector<std::int64_t> f;
    std::vector<std::int64_t> row(static_cast<std::size_t>(W));
    for (int y = 0; y < H; ++y) {
        pos.clear();
        f.clear();
        if (ring) {
            pos.push_back(-1);  // virtual background cell in this very row
            f.push_back(0);
        }
        for (int x = 0; x < W; ++x) {
            pos.push_back(x);
            const std::int64_t gx = g[static_cast<std::size_t>(y) * W + x];
            f.push_back(gx * gx);
        }
        if (ring) {
            pos.push_back(W);
            f.push_back(0);
        }
        envelope_pass(pos, f, W, row.data());
        for (int x = 0; x < W; ++x) {
            field.at(x, y) = row[static_cast<std::size_t>(x)] >= kFarDistance * kFarDistance
                                 ? DistanceField::kUnreachable
                                 : row[static_cast<std::size_t>(x)];
        }
    }
    return field;
}

PickingPoint picking_point(const BinaryMask& mask) {
    if (mask.width() < 1 || mask.height() < 1) {
        raise(ErrorCode::InvalidArgument, "mask must be at least 1x1");
    }
    if (mask.empty_foreground()) {
        raise(ErrorCode::EmptyMask, "mask has no foreground pixels");
    }
    const DistanceField field = edt(mask, BorderPolicy::BorderIsBackground);
    PickingPoint best;
    std::int64_t best_d2 = -1;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            const std::int64_t d2 = field.at(x, y);
            if (d2 > best_d2) {
                best_d2 = d2;
                best.x = x;
                best.y = y;
            }
        }
    }
    best.clearance = std::sqrt(static_cast<double>(best_d2));
    return best;
}

BinaryMask erode(const BinaryMask& mask, double radius) {
    if (radius < 0.0) raise(ErrorCode::InvalidArgument, "erosion radius must be >= 0");
    const DistanceField field = edt(mask, BorderPolicy::BorderIsBackground);
    BinaryMask out(mask.width(), mask.height());
    const double r2 = radius * radius;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y) && static_cast<double>(field.at(x, y)) > r2) {
                out.set(x, y, true);
            }
        }
    }
    return out;
}

BinaryMask mask_from_image(const Image8& img) {
    BinaryMask mask(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (img.at(x, y) != 0) mask.set(x, y, true);
        }
    }
    return mask;
}

Image8 mask_to_image(const BinaryMask& mask) {
    Image8 img;
    img.width = mask.width();
    img.height = mask.height();
    img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, 0);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) img.at(x, y) = 255;
        }
    }
    return img;
}

BinaryMask load_mask_pgm(const std::string& path) { return mask_from_image(load_pgm8(path)); }

void save_mask_pgm(const BinaryMask& mask, const std::string& path) {
    save_pgm8(mask_to_image(mask), path);
}

}  // namespace hk
