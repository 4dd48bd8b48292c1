#include "harvestkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "harvestkit/io_util.hpp"

namespace hk {

void RigidTransform::validate(double tol) const {
    // R^T R = I
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k) {
                dot += r[static_cast<std::size_t>(k * 3 + i)] * r[static_cast<std::size_t>(k * 3 + j)];
            }
            const double want = (i == j) ? 1.0 : 0.0;
            if (std::fabs(dot - want) > tol) {
                raise(ErrorCode::ValidationError, "rotation matrix is not orthonormal");
            }
        }
    }
    const double det =
        r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
        r[2] * (r[3] * r[7] - r[4] * r[6]);
    if (std::fabs(det - 1.0) > tol) {
        raise(ErrorCode::ValidationError, "rotation matrix determinant is not +1");
    }
    for (double v : t) {
        if (!std::isfinite(v)) raise(ErrorCode::ValidationError, "translation is not finite");
    }
}

Point3 back_project(double u, double v, double depth, const CameraIntrinsics& k) {
    k.validate();
    if (!std::isfinite(depth) || depth <= 0.0) {
        raise(ErrorCode::InvalidDepth, "depth must be positive and finite");
    }
    return Point3{(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth};
}

PixelPoint project(const Point3& p, const CameraIntrinsics& k) {
    k.validate();
    if (!(p.z > 0.0)) raise(ErrorCode::BehindCamera, "point is not in front of the camera");
    return PixelPoint{k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy};
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform c;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) {
                acc += a.r[static_cast<std::size_t>(i * 3 + k)] * b.r[static_cast<std::size_t>(k * 3 + j)];
            }
            c.r[static_cast<std::size_t>(i * 3 + j)] = acc;
        }
        c.t[static_cast<std::size_t>(i)] =
            a.r[static_cast<std::size_t>(i * 3)] * b.t[0] +
            a.r[static_cast<std::size_t>(i * 3 + 1)] * b.t[1] +
            a.r[static_cast<std::size_t>(i * 3 + 2)] * b.t[2] + a.t[static_cast<std::size_t>(i)];
    }
    return c;
}

Point3 apply(const RigidTransform& tr, const Point3& p) {
    return Point3{
        tr.r[0] * p.x + tr.r[1] * p.y + tr.r[2] * p.z + tr.t[0],
        tr.r[3] * p.x + tr.r[4] * p.y + tr.r[5] * p.z + tr.t[1],
        tr.r[6] * p.x + tr.r[7] * p.y + tr.r[8] * p.z + tr.t[2],
    };
}

Point3 to_base(const Point3& p_cam, const RigidTransform& hand_eye,
               const RigidTransform& ee_to_base) {
    return apply(ee_to_base, apply(hand_eye, p_cam));
}

RigidTransform euler_to_rotation(double roll, double pitch, double yaw) {
    if (!std::isfinite(roll) || !std::isfinite(pitch) || !std::isfinite(yaw)) {
        raise(ErrorCode::InvalidArgument, "angles must be finite");
    }
    const double cr = std::cos(roll), sr = std::sin(roll);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    RigidTransform rx, ry, rz;
    rx.r = {1, 0, 0, 0, cr, -sr, 0, sr, cr};
    ry.r = {cp, 0, sp, 0, 1, 0, -sp, 0, cp};
    rz.r = {cy, -sy, 0, sy, cy, 0, 0, 0, 1};
    return compose(rz, compose(ry, rx));
}

GraspPlan grasp_plan(const Point3& target_base, const EulerAngles& orientation,
                     double safety_margin, double enclose_offset) {
    if (!(safety_margin > 0.0)) {
        raise(ErrorCode::InvalidArgument, "safety margin must be > 0");
    }
    if (enclose_offset < 0.0) {
        raise(ErrorCode::InvalidArgument, "enclose offset must be >= 0");
    }
    const RigidTransform rot =
        euler_to_rotation(orientation.roll, orientation.pitch, orientation.yaw);
    // Tool +z is the approach direction.
    const Point3 axis{rot.r[2], rot.r[5], rot.r[8]};
    GraspPlan plan;
    plan.target = target_base;
    plan.approach_axis = axis;
    plan.orientation = orientation;
    plan.safety_margin = safety_margin;
    plan.enclose_offset = enclose_offset;
    plan.grasp = Point3{target_base.x + enclose_offset * axis.x,
                        target_base.y + enclose_offset * axis.y,
                        target_base.z + enclose_offset * axis.z};
    plan.pre_grasp = Point3{target_base.x - safety_margin * axis.x,
                            target_base.y - safety_margin * axis.y,
                            target_base.z - safety_margin * axis.z};
    return plan;
}

QuinticSample quintic_profile(double t, double T) {
    if (!(T > 0.0)) raise(ErrorCode::InvalidArgument, "duration must be > 0");
    if (t < 0.0 || t > T) raise(ErrorCode::RangeError, "t must lie in [0, T]");
    const double tau = t / T;
    const double tau2 = tau * tau;
    const double tau3 = tau2 * tau;
    QuinticSample s;
    s.s = 10.0 * tau3 - 15.0 * tau3 * tau + 6.0 * tau3 * tau2;
    s.s_dot = (30.0 * tau2 - 60.0 * tau3 + 30.0 * tau2 * tau2) / T;
    s.s_ddot = (60.0 * tau - 180.0 * tau2 + 120.0 * tau3) / (T * T);
    return s;
}

// ---- calibration -----------------------------------------------------------

namespace {

std::vector<double> section_numbers(const std::string& body, const std::string& origin,
                                    const std::string& name, std::size_t want) {
    std::istringstream is(body);
    std::vector<double> values;
    double v = 0.0;
    while (is >> v) values.push_back(v);
    if (!is.eof() || values.size() != want) {
        raise(ErrorCode::ParseError, origin + ": section [" + name + "] needs " +
                                         std::to_string(want) + " numbers, got " +
                                         std::to_string(values.size()));
    }
    return values;
}

RigidTransform transform_from(const std::vector<double>& v) {
    RigidTransform tr;
    for (int i = 0; i < 9; ++i) tr.r[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
    for (int i = 0; i < 3; ++i) tr.t[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(9 + i)];
    tr.validate();
    return tr;
}

}  // namespace

Calibration parse_calibration(const std::string& text, const std::string& origin) {
    std::string current;
    std::string intr, he, eb;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t\r");
        const std::string trimmed = line.substr(b, e - b + 1);
        if (trimmed.front() == '[') {
            if (trimmed.back() != ']') {
                raise(ErrorCode::ParseError, origin + ": unterminated section header: " + trimmed);
            }
            current = trimmed.substr(1, trimmed.size() - 2);
            if (current != "intrinsics" && current != "hand_eye" && current != "ee_to_base") {
                raise(ErrorCode::ParseError, origin + ": unknown section [" + current + "]");
            }
            continue;
        }
        if (current == "intrinsics") intr += trimmed + "\n";
        else if (current == "hand_eye") he += trimmed + "\n";
        else if (current == "ee_to_base") eb += trimmed + "\n";
        else raise(ErrorCode::ParseError, origin + ": data before any section header");
    }
    if (intr.empty() || he.empty() || eb.empty()) {
        raise(ErrorCode::ParseError,
              origin + ": calibration needs [intrinsics], [hand_eye], and [ee_to_base]");
    }
    Calibration c;
    const auto iv = section_numbers(intr, origin, "intrinsics", 4);
    c.intrinsics = CameraIntrinsics{iv[0], iv[1], iv[2], iv[3]};
    c.intrinsics.validate();
    c.hand_eye = transform_from(section_numbers(he, origin, "hand_eye", 12));
    c.ee_to_base = transform_from(section_numbers(eb, origin, "ee_to_base", 12));
    return c;
}

std::string calibration_to_text(const Calibration& c) {
    char buf[64];
    std::ostringstream os;
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "[intrinsics]\n"
       << num(c.intrinsics.fx) << ' ' << num(c.intrinsics.fy) << ' ' << num(c.intrinsics.cx)
       << ' ' << num(c.intrinsics.cy) << '\n';
    auto dump = [&](const char* name, const RigidTransform& tr) {
        os << '[' << name << "]\n";
        for (int row = 0; row < 3; ++row) {
            os << num(tr.r[static_cast<std::size_t>(row * 3)]) << ' '
               << num(tr.r[static_cast<std::size_t>(row * 3 + 1)]) << ' '
               << num(tr.r[static_cast<std::size_t>(row * 3 + 2)]) << '\n';
        }
        os << num(tr.t[0]) << ' ' << num(tr.t[1]) << ' ' << num(tr.t[2]) << '\n';
    };
    dump("hand_eye", c.hand_eye);
    dump("ee_to_base", c.ee_to_base);
    return os.str();
}

Calibration load_calibration(const std::string& path) {
    return parse_calibration(read_file(path), path);
}

void save_calibration(const Calibration& c, const std::string& path) {
    atomic_write_file(path, calibration_to_text(c));
}

// ---- depth ----------------------------------------------------------------

double DepthMap::depth_at(int u, int v) const {
    if (u < 0 || v < 0 || u >= img_.width || v >= img_.height) {
        raise(ErrorCode::RangeError, "pixel outside the depth map");
    }
    const std::uint16_t direct = img_.at(u, v);
    if (direct != 0) return direct / 1000.0;
    // Median of valid neighbors in the 5x5 window around the pixel.
    std::vector<std::uint16_t> window;
    for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
            const int x = u + dx, y = v + dy;
            if (x < 0 || y < 0 || x >= img_.width || y >= img_.height) continue;
            const std::uint16_t s = img_.at(x, y);
            if (s != 0) window.push_back(s);
        }
    }
    if (window.empty()) {
        raise(ErrorCode::InvalidDepth, "no valid depth sample at or near the pixel");
    }
    std::sort(window.begin(), window.end());
    return window[window.size() / 2] / 1000.0;
}

DepthMap load_depth_pgm(const std::string& path) { return DepthMap(load_pgm16(path)); }

}  // namespace hk
