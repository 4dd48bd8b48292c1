#pragma once

#include <array>
#include <string>

#include "harvestkit/error.hpp"
#include "harvestkit/pgm.hpp"

namespace hk {

struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;

    void validate() const {
        if (!(fx > 0.0) || !(fy > 0.0)) {
            raise(ErrorCode::InvalidArgument, "focal lengths must be positive");
        }
    }
};

struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

struct PixelPoint {
    double u = 0.0, v = 0.0;
};

// Rotation (row-major 3x3) plus translation in meters.
struct RigidTransform {
    std::array<double, 9> r{1, 0, 0, 0, 1, 0, 0, 0, 1};
    std::array<double, 3> t{0, 0, 0};

    static RigidTransform identity() { return {}; }
    // Orthonormality and det +1, checked to the given tolerance.
    void validate(double tol = 1e-9) const;
};

Point3 back_project(double u, double v, double depth, const CameraIntrinsics& k);
PixelPoint project(const Point3& p, const CameraIntrinsics& k);

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
Point3 apply(const RigidTransform& t, const Point3& p);
Point3 to_base(const Point3& p_cam, const RigidTransform& hand_eye,
               const RigidTransform& ee_to_base);

struct EulerAngles {
    double roll = 0.0, pitch = 0.0, yaw = 0.0;  // radians
};

// Extrinsic X-Y-Z: R = Rz(yaw) * Ry(pitch) * Rx(roll).
RigidTransform euler_to_rotation(double roll, double pitch, double yaw);

struct GraspPlan {
    Point3 target;
    Point3 grasp;      // target + enclose_offset * approach_axis
    Point3 pre_grasp;  // target - safety_margin * approach_axis
    Point3 approach_axis;
    EulerAngles orientation;
    double safety_margin = 0.0;
    double enclose_offset = 0.0;
};

inline constexpr double kDefaultEncloseOffset = 0.02;  // meters
inline constexpr double kDefaultSafetyMargin = 0.10;   // meters

GraspPlan grasp_plan(const Point3& target_base, const EulerAngles& orientation,
                     double safety_margin = kDefaultSafetyMargin,
                     double enclose_offset = kDefaultEncloseOffset);

struct QuinticSample {
    double s = 0.0;
    double s_dot = 0.0;
    double s_ddot = 0.0;
};

// Normalized minimum-jerk style profile s(tau) = 10tau^3 - 15tau^4 + 6tau^5.
QuinticSample quintic_profile(double t, double T);

// ---- calibration & depth -----------------------------------------------------

struct Calibration {
    CameraIntrinsics intrinsics;
    RigidTransform hand_eye;    // camera -> end-effector
    RigidTransform ee_to_base;  // end-effector -> base
};

// Text format with bracketed sections:
//   [intrinsics]  fx fy cx cy
//   [hand_eye]    9 rotation entries row-major, then tx ty tz
//   [ee_to_base]  same layout
Calibration parse_calibration(const std::string& text, const std::string& origin);
std::string calibration_to_text(const Calibration& c);
Calibration load_calibration(const std::string& path);
void save_calibration(const Calibration& c, const std::string& path);

// 16-bit PGM, millimeters per unit, 0 = no measurement.
class DepthMap {
public:
    DepthMap() = default;
    explicit DepthMap(Image16 img) : img_(std::move(img)) {}

    int width() const { return img_.width; }
    int height() const { return img_.height; }
    const Image16& image() const { return img_; }

    // Depth in meters at a pixel; a zero sample falls back to the median of
    // valid samples in the surrounding 5x5 window. No valid sample at all
    // -> invalid-depth error (occluded picking point without usable depth).
    double depth_at(int u, int v) const;

private:
    Image16 img_;
};

DepthMap load_depth_pgm(const std::string& path);

}  // namespace hk
