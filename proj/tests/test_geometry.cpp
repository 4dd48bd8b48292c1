#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "harvestkit/geometry.hpp"
#include "harvestkit/io_util.hpp"
#include "testutil.hpp"

using hk::Calibration;
using hk::CameraIntrinsics;
using hk::EulerAngles;
using hk::Point3;
using hk::RigidTransform;
using hk::load_calibration;
using hk::parse_calibration;

namespace {

const CameraIntrinsics kCam{615.0, 612.5, 320.0, 240.0};

RigidTransform random_pose(hk::Rng& rng) {
    RigidTransform t = hk::euler_to_rotation(rng.uniform(-3.0, 3.0), rng.uniform(-1.4, 1.4),
                                             rng.uniform(-3.0, 3.0));
    t.t = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    return t;
}

double dist(const Point3& a, const Point3& b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                     (a.z - b.z) * (a.z - b.z));
}

}  // namespace

TEST_CASE("back projection inverts projection to sub-nanopixel error") {
    hk::Rng rng(70);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform(0.0, 640.0);
        const double v = rng.uniform(0.0, 480.0);
        const double z = rng.uniform(0.15, 3.5);
        const Point3 p = back_project(u, v, z, kCam);
        CHECK(p.z == z);
        const hk::PixelPoint q = project(p, kCam);
        worst = std::max({worst, std::abs(q.u - u), std::abs(q.v - v)});
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("back projection hand value") {
    const Point3 p = back_project(420.0, 300.0, 2.0, kCam);
    CHECK(tu::close(p.x, (420.0 - 320.0) / 615.0 * 2.0, 1e-15));
    CHECK(tu::close(p.y, (300.0 - 240.0) / 612.5 * 2.0, 1e-15));
    CHECK(p.z == 2.0);

    tu::expect_error(hk::ErrorCode::InvalidDepth, [] { back_project(0, 0, 0.0, kCam); });
    tu::expect_error(hk::ErrorCode::InvalidDepth, [] { back_project(0, 0, -1.0, kCam); });
    tu::expect_error(hk::ErrorCode::BehindCamera, [] { project(Point3{0, 0, -0.5}, kCam); });
    tu::expect_error(hk::ErrorCode::InvalidArgument, [] {
        CameraIntrinsics bad{0.0, 1.0, 0.0, 0.0};
        bad.validate();
    });
}

TEST_CASE("rigid transform validation") {
    RigidTransform ok = RigidTransform::identity();
    ok.validate();

    RigidTransform scaled = ok;
    scaled.r[0] = 2.0;
    tu::expect_error(hk::ErrorCode::ValidationError, [&] { scaled.validate(); });

    // Orthonormal but reflecting: determinant -1 must be rejected.
    RigidTransform mirror = ok;
    mirror.r = {1, 0, 0, 0, 1, 0, 0, 0, -1};
    tu::expect_error(hk::ErrorCode::ValidationError, [&] { mirror.validate(); });
}

TEST_CASE("compose matches manual matrix-and-offset arithmetic") {
    hk::Rng rng(71);
    for (int i = 0; i < 25; ++i) {
        const RigidTransform a = random_pose(rng);
        const RigidTransform b = random_pose(rng);
        const RigidTransform ab = compose(a, b);
        ab.validate(1e-9);

        // Composition agrees with applying b then a, pointwise.
        const Point3 p{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const Point3 via = apply(a, apply(b, p));
        const Point3 direct = apply(ab, p);
        CHECK(dist(via, direct) <= 1e-12);

        // Rotation block equals the row-major product.
        const tu::Mat3 ra = {a.r[0], a.r[1], a.r[2], a.r[3], a.r[4],
                             a.r[5], a.r[6], a.r[7], a.r[8]};
        const tu::Mat3 rb = {b.r[0], b.r[1], b.r[2], b.r[3], b.r[4],
                             b.r[5], b.r[6], b.r[7], b.r[8]};
        const tu::Mat3 prod = tu::mat_mul(ra, rb);
        for (int k = 0; k < 9; ++k) CHECK(tu::close(ab.r[static_cast<std::size_t>(k)], prod[static_cast<std::size_t>(k)], 1e-12));
    }
}

TEST_CASE("to_base chains camera through hand to base and keeps lengths") {
    hk::Rng rng(72);
    const RigidTransform hand_eye = random_pose(rng);
    const RigidTransform ee_to_base = random_pose(rng);

    const Point3 p{0.1, -0.2, 0.8};
    const Point3 direct = to_base(p, hand_eye, ee_to_base);
    const Point3 chained = apply(ee_to_base, apply(hand_eye, p));
    CHECK(dist(direct, chained) <= 1e-15);

    // Isometry: pairwise distances survive the frame change to 1e-12.
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Point3 a{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.1, 3)};
        const Point3 b{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.1, 3)};
        const double before = dist(a, b);
        const double after =
            dist(to_base(a, hand_eye, ee_to_base), to_base(b, hand_eye, ee_to_base));
        worst = std::max(worst, std::abs(after - before));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("euler rotation composes Rz Ry Rx in that order") {
    hk::Rng rng(73);
    for (int i = 0; i < 20; ++i) {
        const double roll = rng.uniform(-3.1, 3.1);
        const double pitch = rng.uniform(-1.5, 1.5);
        const double yaw = rng.uniform(-3.1, 3.1);
        const RigidTransform got = hk::euler_to_rotation(roll, pitch, yaw);
        got.validate(1e-12);
        const tu::Mat3 want = tu::mat_mul(tu::rot_z(yaw), tu::mat_mul(tu::rot_y(pitch), tu::rot_x(roll)));
        for (int k = 0; k < 9; ++k) {
            CHECK(tu::close(got.r[static_cast<std::size_t>(k)], want[static_cast<std::size_t>(k)], 1e-14));
        }
        for (double t : got.t) CHECK(t == 0.0);
    }

    // Ninety-degree yaw maps +x to +y.
    const RigidTransform yaw90 = hk::euler_to_rotation(0.0, 0.0, M_PI / 2.0);
    const Point3 ex = apply(yaw90, Point3{1, 0, 0});
    CHECK(tu::close(ex.x, 0.0, 1e-15));
    CHECK(tu::close(ex.y, 1.0, 1e-15));

    tu::expect_error(hk::ErrorCode::InvalidArgument, [] {
        hk::euler_to_rotation(std::nan(""), 0, 0);
    });
}

TEST_CASE("grasp plan geometry") {
    hk::Rng rng(74);
    for (int i = 0; i < 20; ++i) {
        const Point3 target{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                            rng.uniform(0.1, 0.8)};
        const EulerAngles rpy{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double margin = rng.uniform(0.05, 0.2);
        const double offset = rng.uniform(0.0, 0.05);
        const hk::GraspPlan plan = grasp_plan(target, rpy, margin, offset);

        // The approach axis is the rotated tool z, unit length.
        const RigidTransform rot = hk::euler_to_rotation(rpy.roll, rpy.pitch, rpy.yaw);
        CHECK(tu::close(plan.approach_axis.x, rot.r[2], 1e-15));
        CHECK(tu::close(plan.approach_axis.y, rot.r[5], 1e-15));
        CHECK(tu::close(plan.approach_axis.z, rot.r[8], 1e-15));
        const double axis_len = dist(plan.approach_axis, Point3{0, 0, 0});
        CHECK(tu::close(axis_len, 1.0, 1e-12));

        CHECK(tu::close(dist(plan.grasp, plan.target), offset, 1e-12));
        CHECK(tu::close(dist(plan.pre_grasp, plan.target), margin, 1e-12));

        // Pre-grasp sits opposite the approach direction from the grasp.
        const double along = (plan.grasp.x - plan.pre_grasp.x) * plan.approach_axis.x +
                             (plan.grasp.y - plan.pre_grasp.y) * plan.approach_axis.y +
                             (plan.grasp.z - plan.pre_grasp.z) * plan.approach_axis.z;
        CHECK(tu::close(along, margin + offset, 1e-12));
    }

    // Defaults: 2 cm enclose offset, 10 cm safety margin.
    const hk::GraspPlan d = grasp_plan(Point3{0, 0, 0.5}, EulerAngles{});
    CHECK(d.enclose_offset == 0.02);
    CHECK(d.safety_margin == 0.10);
    CHECK(tu::close(dist(d.grasp, d.target), 0.02, 1e-15));
    CHECK(tu::close(dist(d.pre_grasp, d.target), 0.10, 1e-15));
    // Identity orientation approaches along +z.
    CHECK(tu::close(d.grasp.z, 0.52, 1e-15));
    CHECK(tu::close(d.pre_grasp.z, 0.40, 1e-15));

    tu::expect_error(hk::ErrorCode::InvalidArgument, [] {
        grasp_plan(Point3{}, EulerAngles{}, 0.0, 0.02);
    });
    tu::expect_error(hk::ErrorCode::InvalidArgument, [] {
        grasp_plan(Point3{}, EulerAngles{}, 0.1, -0.01);
    });
}

TEST_CASE("quintic profile boundary and interior values") {
    const double T = 2.0;
    const hk::QuinticSample start = hk::quintic_profile(0.0, T);
    CHECK(start.s == 0.0);
    CHECK(start.s_dot == 0.0);
    CHECK(start.s_ddot == 0.0);

    const hk::QuinticSample end = hk::quintic_profile(T, T);
    CHECK(end.s == 1.0);
    CHECK(end.s_dot == 0.0);
    CHECK(end.s_ddot == 0.0);

    const hk::QuinticSample mid = hk::quintic_profile(T / 2.0, T);
    CHECK(mid.s == 0.5);
    CHECK(tu::close(mid.s_dot, 1.875 / T, 1e-9));  // velocity peaks at midpoint
    CHECK(tu::close(mid.s_ddot, 0.0, 1e-12));

    // Monotone position, velocity nonnegative, profile symmetric about T/2.
    for (int k = 0; k <= 100; ++k) {
        const double t = T * k / 100.0;
        const hk::QuinticSample a = hk::quintic_profile(t, T);
        CHECK(a.s_dot >= -1e-15);
        CHECK(a.s_dot <= 1.875 / T + 1e-12);
        const hk::QuinticSample b = hk::quintic_profile(T - t, T);
        CHECK(tu::close(a.s, 1.0 - b.s, 1e-12));
        CHECK(tu::close(a.s_dot, b.s_dot, 1e-12));
    }

    tu::expect_error(hk::ErrorCode::InvalidArgument, [] { hk::quintic_profile(0.0, 0.0); });
    tu::expect_error(hk::ErrorCode::RangeError, [] { hk::quintic_profile(-0.1, 1.0); });
    tu::expect_error(hk::ErrorCode::RangeError, [] { hk::quintic_profile(1.1, 1.0); });
}

TEST_CASE("calibration text round trip") {
    hk::Rng rng(75);
    Calibration c;
    c.intrinsics = kCam;
    c.hand_eye = random_pose(rng);
    c.ee_to_base = random_pose(rng);

    const std::string text = calibration_to_text(c);
    const Calibration back = parse_calibration(text, "roundtrip");
    CHECK(tu::close(back.intrinsics.fx, c.intrinsics.fx, 1e-15));
    CHECK(tu::close(back.intrinsics.cy, c.intrinsics.cy, 1e-15));
    for (int k = 0; k < 9; ++k) {
        CHECK(back.hand_eye.r[static_cast<std::size_t>(k)] == c.hand_eye.r[static_cast<std::size_t>(k)]);
        CHECK(back.ee_to_base.r[static_cast<std::size_t>(k)] == c.ee_to_base.r[static_cast<std::size_t>(k)]);
    }
    for (int k = 0; k < 3; ++k) {
        CHECK(back.hand_eye.t[static_cast<std::size_t>(k)] == c.hand_eye.t[static_cast<std::size_t>(k)]);
    }

    tu::TempDir dir;
    const std::string path = dir.file("calib.txt");
    save_calibration(c, path);
    const Calibration loaded = load_calibration(path);
    CHECK(loaded.intrinsics.fx == c.intrinsics.fx);
}

TEST_CASE("calibration parser rejects malformed input") {
    tu::expect_error(hk::ErrorCode::ParseError, [] {
        parse_calibration("1 2 3 4\n", "t");  // data before any section
    });
    tu::expect_error(hk::ErrorCode::ParseError, [] {
        parse_calibration("[intrinsics]\n1 2 3\n", "t");  // wrong count
    });
    tu::expect_error(hk::ErrorCode::ParseError, [] {
        parse_calibration("[mystery]\n1\n", "t");
    });
    tu::expect_error(hk::ErrorCode::ParseError, [] {
        parse_calibration("[intrinsics\n1 2 3 4\n", "t");  // unterminated header
    });
    // A valid file needs all three sections.
    tu::expect_error(hk::ErrorCode::ParseError, [] {
        parse_calibration("[intrinsics]\n600 600 320 240\n", "t");
    });
    // Rotation entries must form a proper rotation.
    tu::expect_error(hk::ErrorCode::ValidationError, [] {
        parse_calibration(
            "[intrinsics]\n600 600 320 240\n"
            "[hand_eye]\n2 0 0 0 1 0 0 0 1 0 0 0\n"
            "[ee_to_base]\n1 0 0 0 1 0 0 0 1 0 0 0\n",
            "t");
    });
}

TEST_CASE("depth map reads millimeters and falls back to the window median") {
    hk::Image16 img;
    img.width = 7;
    img.height = 7;
    img.pixels.assign(49, 0);
    img.at(3, 3) = 1500;  // 1.5 m
    const hk::DepthMap direct(img);
    CHECK(direct.depth_at(3, 3) == 1.5);

    // A zero sample takes the median of valid neighbours in the 5x5 window.
    hk::Image16 img2;
    img2.width = 7;
    img2.height = 7;
    img2.pixels.assign(49, 0);
    img2.at(1, 1) = 800;
    img2.at(2, 1) = 1000;
    img2.at(1, 2) = 1200;
    const hk::DepthMap holey(img2);
    CHECK(holey.depth_at(3, 3) == 1.0);  // median of {800, 1000, 1200} mm

    // No valid sample anywhere nearby: an error, not a guess.
    hk::Image16 img3;
    img3.width = 7;
    img3.height = 7;
    img3.pixels.assign(49, 0);
    const hk::DepthMap empty(img3);
    tu::expect_error(hk::ErrorCode::InvalidDepth, [&] { empty.depth_at(3, 3); });
    tu::expect_error(hk::ErrorCode::RangeError, [&] { empty.depth_at(7, 3); });
    tu::expect_error(hk::ErrorCode::RangeError, [&] { empty.depth_at(-1, 0); });
}

TEST_CASE("depth PGM round trip through the 16-bit loader") {
    tu::TempDir dir;
    hk::Image16 img;
    img.width = 4;
    img.height = 3;
    img.pixels = {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000, 1100, 1200};
    const std::string path = dir.file("depth.pgm");
    hk::save_pgm16(img, path);
    const hk::DepthMap d = hk::load_depth_pgm(path);
    CHECK(d.width() == 4);
    CHECK(d.height() == 3);
    CHECK(d.depth_at(0, 0) == 0.1);
    CHECK(d.depth_at(3, 2) == 1.2);
}
