#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "igeb/presets.hpp"
#include "igeb/reconstruct.hpp"
#include "oracles.hpp"

using namespace igeb;

namespace {

// Reduced state whose internal forces reproduce the helical strains at every
// node; velocities zero.
VecX helix_force_state(const BeamParameters& p, const Mesh& mesh) {
  VecX y = VecX::Zero(mesh.reduced_dof_count());
  for (int a = 0; a < mesh.node_count(); ++a) {
    const Vec6 z = helix_internal_forces(p, mesh.node_x(a));
    y.segment<6>(a == 0 ? 0 : 12 * a) = z;
  }
  return y;
}

double helix_space_error(int elements) {
  const BeamParameters p = unit_beam();
  const Mesh mesh{p.length, elements};
  const AssembledSystem sys = assemble(p, mesh, Mat6::Zero());
  const std::vector<Frame> frames = reconstruct_space(
      sys, helix_force_state(p, mesh), helix_position(0.0), helix_rotation(0.0));
  double err = 0.0;
  for (int a = 0; a < mesh.node_count(); ++a) {
    const double x = mesh.node_x(a);
    err = std::max(err, (frames[a].p - helix_position(x)).norm());
    err = std::max(err, (frames[a].R() - helix_rotation(x)).norm());
  }
  return err;
}

}  // namespace

TEST_CASE("rotation/quaternion charts invert each other", "[reconstruct]") {
  std::mt19937 rng(131);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 axis(g(rng), g(rng), g(rng));
    const Mat3 r = oracle::rodrigues(axis, angle(rng));
    const Quaternion q = rot_to_quat(r);
    REQUIRE(q.w >= 0.0);
    REQUIRE(std::abs(q.norm() - 1.0) < 1e-14);
    REQUIRE((quat_to_rot(q) - r).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("half-turn rotations use the first-nonzero-positive convention",
          "[reconstruct]") {
  // About z: q = (0, 0, 0, 1).
  const Quaternion qz = rot_to_quat(oracle::rodrigues(Vec3(0, 0, 1), M_PI));
  REQUIRE(std::abs(qz.w) < 1e-12);
  REQUIRE(qz.v.z() == Catch::Approx(1.0).margin(1e-12));
  // About (1, 1, 0): the first nonzero vector component is positive.
  const Quaternion qd =
      rot_to_quat(oracle::rodrigues(Vec3(1, 1, 0), M_PI));
  REQUIRE(std::abs(qd.w) < 1e-12);
  REQUIRE(qd.v.x() == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
  REQUIRE(qd.v.y() == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
}

TEST_CASE("chart guards reject non-rotations and non-unit quaternions",
          "[reconstruct]") {
  REQUIRE_THROWS_AS(rot_to_quat(2.0 * Mat3::Identity()), ParameterError);
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1.0;  // orthogonal but orientation-reversing
  REQUIRE_THROWS_AS(rot_to_quat(reflect), ParameterError);
  Quaternion big;
  big.w = 2.0;
  REQUIRE_THROWS_AS(quat_to_rot(big), ParameterError);
}

TEST_CASE("Cayley update: exact norm, exact axis, atan-compressed angle",
          "[reconstruct]") {
  std::mt19937 rng(141);
  std::normal_distribution<double> g(0.0, 1.0);

  // Norm preservation over a long accumulation of random rates.
  Quaternion q;
  for (int k = 0; k < 1000; ++k) {
    const Vec3 w0(g(rng), g(rng), g(rng));
    const Vec3 w1(g(rng), g(rng), g(rng));
    q = advance_quaternion(q, w0, w1, 0.05);
    REQUIRE(std::abs(q.norm() - 1.0) < 1e-13);
  }

  // Constant rate w: one update rotates about w by exactly 4 atan(h|w|/4).
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 w(g(rng), g(rng), g(rng));
    const double h = 0.1 + 0.2 * std::abs(g(rng));
    Quaternion start;
    start.v = Vec3(g(rng), g(rng), g(rng));
    start.w = g(rng);
    const double n = start.norm();
    start.w /= n;
    start.v /= n;

    const Quaternion next = advance_quaternion(start, w, w, h);
    const double theta = 4.0 * std::atan(0.25 * h * w.norm());
    // The rate is given in the moving frame, so the increment composes on
    // the body side of the start rotation.
    const Mat3 expect = quat_to_rot(start) * oracle::rodrigues(w, theta);
    REQUIRE((quat_to_rot(next) - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("a strain-free state reconstructs a straight untwisted line",
          "[reconstruct]") {
  const BeamParameters p = unit_beam();
  const Mesh mesh{p.length, 5};
  const AssembledSystem sys = assemble(p, mesh, Mat6::Zero());
  const std::vector<Frame> frames =
      reconstruct_space(sys, VecX::Zero(sys.dof_count), Vec3(1.0, 2.0, 3.0),
                        Mat3::Identity());
  for (int a = 0; a < mesh.node_count(); ++a) {
    const Vec3 expect = Vec3(1.0, 2.0, 3.0) + mesh.node_x(a) * Vec3::UnitX();
    REQUIRE((frames[a].p - expect).norm() < 1e-13);
    REQUIRE((frames[a].R() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("space marching recovers the helix at second order",
          "[reconstruct]") {
  const double e20 = helix_space_error(20);
  const double e10 = helix_space_error(10);
  REQUIRE(e20 < 5e-4);
  REQUIRE(e10 / e20 > 3.5);
  REQUIRE(e10 / e20 < 4.5);
}

TEST_CASE("a zero trajectory keeps every frame fixed in time",
          "[reconstruct]") {
  const BeamParameters p = hesse2012();
  const Mesh mesh{p.length, 2};
  const TimeGrid grid{0.1, 6};
  Trajectory traj;
  traj.grid = grid;
  traj.system = std::make_shared<AssembledSystem>(
      assemble(p, mesh, Mat6::Zero()));
  traj.states.assign(grid.steps, VecX::Zero(mesh.reduced_dof_count()));

  std::vector<Vec3> p0;
  std::vector<Mat3> R0;
  for (int a = 0; a < mesh.node_count(); ++a) {
    p0.push_back(helix_position(mesh.node_x(a)));
    R0.push_back(helix_rotation(mesh.node_x(a)));
  }
  const FrameField field = reconstruct_time(traj, p0, R0, mesh, grid);
  for (int a = 0; a < mesh.node_count(); ++a)
    for (int k = 0; k < grid.steps; ++k) {
      REQUIRE((field.at(a, k).p - p0[a]).norm() == 0.0);
      REQUIRE((field.at(a, k).q.coeffs() - field.at(a, 0).q.coeffs()).norm() ==
              0.0);
    }
}

TEST_CASE("constant spin integrates to the accumulated Cayley angle",
          "[reconstruct]") {
  const BeamParameters p = unit_beam();
  const Mesh mesh{p.length, 2};
  const TimeGrid grid{1.0, 101};
  const double omega = 5.0;

  VecX y = VecX::Zero(mesh.reduced_dof_count());
  for (int a = 1; a < mesh.node_count(); ++a) y(12 * a - 6 + 5) = omega;

  Trajectory traj;
  traj.grid = grid;
  traj.system = std::make_shared<AssembledSystem>(
      assemble(p, mesh, Mat6::Zero()));
  traj.states.assign(grid.steps, y);

  std::vector<Vec3> p0(mesh.node_count(), Vec3::Zero());
  std::vector<Mat3> R0(mesh.node_count(), Mat3::Identity());
  const FrameField field = reconstruct_time(traj, p0, R0, mesh, grid);

  const double theta =
      (grid.steps - 1) * 4.0 * std::atan(0.25 * grid.h() * omega);
  const Mat3 expect = oracle::rodrigues(Vec3(0, 0, 1), theta);
  for (int a = 1; a < mesh.node_count(); ++a) {
    REQUIRE((field.at(a, grid.steps - 1).R() - expect).cwiseAbs().maxCoeff() <
            1e-10);
    // Zero linear velocity: the centerline point never moves.
    REQUIRE(field.at(a, grid.steps - 1).p.norm() == 0.0);
  }
  // The clamped node reads zero velocities and stays put entirely.
  REQUIRE((field.at(0, grid.steps - 1).R() - Mat3::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-14);

  // Past a half turn the stored quaternions follow the continuous branch
  // (negative scalar part) instead of flipping back to the canonical sign.
  REQUIRE(field.at(1, grid.steps - 1).q.w < 0.0);
  for (int k = 0; k + 1 < grid.steps; ++k)
    REQUIRE(field.at(1, k).q.dot(field.at(1, k + 1).q) >= 0.0);
}

TEST_CASE("frame fields index step-major and compare shape-safely",
          "[reconstruct]") {
  FrameField f(3, 2);
  f.at(2, 1).p = Vec3(1, 2, 3);
  REQUIRE((f.data[static_cast<size_t>(1) * 3 + 2].p - Vec3(1, 2, 3)).norm() ==
          0.0);

  FrameField g(3, 2);
  const auto [dp, dr] = frame_field_difference(f, g);
  REQUIRE(dp == Catch::Approx(std::sqrt(14.0)));
  REQUIRE(dr == 0.0);
  const FrameField h(2, 2);
  REQUIRE_THROWS_AS(frame_field_difference(f, h), ShapeError);
}

TEST_CASE("time and space marches agree on a short free vibration",
          "[reconstruct]") {
  const BeamParameters p = hesse2012();
  const Mesh mesh{p.length, 4};
  const TimeGrid grid{0.2, 21};
  const Trajectory traj = simulate(p, mesh, grid, Mat6::Zero(),
                                   helix_force_state(p, mesh));

  std::vector<Vec3> p0;
  std::vector<Mat3> R0;
  for (int a = 0; a < mesh.node_count(); ++a) {
    p0.push_back(helix_position(mesh.node_x(a)));
    R0.push_back(helix_rotation(mesh.node_x(a)));
  }
  const FrameField in_time = reconstruct_time(traj, p0, R0, mesh, grid);
  const FrameField in_space =
      reconstruct_space_all(traj, helix_position(0.0), helix_rotation(0.0));

  // At t = 0 the space march reproduces the helix up to its O(dx^2) error.
  for (int a = 0; a < mesh.node_count(); ++a)
    REQUIRE((in_space.at(a, 0).p - p0[a]).norm() < 5e-3);

  const auto [dp, dr] = frame_field_difference(in_time, in_space);
  REQUIRE(dp < 0.2);
  REQUIRE(dr < 0.5);

  REQUIRE_THROWS_AS(
      reconstruct_time(traj, std::vector<Vec3>(2), std::vector<Mat3>(2), mesh,
                       grid),
      ShapeError);
  REQUIRE_THROWS_AS(
      reconstruct_space(*traj.system, VecX::Zero(5), Vec3::Zero(),
                        Mat3::Identity()),
      ShapeError);
}
