#pragma once

#include <random>

#include "splathand/camera.hpp"
#include "splathand/gaussians.hpp"
#include "splathand/grasp.hpp"
#include "splathand/hand_rig.hpp"

namespace splathand::testing {

/// Low-poly 21-joint hand: one octahedral prism per bone (120 vertices,
/// 160 faces), piecewise-blended skinning weights, 5-vertex fingertip groups.
HandRig make_test_rig();

/// Surface-sampled hand Gaussians on the rest-pose rig mesh.
GaussianSet sample_hand_gaussians(const HandRig& rig, int count, std::uint64_t seed,
                                  double scale_min = 2e-3, double scale_max = 4e-3);

/// A loose blob of Gaussians around `center` standing in for a rigid object.
GaussianSet make_object_gaussians(const Vec3& center, double radius, int count,
                                  std::uint64_t seed);

/// Icosahedron-based closed sphere mesh (subdivided once): 42 verts, 80 faces.
TriangleMesh make_sphere_mesh(const Vec3& center, double radius, int subdivisions = 1);

/// OpenCV-convention camera looking from eye toward target.
Camera make_lookat_camera(const Vec3& eye, const Vec3& target, int width, int height,
                          double focal);

Quat random_unit_quat(std::mt19937_64& rng);
Mat3 random_rotation(std::mt19937_64& rng, double max_angle_rad);
HandPose random_pose(std::mt19937_64& rng, double joint_angle_rad, double global_angle_rad,
                     double translation_m);

}  // namespace splathand::testing
