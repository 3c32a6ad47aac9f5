#pragma once

#include <array>
#include <vector>

#include "splathand/gaussians.hpp"
#include "splathand/hand_rig.hpp"

namespace splathand {

/// Per-triangle rigid frame plus scalar scale, built from edge directions:
/// T_w = centroid; columns of R_w = normalized a1, a2, a3 with a1 = v2-v1,
/// a2 = a1 x (v0-v1), a3 = a1 x a2; k_w = (|a1| + |a2|/|v0-v2|) / 2.
struct FaceFrame {
    Vec3 translation;
    Mat3 rotation;
    double scale;
};

/// Static Gaussian-to-face assignment with canonical face-local coordinates.
/// Deforming with the rest pose reproduces the bound set exactly.
struct BindingTable {
    std::vector<int> face_index;
    std::vector<Vec3> local_position;       // (1/k) R^T (x - T), rest frame
    std::vector<Quat> local_orientation;    // R^T R_i, rest frame
    std::vector<Vec3> canonical_scale;      // scale / k, rest frame

    int size() const { return static_cast<int>(face_index.size()); }
};

/// face_id is used only for error reporting.
FaceFrame face_frame(const Vec3& v0, const Vec3& v1, const Vec3& v2, int face_id = -1);

/// Assigns each Gaussian to the nearest rest-pose face (point-to-triangle
/// distance, ties to the lowest index) and canonicalizes its parameters.
BindingTable bind_gaussians(const GaussianSet& gaussians, const HandRig& rig);

/// Carries bound Gaussians along with the deformed mesh. Opacity and color
/// pass through unchanged.
GaussianSet deform_gaussians(const BindingTable& binding,
                             const GaussianSet& rest_gaussians,
                             const std::vector<Vec3>& posed_vertices,
                             const std::vector<std::array<int, 3>>& faces);

/// Q_scene = Q_hand followed by Q_object.
GaussianSet compose_scene(const GaussianSet& hand, const GaussianSet& object);

/// Pulls Gaussian cotangents back to posed-vertex cotangents. Orientation
/// cotangents enter as rotation-matrix cotangents (dL/dR of the deformed
/// Gaussian's rotation matrix).
std::vector<Vec3> deform_gaussians_backward(const BindingTable& binding,
                                            const std::vector<Vec3>& posed_vertices,
                                            const std::vector<std::array<int, 3>>& faces,
                                            const std::vector<Vec3>& d_positions,
                                            const std::vector<Mat3>& d_rotations,
                                            const std::vector<Vec3>& d_scales);

/// Exhaustive point-to-triangle distance (also the contact oracle in tests).
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace splathand
