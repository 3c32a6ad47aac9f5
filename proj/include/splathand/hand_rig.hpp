#pragma once

#include <array>
#include <vector>

#include "splathand/geometry.hpp"

namespace splathand {

inline constexpr int kNumJoints = 21;
inline constexpr int kNumFingers = 5;
inline constexpr int kRootParent = -1;

/// Hand pose: global rotation, wrist translation, 21 parent-relative joint
/// rotations (entry 0 is the wrist/root).
struct HandPose {
    Mat3 global_rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    std::array<Mat3, kNumJoints> joint_rotations;

    static HandPose identity();
    void validate(double tol = 1e-6) const;
};

/// Skinned kinematic hand: template mesh, 21-joint tree, rest joints,
/// per-vertex skinning weights, fingertip vertex groups (thumb..pinky).
struct HandRig {
    std::vector<Vec3> template_vertices;
    std::vector<std::array<int, 3>> faces;
    std::array<int, kNumJoints> parent_index{};
    std::array<Vec3, kNumJoints> rest_joint_positions;
    Eigen::MatrixXd skinning_weights;  // N x 21, rows sum to 1
    std::array<std::vector<int>, kNumFingers> fingertip_groups;

    int vertex_count() const { return static_cast<int>(template_vertices.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }
    void validate() const;
};

struct JointStates {
    std::array<Iso3, kNumJoints> global_transforms;
    std::array<Vec3, kNumJoints> joint_positions;
};

/// Componentwise translation normalization statistics (sigma > 0).
struct NormStats {
    Vec3 mean = Vec3::Zero();
    Vec3 std = Vec3::Ones();
};

/// Posed global transform per joint. Root: Trans(t) * Rot(Y) * Trans(r0) * Rot(h0);
/// child j: G_parent * Trans(r_j - r_parent) * Rot(h_j). Bone lengths are fixed.
JointStates forward_kinematics(const HandRig& rig, const HandPose& pose);

/// Linear blend skinning: v' = sum_j w_ij * G_j * Grest_j^-1 * v. The rest
/// pose reproduces the template exactly.
std::vector<Vec3> skin_mesh(const HandRig& rig, const JointStates& states);

/// t_n * sigma + mu, componentwise.
Vec3 denormalize_translation(const Vec3& t_n, const NormStats& stats);
Vec3 normalize_translation(const Vec3& t, const NormStats& stats);

// --- reverse-mode support for pose refinement ---

/// Tangent-space pose gradient: axis-angle cotangents for the global rotation
/// (left perturbation Exp(w)*Y) and each joint rotation (right perturbation
/// h*Exp(w)), plus the translation cotangent.
struct PoseGradient {
    Vec3 d_global_rotation = Vec3::Zero();
    Vec3 d_translation = Vec3::Zero();
    std::array<Vec3, kNumJoints> d_joint_rotations;

    PoseGradient() { d_joint_rotations.fill(Vec3::Zero()); }
};

/// Pulls vertex cotangents back to per-joint global-transform cotangents
/// (3x4 top block of the 4x4). d_vertices must have one entry per vertex.
std::array<Eigen::Matrix<double, 3, 4>, kNumJoints> skin_mesh_backward(
    const HandRig& rig, const JointStates& states, const std::vector<Vec3>& d_vertices);

/// Pulls global-transform cotangents back to pose tangent coordinates.
PoseGradient forward_kinematics_backward(
    const HandRig& rig, const HandPose& pose, const JointStates& states,
    const std::array<Eigen::Matrix<double, 3, 4>, kNumJoints>& d_transforms);

}  // namespace splathand
