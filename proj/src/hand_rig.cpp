#include "splathand/hand_rig.hpp"

#include <numeric>

#include "splathand/errors.hpp"

namespace splathand {

HandPose HandPose::identity() {
    HandPose p;
    p.joint_rotations.fill(Mat3::Identity());
    return p;
}

void HandPose::validate(double tol) const {
    if (!is_rotation(global_rotation, tol)) {
        throw ValidationError("global_rotation is not orthonormal within tolerance");
    }
    for (int j = 0; j < kNumJoints; ++j) {
        if (!is_rotation(joint_rotations[j], tol)) {
            throw ValidationError("joint_rotations[" + std::to_string(j) +
                                  "] is not orthonormal within tolerance");
        }
    }
}

void HandRig::validate() const {
    const int n = vertex_count();
    if (parent_index[0] != kRootParent) {
        throw ValidationError("parent_index[0] must be the root sentinel (-1)");
    }
    for (int j = 1; j < kNumJoints; ++j) {
        if (parent_index[j] < 0 || parent_index[j] >= j) {
            throw ValidationError("parent_index[" + std::to_string(j) +
                                  "] must reference an earlier joint");
        }
    }
    for (const auto& f : faces) {
        for (int k = 0; k < 3; ++k) {
            if (f[k] < 0 || f[k] >= n) throw ValidationError("face index out of range");
        }
    }
    if (skinning_weights.rows() != n || skinning_weights.cols() != kNumJoints) {
        throw StructuralError("skinning_weights must be N x 21");
    }
    for (int i = 0; i < n; ++i) {
        if (skinning_weights.row(i).minCoeff() < 0.0) {
            throw ValidationError("skinning weight negative at vertex " + std::to_string(i));
        }
        if (std::abs(skinning_weights.row(i).sum() - 1.0) > 1e-6) {
            throw ValidationError("skinning weight row " + std::to_string(i) +
                                  " does not sum to 1");
        }
    }
    std::vector<char> seen(static_cast<size_t>(n), 0);
    for (const auto& group : fingertip_groups) {
        for (int idx : group) {
            if (idx < 0 || idx >= n) throw ValidationError("fingertip index out of range");
            if (seen[static_cast<size_t>(idx)]) {
                throw ValidationError("fingertip groups are not disjoint at vertex " +
                                      std::to_string(idx));
            }
            seen[static_cast<size_t>(idx)] = 1;
        }
    }
}

JointStates forward_kinematics(const HandRig& rig, const HandPose& pose) {
    pose.validate();

    Iso3 world = Iso3::Identity();
    world.linear() = pose.global_rotation;
    world.translation() = pose.translation;

    JointStates states;
    for (int j = 0; j < kNumJoints; ++j) {
        Iso3 local = Iso3::Identity();
        if (j == 0) {
            local.translation() = rig.rest_joint_positions[0];
            local.linear() = pose.joint_rotations[0];
            states.global_transforms[0] = world * local;
        } else {
            const int p = rig.parent_index[j];
            local.translation() = rig.rest_joint_positions[j] - rig.rest_joint_positions[p];
            local.linear() = pose.joint_rotations[j];
            states.global_transforms[j] = states.global_transforms[p] * local;
        }
        states.joint_positions[j] = states.global_transforms[j].translation();
    }
    return states;
}

std::vector<Vec3> skin_mesh(const HandRig& rig, const JointStates& states) {
    const int n = rig.vertex_count();
    if (rig.skinning_weights.rows() != n) {
        throw StructuralError("skinning weights do not match vertex count");
    }
    // A_j = G_j * inverse(rest G_j), rest G_j = Trans(rest_joint_positions[j]).
    std::array<Mat3, kNumJoints> rot;
    std::array<Vec3, kNumJoints> trans;
    for (int j = 0; j < kNumJoints; ++j) {
        rot[j] = states.global_transforms[j].linear();
        trans[j] = states.global_transforms[j].translation() - rot[j] * rig.rest_joint_positions[j];
    }
    std::vector<Vec3> posed(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Vec3 v = Vec3::Zero();
        for (int j = 0; j < kNumJoints; ++j) {
            const double w = rig.skinning_weights(i, j);
            if (w == 0.0) continue;
            v += w * (rot[j] * rig.template_vertices[static_cast<size_t>(i)] + trans[j]);
        }
        posed[static_cast<size_t>(i)] = v;
    }
    return posed;
}

Vec3 denormalize_translation(const Vec3& t_n, const NormStats& stats) {
    if (stats.std.minCoeff() <= 0.0) {
        throw ValidationError("normalization std must be positive componentwise");
    }
    return t_n.cwiseProduct(stats.std) + stats.mean;
}

Vec3 normalize_translation(const Vec3& t, const NormStats& stats) {
    if (stats.std.minCoeff() <= 0.0) {
        throw ValidationError("normalization std must be positive componentwise");
    }
    return (t - stats.mean).cwiseQuotient(stats.std);
}

std::array<Eigen::Matrix<double, 3, 4>, kNumJoints> skin_mesh_backward(
    const HandRig& rig, const JointStates& states, const std::vector<Vec3>& d_vertices) {
    const int n = rig.vertex_count();
    if (static_cast<int>(d_vertices.size()) != n) {
        throw StructuralError("vertex cotangent count does not match rig");
    }
    std::array<Eigen::Matrix<double, 3, 4>, kNumJoints> d_transforms;
    for (auto& m : d_transforms) m.setZero();
    // v' = sum_j w_ij (R_j (v_i - r_j) + t_j)
    for (int i = 0; i < n; ++i) {
        const Vec3& d = d_vertices[static_cast<size_t>(i)];
        for (int j = 0; j < kNumJoints; ++j) {
            const double w = rig.skinning_weights(i, j);
            if (w == 0.0) continue;
            const Vec3 rel = rig.template_vertices[static_cast<size_t>(i)] -
                             rig.rest_joint_positions[j];
            d_transforms[j].block<3, 3>(0, 0) += w * d * rel.transpose();
            d_transforms[j].col(3) += w * d;
        }
    }
    (void)states;
    return d_transforms;
}

PoseGradient forward_kinematics_backward(
    const HandRig& rig, const HandPose& pose, const JointStates& states,
    const std::array<Eigen::Matrix<double, 3, 4>, kNumJoints>& d_transforms) {
    // U_m = sum over the subtree of m of D_j * G_j^T (4x4, last row of D zero),
    // accumulated leaves-to-root.
    std::array<Mat4, kNumJoints> subtree_accum;
    std::array<Mat4, kNumJoints> g4;
    for (int j = 0; j < kNumJoints; ++j) {
        g4[j] = states.global_transforms[j].matrix();
        Mat4 d = Mat4::Zero();
        d.block<3, 4>(0, 0) = d_transforms[j];
        subtree_accum[j] = d * g4[j].transpose();
    }
    for (int j = kNumJoints - 1; j >= 1; --j) {
        subtree_accum[rig.parent_index[j]] += subtree_accum[j];
    }

    auto extract_skew = [](const Mat3& m) {
        return Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
    };

    PoseGradient grad;
    // Joint rotations, right tangent h_m * Exp([w]x): project the subtree
    // cotangent into the joint frame and take the skew part.
    for (int m = 0; m < kNumJoints; ++m) {
        const Mat4 x = g4[m].transpose() * subtree_accum[m] * g4[m].inverse().transpose();
        grad.d_joint_rotations[m] = extract_skew(x.block<3, 3>(0, 0));
    }
    // Global rotation, left tangent Exp([w]x) * Y about the wrist translation.
    Mat4 t_pos = Mat4::Identity();
    t_pos.block<3, 1>(0, 3) = pose.translation;
    Mat4 t_neg = Mat4::Identity();
    t_neg.block<3, 1>(0, 3) = -pose.translation;
    const Mat4 xg = t_pos.transpose() * subtree_accum[0] * t_neg.transpose();
    grad.d_global_rotation = extract_skew(xg.block<3, 3>(0, 0));
    // Translation adds directly to every global transform.
    for (int j = 0; j < kNumJoints; ++j) {
        grad.d_translation += d_transforms[j].col(3);
    }
    return grad;
}

}  // namespace splathand
