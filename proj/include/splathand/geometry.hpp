#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace splathand {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;
using Iso3 = Eigen::Isometry3d;

inline Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0, -v.z(), v.y(),
         v.z(), 0, -v.x(),
         -v.y(), v.x(), 0;
    return m;
}

// Rodrigues exponential map, axis-angle vector -> rotation matrix.
inline Mat3 exp_so3(const Vec3& omega) {
    const double theta = omega.norm();
    if (theta < 1e-12) {
        return Mat3::Identity() + skew(omega);
    }
    const Vec3 axis = omega / theta;
    return Eigen::AngleAxisd(theta, axis).toRotationMatrix();
}

// Nearest proper rotation by SVD projection.
inline Mat3 orthonormalize(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        Mat3 flip = Mat3::Identity();
        flip(2, 2) = -1.0;
        r = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    return r;
}

inline bool is_rotation(const Mat3& m, double tol) {
    return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(m.determinant() - 1.0) <= tol;
}

// Angle in radians between two rotations.
inline double rotation_angle(const Mat3& a, const Mat3& b) {
    const double c = ((a.transpose() * b).trace() - 1.0) * 0.5;
    return std::acos(std::clamp(c, -1.0, 1.0));
}

// Quaternion stored (w, x, y, z).
inline Vec4 quat_coeffs_wxyz(const Quat& q) { return Vec4(q.w(), q.x(), q.y(), q.z()); }

inline Quat quat_from_wxyz(const Vec4& v) { return Quat(v[0], v[1], v[2], v[3]); }

// Rotation matrix of the standard unit-quaternion formula, evaluated at
// possibly non-unit coefficients (needed for differentiating through the
// normalization explicitly).
inline Mat3 quat_formula_matrix(double w, double x, double y, double z) {
    Mat3 r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

// d R / d q_k for the formula above, k in {w,x,y,z}.
inline std::array<Mat3, 4> quat_formula_jacobian(double w, double x, double y, double z) {
    std::array<Mat3, 4> d;
    d[0] << 0, -z, y,
            z, 0, -x,
            -y, x, 0;
    d[1] << 0, y, z,
            y, -2 * x, -w,
            z, w, -2 * x;
    d[2] << -2 * y, x, w,
            x, 0, z,
            -w, z, -2 * y;
    d[3] << -2 * z, -w, x,
            w, -2 * z, y,
            x, y, 0;
    for (auto& m : d) m *= 2.0;
    return d;
}

}  // namespace splathand
