#include "splathand/binding.hpp"

#include <limits>

#include "splathand/errors.hpp"

namespace splathand {

namespace {
constexpr double kDegenerateThreshold = 1e-12;
}

FaceFrame face_frame(const Vec3& v0, const Vec3& v1, const Vec3& v2, int face_id) {
    const Vec3 a1 = v2 - v1;
    const Vec3 a2 = a1.cross(v0 - v1);
    const Vec3 a3 = a1.cross(a2);
    const Vec3 c = v0 - v2;
    if (a2.norm() < kDegenerateThreshold || c.norm() < kDegenerateThreshold) {
        throw DegenerateFaceError(face_id, "triangle is degenerate");
    }
    FaceFrame frame;
    frame.translation = (v0 + v1 + v2) / 3.0;
    frame.rotation.col(0) = a1.normalized();
    frame.rotation.col(1) = a2.normalized();
    frame.rotation.col(2) = a3.normalized();
    frame.scale = 0.5 * (a1.norm() + a2.norm() / c.norm());
    return frame;
}

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection).
static Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                                      const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    }

    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    return (p - closest_point_on_triangle(p, a, b, c)).norm();
}

BindingTable bind_gaussians(const GaussianSet& gaussians, const HandRig& rig) {
    gaussians.validate();
    if (rig.face_count() == 0) throw StructuralError("rig has no faces");

    const int k = gaussians.size();
    BindingTable table;
    table.face_index.resize(static_cast<size_t>(k));
    table.local_position.resize(static_cast<size_t>(k));
    table.local_orientation.resize(static_cast<size_t>(k));
    table.canonical_scale.resize(static_cast<size_t>(k));

    for (int i = 0; i < k; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_face = 0;
        for (int f = 0; f < rig.face_count(); ++f) {
            const auto& face = rig.faces[static_cast<size_t>(f)];
            const double d = point_triangle_distance(
                gaussians.positions[static_cast<size_t>(i)],
                rig.template_vertices[static_cast<size_t>(face[0])],
                rig.template_vertices[static_cast<size_t>(face[1])],
                rig.template_vertices[static_cast<size_t>(face[2])]);
            if (d < best) {
                best = d;
                best_face = f;
            }
        }
        const auto& face = rig.faces[static_cast<size_t>(best_face)];
        const FaceFrame frame = face_frame(rig.template_vertices[static_cast<size_t>(face[0])],
                                           rig.template_vertices[static_cast<size_t>(face[1])],
                                           rig.template_vertices[static_cast<size_t>(face[2])],
                                           best_face);
        table.face_index[static_cast<size_t>(i)] = best_face;
        table.local_position[static_cast<size_t>(i)] =
            frame.rotation.transpose() *
            (gaussians.positions[static_cast<size_t>(i)] - frame.translation) / frame.scale;
        // Conjugate (not matrix-transpose conversion) keeps quaternion signs
        // stable so the rest-pose round trip is exact.
        table.local_orientation[static_cast<size_t>(i)] =
            Quat(frame.rotation).conjugate() * gaussians.orientations[static_cast<size_t>(i)];
        table.local_orientation[static_cast<size_t>(i)].normalize();
        table.canonical_scale[static_cast<size_t>(i)] =
            gaussians.scales[static_cast<size_t>(i)] / frame.scale;
    }
    return table;
}

GaussianSet deform_gaussians(const BindingTable& binding,
                             const GaussianSet& rest_gaussians,
                             const std::vector<Vec3>& posed_vertices,
                             const std::vector<std::array<int, 3>>& faces) {
    const int k = binding.size();
    if (rest_gaussians.size() != k) {
        throw StructuralError("binding table does not match Gaussian count");
    }
    GaussianSet out;
    out.positions.resize(static_cast<size_t>(k));
    out.orientations.resize(static_cast<size_t>(k));
    out.scales.resize(static_cast<size_t>(k));
    out.opacities = rest_gaussians.opacities;
    out.colors = rest_gaussians.colors;

    for (int i = 0; i < k; ++i) {
        const int f = binding.face_index[static_cast<size_t>(i)];
        const auto& face = faces[static_cast<size_t>(f)];
        const FaceFrame frame = face_frame(posed_vertices[static_cast<size_t>(face[0])],
                                           posed_vertices[static_cast<size_t>(face[1])],
                                           posed_vertices[static_cast<size_t>(face[2])], f);
        out.positions[static_cast<size_t>(i)] =
            frame.translation +
            frame.scale * (frame.rotation * binding.local_position[static_cast<size_t>(i)]);
        out.orientations[static_cast<size_t>(i)] =
            Quat(frame.rotation) * binding.local_orientation[static_cast<size_t>(i)];
        out.orientations[static_cast<size_t>(i)].normalize();
        out.scales[static_cast<size_t>(i)] =
            frame.scale * binding.canonical_scale[static_cast<size_t>(i)];
    }
    return out;
}

GaussianSet compose_scene(const GaussianSet& hand, const GaussianSet& object) {
    GaussianSet scene = hand;
    scene.positions.insert(scene.positions.end(), object.positions.begin(),
                           object.positions.end());
    scene.orientations.insert(scene.orientations.end(), object.orientations.begin(),
                              object.orientations.end());
    scene.scales.insert(scene.scales.end(), object.scales.begin(), object.scales.end());
    scene.opacities.insert(scene.opacities.end(), object.opacities.begin(),
                           object.opacities.end());
    scene.colors.insert(scene.colors.end(), object.colors.begin(), object.colors.end());
    return scene;
}

std::vector<Vec3> deform_gaussians_backward(const BindingTable& binding,
                                            const std::vector<Vec3>& posed_vertices,
                                            const std::vector<std::array<int, 3>>& faces,
                                            const std::vector<Vec3>& d_positions,
                                            const std::vector<Mat3>& d_rotations,
                                            const std::vector<Vec3>& d_scales) {
    const size_t k = static_cast<size_t>(binding.size());
    if (d_positions.size() != k || d_rotations.size() != k || d_scales.size() != k) {
        throw StructuralError("cotangent lengths do not match binding table");
    }
    std::vector<Vec3> d_vertices(posed_vertices.size(), Vec3::Zero());

    for (size_t i = 0; i < k; ++i) {
        const int f = binding.face_index[i];
        const auto& face = faces[static_cast<size_t>(f)];
        const Vec3& v0 = posed_vertices[static_cast<size_t>(face[0])];
        const Vec3& v1 = posed_vertices[static_cast<size_t>(face[1])];
        const Vec3& v2 = posed_vertices[static_cast<size_t>(face[2])];

        const Vec3 a1 = v2 - v1;
        const Vec3 b = v0 - v1;
        const Vec3 a2 = a1.cross(b);
        const Vec3 a3 = a1.cross(a2);
        const Vec3 c = v0 - v2;
        const double na1 = a1.norm(), na2 = a2.norm(), na3 = a3.norm(), nc = c.norm();
        if (na2 < kDegenerateThreshold || nc < kDegenerateThreshold) {
            throw DegenerateFaceError(f, "triangle became degenerate during backward pass");
        }
        const Vec3 n1 = a1 / na1, n2 = a2 / na2, n3 = a3 / na3;
        Mat3 rot;
        rot.col(0) = n1;
        rot.col(1) = n2;
        rot.col(2) = n3;
        const double scale = 0.5 * (na1 + na2 / nc);

        const Vec3& p = binding.local_position[i];
        const Mat3 r_loc = binding.local_orientation[i].toRotationMatrix();
        const Vec3& dx = d_positions[i];

        // x_hat = T + k R p ; R_hat = R R_loc ; s_hat = k s0
        double dk = (rot.transpose() * dx).dot(p) +
                    d_scales[i].dot(binding.canonical_scale[i]);
        Mat3 d_rot = scale * dx * p.transpose() + d_rotations[i] * r_loc.transpose();
        const Vec3 dT = dx;

        // columns of R through normalization
        auto through_norm = [](const Vec3& n, double len, const Vec3& g) -> Vec3 {
            return (g - n * n.dot(g)) / len;
        };
        const Vec3 d_n1 = d_rot.col(0);
        const Vec3 d_n2 = d_rot.col(1);
        const Vec3 d_n3 = d_rot.col(2);

        Vec3 d_a3 = through_norm(n3, na3, d_n3);
        Vec3 d_a2 = through_norm(n2, na2, d_n2) + (0.5 * dk / nc) * n2 + d_a3.cross(a1);
        Vec3 d_a1 = through_norm(n1, na1, d_n1) + 0.5 * dk * n1 + a2.cross(d_a3);
        Vec3 d_b = d_a2.cross(a1);
        d_a1 += b.cross(d_a2);
        const Vec3 d_c = (-0.5 * dk * na2 / (nc * nc)) * (c / nc);

        d_vertices[static_cast<size_t>(face[0])] += dT / 3.0 + d_b + d_c;
        d_vertices[static_cast<size_t>(face[1])] += dT / 3.0 - d_a1 - d_b;
        d_vertices[static_cast<size_t>(face[2])] += dT / 3.0 + d_a1 - d_c;
    }
    return d_vertices;
}

}  // namespace splathand
