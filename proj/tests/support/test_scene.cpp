#include "test_scene.hpp"

#include <map>

namespace splathand::testing {

namespace {

// Two unit vectors perpendicular to d.
std::pair<Vec3, Vec3> perpendicular_pair(const Vec3& d) {
    const Vec3 axis = std::abs(d.normalized().z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    const Vec3 u = d.cross(axis).normalized();
    return {u, d.cross(u).normalized()};
}

}  // namespace

HandRig make_test_rig() {
    HandRig rig;
    rig.parent_index[0] = kRootParent;
    rig.rest_joint_positions[0] = Vec3::Zero();

    // Finger 0 is the thumb, splayed sideways; fingers 1..4 run along +y.
    const std::array<Vec3, kNumFingers> base = {
        Vec3(-0.045, 0.020, 0.0), Vec3(-0.020, 0.045, 0.0), Vec3(0.000, 0.048, 0.0),
        Vec3(0.020, 0.045, 0.0), Vec3(0.040, 0.040, 0.0)};
    const std::array<Vec3, kNumFingers> dir = {
        Vec3(-0.55, 0.83, 0.0).normalized(), Vec3(0, 1, 0), Vec3(0, 1, 0), Vec3(0, 1, 0),
        Vec3(0, 1, 0)};
    const std::array<double, 3> seg_len = {0.025, 0.020, 0.015};

    for (int f = 0; f < kNumFingers; ++f) {
        const int j0 = 1 + 4 * f;
        rig.parent_index[static_cast<size_t>(j0)] = 0;
        rig.rest_joint_positions[static_cast<size_t>(j0)] = base[static_cast<size_t>(f)];
        for (int k = 1; k < 4; ++k) {
            rig.parent_index[static_cast<size_t>(j0 + k)] = j0 + k - 1;
            rig.rest_joint_positions[static_cast<size_t>(j0 + k)] =
                rig.rest_joint_positions[static_cast<size_t>(j0 + k - 1)] +
                seg_len[static_cast<size_t>(k - 1)] * dir[static_cast<size_t>(f)];
        }
    }

    // One octahedral prism per bone: parent-end vertex, joint-end vertex,
    // four mid-ring vertices, eight faces.
    std::vector<Eigen::VectorXd> weight_rows;
    const double ring_radius = 6e-3;
    auto add_weight = [&](int joint_a, double wa, int joint_b, double wb) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(kNumJoints);
        row[joint_a] += wa;
        row[joint_b] += wb;
        weight_rows.push_back(row);
    };

    for (int j = 1; j < kNumJoints; ++j) {
        const int p = rig.parent_index[static_cast<size_t>(j)];
        const Vec3 a = rig.rest_joint_positions[static_cast<size_t>(p)];
        const Vec3 b = rig.rest_joint_positions[static_cast<size_t>(j)];
        const Vec3 mid = 0.5 * (a + b);
        const auto [u, v] = perpendicular_pair((b - a).normalized());

        const int base_idx = static_cast<int>(rig.template_vertices.size());
        rig.template_vertices.push_back(a);
        add_weight(p, 1.0, p, 0.0);
        rig.template_vertices.push_back(b);
        add_weight(j, 1.0, j, 0.0);
        const std::array<Vec3, 4> ring = {mid + ring_radius * u, mid + ring_radius * v,
                                          mid - ring_radius * u, mid - ring_radius * v};
        for (const Vec3& rv : ring) {
            rig.template_vertices.push_back(rv);
            add_weight(p, 0.5, j, 0.5);
        }
        for (int k = 0; k < 4; ++k) {
            const int r0 = base_idx + 2 + k;
            const int r1 = base_idx + 2 + (k + 1) % 4;
            rig.faces.push_back({base_idx, r0, r1});
            rig.faces.push_back({base_idx + 1, r1, r0});
        }
        // fingertip bone: tip vertex plus its ring
        if (j % 4 == 0) {
            const int finger = (j - 1) / 4;
            auto& group = rig.fingertip_groups[static_cast<size_t>(finger)];
            group.push_back(base_idx + 1);
            for (int k = 0; k < 4; ++k) group.push_back(base_idx + 2 + k);
        }
    }

    rig.skinning_weights.resize(static_cast<int>(weight_rows.size()), kNumJoints);
    for (size_t i = 0; i < weight_rows.size(); ++i) {
        rig.skinning_weights.row(static_cast<int>(i)) = weight_rows[i];
    }
    rig.validate();
    return rig;
}

Quat random_unit_quat(std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Quat q(normal(rng), normal(rng), normal(rng), normal(rng));
    q.normalize();
    return q;
}

Mat3 random_rotation(std::mt19937_64& rng, double max_angle_rad) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> angle(-max_angle_rad, max_angle_rad);
    Vec3 axis(normal(rng), normal(rng), normal(rng));
    return Eigen::AngleAxisd(angle(rng), axis.normalized()).toRotationMatrix();
}

HandPose random_pose(std::mt19937_64& rng, double joint_angle_rad, double global_angle_rad,
                     double translation_m) {
    std::uniform_real_distribution<double> shift(-translation_m, translation_m);
    HandPose pose = HandPose::identity();
    pose.global_rotation = random_rotation(rng, global_angle_rad);
    pose.translation = Vec3(shift(rng), shift(rng), shift(rng));
    for (auto& r : pose.joint_rotations) r = random_rotation(rng, joint_angle_rad);
    return pose;
}

GaussianSet sample_hand_gaussians(const HandRig& rig, int count, std::uint64_t seed,
                                  double scale_min, double scale_max) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> face_pick(0, rig.face_count() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> scale_dist(scale_min, scale_max);
    std::uniform_real_distribution<double> opacity_dist(0.3, 0.8);

    GaussianSet set;
    for (int i = 0; i < count; ++i) {
        const auto& face = rig.faces[static_cast<size_t>(face_pick(rng))];
        double b0 = unit(rng), b1 = unit(rng);
        if (b0 + b1 > 1.0) {
            b0 = 1.0 - b0;
            b1 = 1.0 - b1;
        }
        const Vec3 p = b0 * rig.template_vertices[static_cast<size_t>(face[0])] +
                       b1 * rig.template_vertices[static_cast<size_t>(face[1])] +
                       (1.0 - b0 - b1) * rig.template_vertices[static_cast<size_t>(face[2])];
        set.positions.push_back(p);
        set.orientations.push_back(random_unit_quat(rng));
        set.scales.push_back(Vec3(scale_dist(rng), scale_dist(rng), scale_dist(rng)));
        set.opacities.push_back(opacity_dist(rng));
        set.colors.push_back(Vec3(unit(rng), unit(rng), unit(rng)));
    }
    return set;
}

GaussianSet make_object_gaussians(const Vec3& center, double radius, int count,
                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    GaussianSet set;
    for (int i = 0; i < count; ++i) {
        Vec3 d(normal(rng), normal(rng), normal(rng));
        set.positions.push_back(center + radius * d.normalized() * std::cbrt(unit(rng)));
        set.orientations.push_back(random_unit_quat(rng));
        const double s = radius * (0.1 + 0.15 * unit(rng));
        set.scales.push_back(Vec3(s, s, s));
        set.opacities.push_back(0.3 + 0.5 * unit(rng));
        set.colors.push_back(Vec3(unit(rng), unit(rng), unit(rng)));
    }
    return set;
}

TriangleMesh make_sphere_mesh(const Vec3& center, double radius, int subdivisions) {
    // icosahedron
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                               {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                               {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : verts) v.normalize();
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},
        {5, 11, 4}, {11, 10, 2}, {10, 7, 6},  {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
        {3, 2, 6},  {3, 6, 8},   {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10},
        {8, 6, 7},  {9, 8, 1}};

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            const auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = static_cast<int>(verts.size());
            verts.push_back(
                (verts[static_cast<size_t>(a)] + verts[static_cast<size_t>(b)]).normalized());
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        for (const auto& f : faces) {
            const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    TriangleMesh mesh;
    for (const Vec3& v : verts) mesh.vertices.push_back(center + radius * v);
    mesh.faces = std::move(faces);
    return mesh;
}

Camera make_lookat_camera(const Vec3& eye, const Vec3& target, int width, int height,
                          double focal) {
    const Vec3 forward = (target - eye).normalized();
    const Vec3 up_hint = std::abs(forward.z()) > 0.95 ? Vec3::UnitY() : Vec3::UnitZ();
    const Vec3 right = forward.cross(up_hint).normalized();
    const Vec3 down = forward.cross(right).normalized();
    Mat3 cam_to_world;
    cam_to_world.col(0) = right;
    cam_to_world.col(1) = down;
    cam_to_world.col(2) = forward;

    Camera cam;
    cam.rotation = cam_to_world.transpose();
    cam.translation = -cam.rotation * eye;
    cam.fx = cam.fy = focal;
    cam.cx = (width - 1) / 2.0;
    cam.cy = (height - 1) / 2.0;
    cam.width = width;
    cam.height = height;
    cam.near_clip = 0.01;
    return cam;
}

}  // namespace splathand::testing
