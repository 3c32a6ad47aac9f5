#pragma once

#include <array>
#include <vector>

#include "splathand/hand_rig.hpp"

namespace splathand {

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
};

/// Geometric grasp-success proxy: a grasp succeeds when at least two fingers
/// are within contact_eps of the object and no fingertip penetrates deeper
/// than penetration_limit.
struct ContactReport {
    std::array<bool, kNumFingers> contacts{};       // thumb..pinky
    std::array<double, kNumFingers> min_distance{}; // signed; negative = inside
    double max_penetration = 0.0;
    bool penetration_known = true;  // false for point-set objects
    bool success = false;
};

/// Signed distance to a closed triangle mesh: unsigned point-to-triangle
/// minimum, negated inside (generalized winding number > 1/2).
double signed_distance(const Vec3& p, const TriangleMesh& mesh);

ContactReport finger_contacts(const std::vector<Vec3>& posed_vertices, const HandRig& rig,
                              const TriangleMesh& object, double contact_eps,
                              double penetration_limit);

/// Point-set variant: distances are unsigned and penetration is not
/// computable, so success reduces to the two-finger contact test.
ContactReport finger_contacts(const std::vector<Vec3>& posed_vertices, const HandRig& rig,
                              const std::vector<Vec3>& object_points, double contact_eps,
                              double penetration_limit);

}  // namespace splathand
