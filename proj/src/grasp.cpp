#include "splathand/grasp.hpp"

#include <cmath>
#include <limits>

#include "splathand/binding.hpp"
#include "splathand/errors.hpp"

namespace splathand {

namespace {

// van Oosterom & Strackee solid angle of triangle (a,b,c) seen from p.
double solid_angle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ra = a - p, rb = b - p, rc = c - p;
    const double la = ra.norm(), lb = rb.norm(), lc = rc.norm();
    const double num = ra.dot(rb.cross(rc));
    const double den = la * lb * lc + ra.dot(rb) * lc + rb.dot(rc) * la + rc.dot(ra) * lb;
    return 2.0 * std::atan2(num, den);
}

double winding_number(const Vec3& p, const TriangleMesh& mesh) {
    double total = 0.0;
    for (const auto& f : mesh.faces) {
        total += solid_angle(p, mesh.vertices[static_cast<size_t>(f[0])],
                             mesh.vertices[static_cast<size_t>(f[1])],
                             mesh.vertices[static_cast<size_t>(f[2])]);
    }
    return total / (4.0 * M_PI);
}

template <typename DistanceFn>
ContactReport build_report(const std::vector<Vec3>& posed_vertices, const HandRig& rig,
                           DistanceFn&& distance, double contact_eps, double penetration_limit,
                           bool penetration_known) {
    ContactReport report;
    report.penetration_known = penetration_known;
    int contact_count = 0;
    for (int f = 0; f < kNumFingers; ++f) {
        const auto& group = rig.fingertip_groups[static_cast<size_t>(f)];
        if (group.empty()) {
            throw ValidationError("fingertip group " + std::to_string(f) + " is empty");
        }
        double best = std::numeric_limits<double>::infinity();
        for (int idx : group) {
            best = std::min(best, distance(posed_vertices[static_cast<size_t>(idx)]));
        }
        report.min_distance[static_cast<size_t>(f)] = best;
        report.contacts[static_cast<size_t>(f)] = best <= contact_eps;
        if (report.contacts[static_cast<size_t>(f)]) ++contact_count;
        if (best < 0.0) report.max_penetration = std::max(report.max_penetration, -best);
    }
    report.success = contact_count >= 2 &&
                     (!penetration_known || report.max_penetration <= penetration_limit);
    return report;
}

}  // namespace

double signed_distance(const Vec3& p, const TriangleMesh& mesh) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : mesh.faces) {
        best = std::min(best, point_triangle_distance(
                                  p, mesh.vertices[static_cast<size_t>(f[0])],
                                  mesh.vertices[static_cast<size_t>(f[1])],
                                  mesh.vertices[static_cast<size_t>(f[2])]));
    }
    return winding_number(p, mesh) > 0.5 ? -best : best;
}

ContactReport finger_contacts(const std::vector<Vec3>& posed_vertices, const HandRig& rig,
                              const TriangleMesh& object, double contact_eps,
                              double penetration_limit) {
    if (object.faces.empty()) throw ValidationError("object mesh is empty");
    return build_report(
        posed_vertices, rig, [&](const Vec3& p) { return signed_distance(p, object); },
        contact_eps, penetration_limit, /*penetration_known=*/true);
}

ContactReport finger_contacts(const std::vector<Vec3>& posed_vertices, const HandRig& rig,
                              const std::vector<Vec3>& object_points, double contact_eps,
                              double penetration_limit) {
    if (object_points.empty()) throw ValidationError("object point set is empty");
    return build_report(
        posed_vertices, rig,
        [&](const Vec3& p) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec3& q : object_points) best = std::min(best, (p - q).norm());
            return best;
        },
        contact_eps, penetration_limit, /*penetration_known=*/false);
}

}  // namespace splathand
