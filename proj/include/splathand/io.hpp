#pragma once

#include <string>

#include "splathand/binding.hpp"
#include "splathand/gaussians.hpp"
#include "splathand/grasp.hpp"
#include "splathand/hand_rig.hpp"
#include "splathand/image.hpp"
#include "splathand/losses.hpp"
#include "splathand/refiner.hpp"

namespace splathand {

/// Gaussian-splat PLY (binary little-endian, 3DGS property convention):
/// x,y,z; f_dc_0..2 (SH DC); opacity (logit); scale_0..2 (log); rot_0..3
/// (quaternion wxyz, unnormalized). f_rest_* and other extras are ignored.
GaussianSet load_gaussian_ply(const std::string& path);
void save_gaussian_ply(const GaussianSet& set, const std::string& path);

/// Hand rig as a JSON document; the mesh may be inlined or referenced as an
/// OBJ path relative to the rig file. Weight rows off by <= 1e-4 are
/// renormalized with a warning; all other violations reject.
HandRig load_rig(const std::string& path);
void save_rig(const HandRig& rig, const std::string& path);

TriangleMesh load_obj(const std::string& path);
void save_obj(const TriangleMesh& mesh, const std::string& path);

HandPose load_pose(const std::string& path);
void save_pose(const HandPose& pose, const std::string& path);

/// Cameras as intrinsics plus a row-major 4x4 world-to-camera matrix, each
/// optionally paired with a target image path. require_images controls
/// whether a missing pairing is an error.
ViewpointSet load_viewpoints(const std::string& path, bool require_images = true);

/// ASCII PPM (P3), 8-bit, linear mapping to [0,1].
Image load_image(const std::string& path);
void save_image(const Image& image, const std::string& path);

/// Versioned binary container for a BindingTable; fails fast on a
/// Gaussian/face-count mismatch.
void save_binding(const BindingTable& table, int rig_face_count, const std::string& path);
BindingTable load_binding(const std::string& path, int expected_face_count,
                          int expected_gaussian_count);

HandState load_hand_state(const std::string& path);
void save_hand_state(const HandState& state, const std::string& path);

struct ProjectConfig {
    std::string rig_path;
    std::string hand_ply_path;
    std::string object_ply_path;  // may be empty (no object)
    std::string viewpoints_path;
    LossWeights weights;
    RefineConfig refine;
    double contact_eps = 0.005;
    double penetration_limit = 0.002;
    std::uint64_t seed = 0;
};

ProjectConfig load_project_config(const std::string& path);

std::string report_to_json(const RefineReport& report);
std::string report_to_json(const ContactReport& report);
std::string breakdown_to_json(const LossBreakdown& breakdown);

/// Heatmap stack as JSON: {"maps": 21 x T x E nested arrays, "beta": 21
/// scalars or one shared scalar}.
HeatmapStack load_heatmaps(const std::string& path);

}  // namespace splathand
