#pragma once

#include <cstdint>
#include <vector>

#include "splathand/binding.hpp"
#include "splathand/camera.hpp"
#include "splathand/gaussians.hpp"
#include "splathand/image.hpp"
#include "splathand/rasterizer.hpp"

namespace splathand {

/// A fixed set of cameras, each paired with a target image of the grasp.
struct ViewpointSet {
    std::vector<Camera> cameras;
    std::vector<Image> targets;
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(cameras.size()); }
    void validate() const;
};

struct RefineConfig {
    int max_iterations = 300;
    double lr_rotation = 1e-2;     // radians, axis-angle tangent
    double lr_translation = 1e-3;  // meters
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double convergence_tol = 1e-6;
    int convergence_window = 20;
    double lr_decay_floor = 0.02;  // converged once plateau-halved lr drops below this fraction
    double lambda_1 = 0.8;
    Vec3 background = Vec3::Zero();
    RasterConfig raster;

    void validate() const;
};

struct RefineReport {
    HandPose final_pose;
    std::vector<double> loss_trace;
    std::vector<double> per_view_loss;
    int iterations_used = 0;
    bool converged = false;
    bool diverged = false;
    int skipped_iterations = 0;  // degenerate posed face, update rolled back
};

/// Deterministic pseudo-random view selection, uniform over the set,
/// keyed by (set.seed, iteration).
int sample_viewpoint(const ViewpointSet& set, int iteration);

/// Analysis-by-synthesis grasp refinement: gradient descent on the pose
/// tangent through deform -> compose -> render against the target images.
/// hand_rest is the bound rest-pose hand Gaussian set (opacity/color source).
RefineReport refine_pose(const HandPose& init, const HandRig& rig, const BindingTable& binding,
                         const GaussianSet& hand_rest, const GaussianSet& object,
                         const ViewpointSet& views, const RefineConfig& config);

}  // namespace splathand
