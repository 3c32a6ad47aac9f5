#pragma once

#include <vector>

#include "splathand/camera.hpp"
#include "splathand/gaussians.hpp"
#include "splathand/image.hpp"

namespace splathand {

/// Rendering constants, following common splatting practice.
struct RasterConfig {
    double blur_floor = 0.3;        // px^2 added to the projected covariance
    double alpha_clamp = 0.99;      // per-fragment alpha ceiling
    double alpha_floor = 1.0 / 255; // fragments below this are skipped
    double sigma_cutoff = 3.0;      // splat influence truncated at this many sigma
};

struct RenderedImage {
    Image pixels;
    std::vector<double> alpha;  // height * width

    double alpha_at(int row, int col) const {
        return alpha[static_cast<size_t>(row) * pixels.width + col];
    }
};

/// Per-Gaussian projection record kept for the backward pass.
struct ProjectedSplat {
    bool visible = false;
    Vec2 mean2d = Vec2::Zero();
    Mat2 cov = Mat2::Zero();
    Mat2 inv_cov = Mat2::Zero();
    double depth = 0.0;
    double radius = 0.0;
    // intermediates reused by the backward pass
    Vec3 view_mean = Vec3::Zero();
    Mat3 sigma3 = Mat3::Zero();
    Eigen::Matrix<double, 2, 3> proj = Eigen::Matrix<double, 2, 3>::Zero();
};

/// Opaque record tying a backward pass to its forward call.
struct RenderAux {
    std::vector<ProjectedSplat> splats;
    std::vector<int> sorted_order;  // visible splats, depth ascending, ties by index
    Vec3 background = Vec3::Zero();
    int skipped_degenerate = 0;     // splats dropped for non-invertible 2D covariance
    RasterConfig config;
};

struct RenderGradients {
    std::vector<Vec3> d_positions;
    std::vector<Vec4> d_orientations;  // quaternion cotangent, (w,x,y,z)
    std::vector<Vec3> d_scales;
    std::vector<double> d_opacities;
    std::vector<Vec3> d_colors;
    std::vector<Mat3> d_rotations;     // rotation-matrix cotangent, for chaining
};

struct ProjectionResult {
    bool culled = false;  // behind the near plane
    Vec2 mean2d = Vec2::Zero();
    Mat2 cov2d = Mat2::Zero();
    double depth = 0.0;
};

/// EWA perspective projection of one Gaussian: cov2d = J W Sigma3 W^T J^T
/// plus the blur floor, with J the projection Jacobian at the view-space mean.
ProjectionResult project_gaussian(const Vec3& mean, const Quat& orientation,
                                  const Vec3& scale, const Camera& camera,
                                  const RasterConfig& config = {});

/// Depth-sorted front-to-back alpha compositing over the background color.
std::pair<RenderedImage, RenderAux> render(const GaussianSet& scene, const Camera& camera,
                                           const Vec3& background,
                                           const RasterConfig& config = {});

/// Exact reverse-mode gradients of render() w.r.t. all Gaussian parameters.
/// Culled and skipped splats get zero gradients.
RenderGradients render_backward(const RenderAux& aux, const GaussianSet& scene,
                                const Camera& camera, const Image& d_image);

}  // namespace splathand
