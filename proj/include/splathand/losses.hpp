#pragma once

#include <optional>
#include <vector>

#include "splathand/hand_rig.hpp"
#include "splathand/image.hpp"

namespace splathand {

struct LossWeights {
    double lambda_verts = 1e-4;
    double lambda_joints = 1e-4;
    double lambda_pose = 10.0;
    double lambda_transl = 10.0;
    double lambda_reg = 1.0;
    double lambda_1 = 0.8;

    void validate() const;
};

/// 21 heatmaps; each joint map is stored row-major with the first spatial
/// axis indexed by u in [0,T) and the second by v in [0,E), i.e. a T x E
/// matrix M_j(u, v). Softmax is taken jointly over all T*E cells.
struct HeatmapStack {
    std::vector<Eigen::MatrixXd> values;  // 21 maps, each T x E
    std::vector<double> beta;             // 21 sharpness scalars, > 0

    void validate() const;
};

struct LossBreakdown {
    double verts = 0, joints = 0, pose = 0, transl = 0, reg = 0, mano = 0;
    std::optional<double> img;
    std::optional<double> total;
};

/// A hand prediction or ground truth: posed vertices, 21 joints, pose params.
struct HandState {
    std::vector<Vec3> vertices;
    std::array<Vec3, kNumJoints> joints;
    HandPose pose;
};

/// Sinusoidal 2D positional encoding; output has 2D entries, the x-axis
/// block first. Within a block, entries alternate sin(x / tau^(2i/D)) and
/// cos(x / tau^((2i+1)/D)) for i in [0, D/2).
std::vector<double> positional_encoding(double x, double y, int dim, double tau = 10000.0);

/// Soft-argmax keypoints: expectation of (u, v) under softmax(beta_j * M_j).
std::vector<Vec2> soft_argmax(const HeatmapStack& stack);

/// The five weighted hand-supervision terms and their sum.
LossBreakdown mano_losses(const HandState& pred, const HandState& truth,
                          const LossWeights& weights);

/// Mean structural similarity, 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2, valid windows only, averaged over channels.
double ssim(const Image& a, const Image& b);

/// ssim plus its gradient with respect to the first image.
std::pair<double, Image> ssim_with_gradient(const Image& a, const Image& b);

/// lambda1 * mean|rendered - target| + (1 - lambda1) * (1 - ssim).
double photometric_loss(const Image& rendered, const Image& target, double lambda_1);

/// Loss value plus gradient with respect to the rendered image.
std::pair<double, Image> photometric_loss_gradient(const Image& rendered, const Image& target,
                                                   double lambda_1);

struct CombinedLoss {
    double total;
    double alpha;
};

/// Cosine schedule between the hand-parameter loss and the photometric loss:
/// alpha = 0.5 (1 + cos(pi * o_curr / o_last)).
CombinedLoss combined_loss(double mano, double img, int o_curr, int o_last);

}  // namespace splathand
