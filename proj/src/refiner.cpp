#include "splathand/refiner.hpp"

#include <cmath>

#include "splathand/errors.hpp"
#include "splathand/losses.hpp"

namespace splathand {

void ViewpointSet::validate() const {
    if (cameras.empty()) throw ValidationError("viewpoint set is empty");
    if (targets.size() != cameras.size()) {
        throw StructuralError("viewpoint set needs one target image per camera");
    }
    for (size_t i = 0; i < cameras.size(); ++i) {
        cameras[i].validate();
        if (targets[i].width != cameras[i].width || targets[i].height != cameras[i].height) {
            throw StructuralError("target image " + std::to_string(i) +
                                  " does not match its camera dimensions");
        }
    }
}

void RefineConfig::validate() const {
    if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
    if (lr_rotation < 0.0 || lr_translation < 0.0) {
        throw ValidationError("learning rates must be nonnegative");
    }
    if (lambda_1 < 0.0 || lambda_1 > 1.0) throw ValidationError("lambda_1 must lie in [0,1]");
    if (lr_decay_floor < 0.0 || lr_decay_floor > 1.0) {
        throw ValidationError("lr_decay_floor must lie in [0,1]");
    }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// 69-dim tangent layout: [global rotation 0..2, translation 3..5, 21 joint
// rotations 6..68].
constexpr int kTangentDim = 6 + 3 * kNumJoints;

Eigen::VectorXd flatten(const PoseGradient& g) {
    Eigen::VectorXd v(kTangentDim);
    v.segment<3>(0) = g.d_global_rotation;
    v.segment<3>(3) = g.d_translation;
    for (int j = 0; j < kNumJoints; ++j) v.segment<3>(6 + 3 * j) = g.d_joint_rotations[j];
    return v;
}

void apply_step(HandPose& pose, const Eigen::VectorXd& step) {
    if (step.isZero()) return;
    pose.global_rotation = orthonormalize(exp_so3(step.segment<3>(0)) * pose.global_rotation);
    pose.translation += step.segment<3>(3);
    for (int j = 0; j < kNumJoints; ++j) {
        pose.joint_rotations[static_cast<size_t>(j)] = orthonormalize(
            pose.joint_rotations[static_cast<size_t>(j)] * exp_so3(step.segment<3>(6 + 3 * j)));
    }
}

}  // namespace

int sample_viewpoint(const ViewpointSet& set, int iteration) {
    if (set.cameras.empty()) throw ValidationError("viewpoint set is empty");
    const std::uint64_t h =
        splitmix64(set.seed ^ splitmix64(static_cast<std::uint64_t>(iteration)));
    return static_cast<int>(h % static_cast<std::uint64_t>(set.cameras.size()));
}

RefineReport refine_pose(const HandPose& init, const HandRig& rig, const BindingTable& binding,
                         const GaussianSet& hand_rest, const GaussianSet& object,
                         const ViewpointSet& views, const RefineConfig& config) {
    init.validate();
    rig.validate();
    views.validate();
    config.validate();
    if (binding.size() != hand_rest.size()) {
        throw StructuralError("binding table does not match the hand Gaussian set");
    }

    RefineReport report;
    report.final_pose = init;

    Eigen::VectorXd moment1 = Eigen::VectorXd::Zero(kTangentDim);
    Eigen::VectorXd moment2 = Eigen::VectorXd::Zero(kTangentDim);
    Eigen::VectorXd lr(kTangentDim);
    lr.segment<3>(0).setConstant(config.lr_rotation);
    lr.segment<3>(3).setConstant(config.lr_translation);
    lr.segment(6, 3 * kNumJoints).setConstant(config.lr_rotation);

    HandPose pose = init;
    double best_loss = std::numeric_limits<double>::infinity();
    double lr_scale = 1.0;
    int stall = 0;
    int adam_t = 0;

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        const int view = sample_viewpoint(views, iter);
        const Camera& cam = views.cameras[static_cast<size_t>(view)];
        const Image& target = views.targets[static_cast<size_t>(view)];

        const JointStates states = forward_kinematics(rig, pose);
        const std::vector<Vec3> verts = skin_mesh(rig, states);

        GaussianSet hand;
        try {
            hand = deform_gaussians(binding, hand_rest, verts, rig.faces);
        } catch (const DegenerateFaceError&) {
            ++report.skipped_iterations;
            continue;  // keep the last valid pose, try the next view
        }
        const GaussianSet scene = compose_scene(hand, object);
        auto [rendered, aux] = render(scene, cam, config.background, config.raster);
        auto [loss, d_image] = photometric_loss_gradient(rendered.pixels, target, config.lambda_1);

        report.loss_trace.push_back(loss);
        ++report.iterations_used;
        if (!std::isfinite(loss)) {
            report.diverged = true;
            break;
        }
        if (loss <= config.convergence_tol) {
            report.converged = true;
            break;
        }
        if (best_loss - loss > config.convergence_tol) {
            best_loss = loss;
            stall = 0;
        } else if (++stall >= config.convergence_window) {
            // Plateau: halve the learning rate; converged once it is
            // negligible relative to the configured base rates.
            stall = 0;
            lr_scale *= 0.5;
            if (lr_scale < config.lr_decay_floor) {
                report.converged = true;
                break;
            }
        }

        const RenderGradients rg = render_backward(aux, scene, cam, d_image);
        const size_t kh = static_cast<size_t>(hand.size());
        const std::vector<Vec3> d_pos(rg.d_positions.begin(), rg.d_positions.begin() + kh);
        const std::vector<Mat3> d_rot(rg.d_rotations.begin(), rg.d_rotations.begin() + kh);
        const std::vector<Vec3> d_scl(rg.d_scales.begin(), rg.d_scales.begin() + kh);
        const std::vector<Vec3> d_verts =
            deform_gaussians_backward(binding, verts, rig.faces, d_pos, d_rot, d_scl);
        const PoseGradient pg = forward_kinematics_backward(
            rig, pose, states, skin_mesh_backward(rig, states, d_verts));

        const Eigen::VectorXd grad = flatten(pg);
        ++adam_t;
        moment1 = config.beta1 * moment1 + (1.0 - config.beta1) * grad;
        moment2 = config.beta2 * moment2 + (1.0 - config.beta2) * grad.cwiseAbs2();
        const Eigen::VectorXd m_hat = moment1 / (1.0 - std::pow(config.beta1, adam_t));
        const Eigen::VectorXd v_hat = moment2 / (1.0 - std::pow(config.beta2, adam_t));
        const Eigen::VectorXd step =
            -lr_scale * lr.cwiseProduct(
                            m_hat.cwiseQuotient(v_hat.cwiseSqrt().array().matrix() +
                                                Eigen::VectorXd::Constant(kTangentDim,
                                                                          config.epsilon)));
        apply_step(pose, step);
    }

    report.final_pose = pose;
    for (size_t v = 0; v < views.cameras.size(); ++v) {
        const JointStates states = forward_kinematics(rig, pose);
        const std::vector<Vec3> verts = skin_mesh(rig, states);
        const GaussianSet hand = deform_gaussians(binding, hand_rest, verts, rig.faces);
        auto [rendered, aux] = render(compose_scene(hand, object), views.cameras[v],
                                      config.background, config.raster);
        report.per_view_loss.push_back(
            photometric_loss(rendered.pixels, views.targets[v], config.lambda_1));
    }
    return report;
}

}  // namespace splathand
