#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "splathand/binding.hpp"
#include "splathand/errors.hpp"
#include "splathand/grasp.hpp"
#include "splathand/hand_rig.hpp"
#include "splathand/io.hpp"
#include "splathand/losses.hpp"
#include "splathand/rasterizer.hpp"
#include "splathand/refiner.hpp"

namespace sh = splathand;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitValidation = 65;
constexpr int kExitIo = 66;

// Rest-pose hand Gaussians deformed to `pose`, composed with the object.
sh::GaussianSet posed_scene(const sh::ProjectConfig& cfg, const sh::HandRig& rig,
                            const sh::GaussianSet& hand_rest, const sh::HandPose& pose) {
    const sh::BindingTable binding = sh::bind_gaussians(hand_rest, rig);
    const sh::JointStates states = sh::forward_kinematics(rig, pose);
    const std::vector<sh::Vec3> verts = sh::skin_mesh(rig, states);
    const sh::GaussianSet hand = sh::deform_gaussians(binding, hand_rest, verts, rig.faces);
    if (cfg.object_ply_path.empty()) return hand;
    return sh::compose_scene(hand, sh::load_gaussian_ply(cfg.object_ply_path));
}

int run(int argc, char** argv) {
    CLI::App app{"Articulated Gaussian-splat hand toolkit"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed, "random seed override")->capture_default_str();

    // bind
    auto* bind_cmd = app.add_subcommand("bind", "bind a Gaussian cloud to a hand rig");
    std::string bind_rig, bind_ply, bind_out;
    bind_cmd->add_option("--rig", bind_rig)->required();
    bind_cmd->add_option("--hand-ply", bind_ply)->required();
    bind_cmd->add_option("--out", bind_out)->required();
    bind_cmd->add_option("--seed", seed, "random seed override");

    // render
    auto* render_cmd = app.add_subcommand("render", "render the composed scene at a pose");
    std::string render_config, render_pose, render_out;
    int camera_index = 0;
    render_cmd->add_option("--config", render_config)->required();
    render_cmd->add_option("--pose", render_pose)->required();
    render_cmd->add_option("--camera-index", camera_index)->required();
    render_cmd->add_option("--out", render_out)->required();
    render_cmd->add_option("--seed", seed, "random seed override");

    // refine
    auto* refine_cmd = app.add_subcommand("refine", "refine a grasp pose photometrically");
    std::string refine_config, refine_init, refine_out;
    refine_cmd->add_option("--config", refine_config)->required();
    refine_cmd->add_option("--init-pose", refine_init)->required();
    refine_cmd->add_option("--out", refine_out)->required();
    refine_cmd->add_option("--seed", seed, "random seed override");

    // loss
    auto* loss_cmd = app.add_subcommand("loss", "evaluate the hand-parameter losses");
    std::string loss_pred, loss_truth, loss_rendered, loss_target;
    int epoch = -1, epochs = -1;
    double lambda_1 = 0.8;
    loss_cmd->add_option("--pred", loss_pred)->required();
    loss_cmd->add_option("--truth", loss_truth)->required();
    loss_cmd->add_option("--rendered", loss_rendered, "rendered image for photometric term");
    loss_cmd->add_option("--target", loss_target, "target image for photometric term");
    loss_cmd->add_option("--epoch", epoch);
    loss_cmd->add_option("--epochs", epochs);
    loss_cmd->add_option("--lambda1", lambda_1);
    loss_cmd->add_option("--seed", seed, "random seed override");

    // grasp-check
    auto* grasp_cmd = app.add_subcommand("grasp-check", "evaluate the grasp contact proxy");
    std::string grasp_config, grasp_pose, grasp_mesh;
    grasp_cmd->add_option("--config", grasp_config)->required();
    grasp_cmd->add_option("--pose", grasp_pose)->required();
    grasp_cmd->add_option("--object-mesh", grasp_mesh)->required();
    grasp_cmd->add_option("--seed", seed, "random seed override");

    // decode-heatmap
    auto* decode_cmd = app.add_subcommand("decode-heatmap", "soft-argmax joint decoding");
    std::string decode_in;
    std::optional<double> decode_beta;
    decode_cmd->add_option("--in", decode_in)->required();
    decode_cmd->add_option("--beta", decode_beta, "override all sharpness values");
    decode_cmd->add_option("--seed", seed, "random seed override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    if (*bind_cmd) {
        const sh::HandRig rig = sh::load_rig(bind_rig);
        const sh::GaussianSet hand = sh::load_gaussian_ply(bind_ply);
        const sh::BindingTable table = sh::bind_gaussians(hand, rig);
        sh::save_binding(table, rig.face_count(), bind_out);
        return 0;
    }

    if (*render_cmd) {
        const sh::ProjectConfig cfg = sh::load_project_config(render_config);
        const sh::HandRig rig = sh::load_rig(cfg.rig_path);
        const sh::GaussianSet hand_rest = sh::load_gaussian_ply(cfg.hand_ply_path);
        const sh::HandPose pose = sh::load_pose(render_pose);
        const sh::ViewpointSet views = sh::load_viewpoints(cfg.viewpoints_path, false);
        if (camera_index < 0 || camera_index >= views.size()) {
            throw sh::ValidationError("camera index out of range");
        }
        const sh::GaussianSet scene = posed_scene(cfg, rig, hand_rest, pose);
        auto [image, aux] = sh::render(scene, views.cameras[static_cast<size_t>(camera_index)],
                                       cfg.refine.background, cfg.refine.raster);
        sh::save_image(image.pixels, render_out);
        return 0;
    }

    if (*refine_cmd) {
        const sh::ProjectConfig cfg = sh::load_project_config(refine_config);
        const sh::HandRig rig = sh::load_rig(cfg.rig_path);
        const sh::GaussianSet hand_rest = sh::load_gaussian_ply(cfg.hand_ply_path);
        sh::GaussianSet object;
        if (!cfg.object_ply_path.empty()) object = sh::load_gaussian_ply(cfg.object_ply_path);
        sh::ViewpointSet views = sh::load_viewpoints(cfg.viewpoints_path, true);
        views.seed = seed.value_or(cfg.seed);
        const sh::HandPose init = sh::load_pose(refine_init);
        const sh::BindingTable binding = sh::bind_gaussians(hand_rest, rig);
        const sh::RefineReport report =
            sh::refine_pose(init, rig, binding, hand_rest, object, views, cfg.refine);
        std::ofstream out(refine_out);
        if (!out) throw sh::IoError("cannot write " + refine_out);
        out << sh::report_to_json(report);
        return report.diverged ? 2 : 0;
    }

    if (*loss_cmd) {
        const sh::HandState pred = sh::load_hand_state(loss_pred);
        const sh::HandState truth = sh::load_hand_state(loss_truth);
        sh::LossWeights weights;
        weights.lambda_1 = lambda_1;
        sh::LossBreakdown breakdown = sh::mano_losses(pred, truth, weights);
        if (!loss_rendered.empty() != !loss_target.empty()) {
            throw sh::ValidationError("--rendered and --target must be given together");
        }
        if (!loss_rendered.empty()) {
            breakdown.img = sh::photometric_loss(sh::load_image(loss_rendered),
                                                 sh::load_image(loss_target), lambda_1);
        }
        if ((epoch >= 0) != (epochs >= 0)) {
            throw sh::ValidationError("--epoch and --epochs must be given together");
        }
        if (epoch >= 0) {
            breakdown.total =
                sh::combined_loss(breakdown.mano, breakdown.img.value_or(0.0), epoch, epochs)
                    .total;
        }
        std::cout << sh::breakdown_to_json(breakdown);
        return 0;
    }

    if (*grasp_cmd) {
        const sh::ProjectConfig cfg = sh::load_project_config(grasp_config);
        const sh::HandRig rig = sh::load_rig(cfg.rig_path);
        const sh::HandPose pose = sh::load_pose(grasp_pose);
        const sh::TriangleMesh object = sh::load_obj(grasp_mesh);
        const sh::JointStates states = sh::forward_kinematics(rig, pose);
        const std::vector<sh::Vec3> verts = sh::skin_mesh(rig, states);
        const sh::ContactReport report =
            sh::finger_contacts(verts, rig, object, cfg.contact_eps, cfg.penetration_limit);
        std::cout << sh::report_to_json(report);
        return report.success ? 0 : 1;
    }

    if (*decode_cmd) {
        sh::HeatmapStack stack = sh::load_heatmaps(decode_in);
        if (decode_beta) stack.beta.assign(sh::kNumJoints, *decode_beta);
        const std::vector<sh::Vec2> points = sh::soft_argmax(stack);
        for (const sh::Vec2& p : points) {
            std::printf("%.17g %.17g\n", p.x(), p.y());
        }
        return 0;
    }
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const sh::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
