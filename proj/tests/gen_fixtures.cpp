// Regenerates the committed fixtures under data/. Usage: gen_fixtures [dir]
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "splathand/binding.hpp"
#include "splathand/io.hpp"
#include "splathand/rasterizer.hpp"
#include "support/test_scene.hpp"

using namespace splathand;
using namespace splathand::testing;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
    const fs::path dir = argc > 1 ? argv[1] : "data";
    fs::create_directories(dir);
    const auto at = [&](const std::string& name) { return (dir / name).string(); };

    const HandRig rig = make_test_rig();
    save_rig(rig, at("rig.json"));

    const GaussianSet hand = sample_hand_gaussians(rig, 150, 2024, 4e-3, 7e-3);
    save_gaussian_ply(hand, at("hand.ply"));

    const Vec3 object_center(0.02, 0.1, 0.0);
    const GaussianSet object = make_object_gaussians(object_center, 0.025, 40, 3);
    save_gaussian_ply(object, at("object.ply"));
    save_obj(make_sphere_mesh(object_center, 0.03, 1), at("object.obj"));

    // A sphere wedged between the index and middle fingertips: nearest group
    // vertices sit 0.5 mm outside the surface, so the grasp proxy succeeds.
    {
        Vec3 tip1 = Vec3::Zero(), tip2 = Vec3::Zero();
        for (const int v : rig.fingertip_groups[1]) tip1 += rig.template_vertices[v];
        for (const int v : rig.fingertip_groups[2]) tip2 += rig.template_vertices[v];
        tip1 /= rig.fingertip_groups[1].size();
        tip2 /= rig.fingertip_groups[2].size();
        const Vec3 center = 0.5 * (tip1 + tip2);
        double radius = std::numeric_limits<double>::infinity();
        for (const int f : {1, 2})
            for (const int v : rig.fingertip_groups[f])
                radius = std::min(radius, (rig.template_vertices[v] - center).norm());
        save_obj(make_sphere_mesh(center, radius - 5e-4, 2), at("object_touch.obj"));
    }

    const HandPose identity = HandPose::identity();
    save_pose(identity, at("pose_identity.json"));

    HandPose perturbed = identity;
    perturbed.global_rotation = exp_so3(Vec3(0, 0, 5.0 * M_PI / 180.0));
    perturbed.translation = Vec3(0.01, 0, 0);
    save_pose(perturbed, at("pose_perturbed.json"));

    // Background chosen so PPM quantization is exact (0.2 * 255 = 51).
    const Vec3 background = Vec3::Constant(0.2);

    // Scene at the identity pose, as the CLI composes it.
    const BindingTable binding = bind_gaussians(hand, rig);
    const JointStates states = forward_kinematics(rig, identity);
    const std::vector<Vec3> verts = skin_mesh(rig, states);
    const GaussianSet scene =
        compose_scene(deform_gaussians(binding, hand, verts, rig.faces), object);

    // Four cameras on a ring, with targets rendered at the identity pose.
    const Vec3 center(0.0, 0.05, 0.0);
    const int res = 64;
    std::ofstream views(at("viewpoints.json"));
    views << "{\n \"seed\": 11,\n \"cameras\": [\n";
    for (int k = 0; k < 4; ++k) {
        const double theta = 2.0 * M_PI * k / 4;
        const Vec3 eye =
            center + Vec3(0.28 * std::cos(theta), 0.1, 0.28 * std::sin(theta));
        const Camera cam = make_lookat_camera(eye, center, res, res, 0.9 * res);
        const auto [image, aux] = render(scene, cam, background);
        const std::string img_name = "view" + std::to_string(k) + ".ppm";
        save_image(image.pixels, at(img_name));
        views << "  {\"fx\": " << cam.fx << ", \"fy\": " << cam.fy << ", \"cx\": " << cam.cx
              << ", \"cy\": " << cam.cy << ", \"width\": " << cam.width
              << ", \"height\": " << cam.height << ",\n   \"world_to_camera\": [";
        for (int r = 0; r < 4; ++r) {
            views << (r ? ", [" : "[");
            for (int c = 0; c < 4; ++c) {
                double v;
                if (r == 3) {
                    v = c == 3 ? 1.0 : 0.0;
                } else if (c == 3) {
                    v = cam.translation[r];
                } else {
                    v = cam.rotation(r, c);
                }
                views.precision(17);
                views << (c ? ", " : "") << v;
            }
            views << "]";
        }
        views << "],\n   \"image\": \"" << img_name << "\"}" << (k == 3 ? "\n" : ",\n");
    }
    views << " ]\n}\n";
    views.close();

    std::ofstream config(at("config.json"));
    config << R"({
 "rig": "rig.json",
 "hand_ply": "hand.ply",
 "object_ply": "object.ply",
 "viewpoints": "viewpoints.json",
 "seed": 11,
 "refine": {
  "max_iterations": 150,
  "convergence_tol": 0.001,
  "background": [0.2, 0.2, 0.2]
 }
}
)";
    config.close();

    // Golden image: camera 0 at the identity pose (the CLI render path).
    {
        const ViewpointSet vp = load_viewpoints(at("viewpoints.json"), false);
        const auto [image, aux] = render(scene, vp.cameras[0], background);
        save_image(image.pixels, at("golden_render.ppm"));
    }

    // Hand states for the loss subcommand: truth at identity, pred displaced.
    HandState truth;
    truth.vertices = verts;
    truth.joints = states.joint_positions;
    truth.pose = identity;
    save_hand_state(truth, at("state_truth.json"));
    HandState pred = truth;
    pred.vertices[0] += Vec3(0.01, 0, 0);
    pred.pose.translation += Vec3(0, 0.005, 0);
    save_hand_state(pred, at("state_pred.json"));

    // Heatmaps: one dominant peak per joint on a 6x5 grid.
    std::ofstream maps(at("heatmaps.json"));
    maps << "{\n \"beta\": 4.0,\n \"maps\": [\n";
    for (int j = 0; j < kNumJoints; ++j) {
        maps << "  [";
        for (int u = 0; u < 6; ++u) {
            maps << (u ? ",[" : "[");
            for (int v = 0; v < 5; ++v) {
                const double val = (u == j % 6 && v == j % 5) ? 9.0 : 0.0;
                maps << (v ? "," : "") << val;
            }
            maps << "]";
        }
        maps << "]" << (j + 1 == kNumJoints ? "\n" : ",\n");
    }
    maps << " ]\n}\n";
    maps.close();

    std::cout << "fixtures written to " << dir << "\n";
    return 0;
}
