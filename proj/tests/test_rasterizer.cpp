#include <doctest.h>

#include <cmath>
#include <random>

#include "splathand/binding.hpp"
#include "splathand/geometry.hpp"
#include "splathand/rasterizer.hpp"
#include "support/test_scene.hpp"

using namespace splathand;
using namespace splathand::testing;

namespace {

Camera identity_camera(double f, double cx, double cy, int width, int height) {
    Camera cam;
    cam.fx = cam.fy = f;
    cam.cx = cx;
    cam.cy = cy;
    cam.rotation = Mat3::Identity();
    cam.translation = Vec3::Zero();
    cam.width = width;
    cam.height = height;
    cam.near_clip = 0.01;
    return cam;
}

GaussianSet one_gaussian(const Vec3& pos, double scale, double opacity, const Vec3& color) {
    GaussianSet g;
    g.positions = {pos};
    g.orientations = {Quat::Identity()};
    g.scales = {Vec3::Constant(scale)};
    g.opacities = {opacity};
    g.colors = {color};
    return g;
}

}  // namespace

TEST_CASE("project_gaussian maps the optical axis to the principal point") {
    const Camera cam = identity_camera(100.0, 50.0, 50.0, 100, 100);
    const auto res = project_gaussian(Vec3(0, 0, 1), Quat::Identity(), Vec3::Constant(0.01), cam);
    CHECK_FALSE(res.culled);
    CHECK(res.mean2d.x() == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(res.mean2d.y() == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(res.depth == doctest::Approx(1.0));
}

TEST_CASE("project_gaussian matches the closed-form on-axis covariance") {
    const Camera cam = identity_camera(120.0, 50.0, 50.0, 100, 100);
    const double s = 0.02;
    for (const double z : {0.5, 1.0, 3.0}) {
        const auto res =
            project_gaussian(Vec3(0, 0, z), Quat::Identity(), Vec3::Constant(s), cam);
        const double expect = (120.0 * s / z) * (120.0 * s / z) + 0.3;
        CHECK(res.cov2d(0, 0) == doctest::Approx(expect).epsilon(1e-10));
        CHECK(res.cov2d(1, 1) == doctest::Approx(expect).epsilon(1e-10));
        CHECK(std::abs(res.cov2d(0, 1)) < 1e-10);
    }
}

TEST_CASE("doubling depth halves the projected standard deviation") {
    const Camera cam = identity_camera(100.0, 50.0, 50.0, 100, 100);
    const auto near =
        project_gaussian(Vec3(0, 0, 1), Quat::Identity(), Vec3::Constant(0.03), cam);
    const auto far =
        project_gaussian(Vec3(0, 0, 2), Quat::Identity(), Vec3::Constant(0.03), cam);
    const double sd_near = std::sqrt(near.cov2d(0, 0) - 0.3);
    const double sd_far = std::sqrt(far.cov2d(0, 0) - 0.3);
    CHECK(sd_far == doctest::Approx(0.5 * sd_near).epsilon(1e-10));
}

TEST_CASE("project_gaussian culls points behind the near plane") {
    const Camera cam = identity_camera(100.0, 50.0, 50.0, 100, 100);
    CHECK(project_gaussian(Vec3(0, 0, -1), Quat::Identity(), Vec3::Constant(0.01), cam).culled);
    CHECK(project_gaussian(Vec3(0, 0, 0.005), Quat::Identity(), Vec3::Constant(0.01), cam).culled);
}

TEST_CASE("empty scene renders pure background with zero alpha") {
    const Camera cam = identity_camera(60.0, 16.0, 16.0, 32, 32);
    const Vec3 bg(0.25, 0.5, 0.75);
    const auto [image, aux] = render(GaussianSet{}, cam, bg);
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) {
            CHECK((image.pixels.pixel(r, c) - bg).norm() == doctest::Approx(0.0));
            CHECK(image.alpha_at(r, c) == doctest::Approx(0.0));
        }
}

TEST_CASE("single near-opaque splat composites per the hand-computed formula") {
    const Camera cam = identity_camera(100.0, 32.0, 32.0, 64, 64);
    const Vec3 bg(0, 0, 0.5);
    // Opacity above the clamp; at the exact center the fragment alpha is
    // min(0.99, 0.995 * exp(0)) = 0.99.
    const GaussianSet g = one_gaussian(Vec3(0, 0, 1), 0.05, 0.995, Vec3(1, 0, 0));
    const auto [image, aux] = render(g, cam, bg);
    const Vec3 expect = 0.99 * Vec3(1, 0, 0) + 0.01 * bg;
    CHECK((image.pixels.pixel(32, 32) - expect).norm() < 1e-12);
    CHECK(image.alpha_at(32, 32) == doctest::Approx(0.99).epsilon(1e-12));
}

TEST_CASE("two-splat compositing matches the two-term formula") {
    const Camera cam = identity_camera(100.0, 32.0, 32.0, 64, 64);
    const Vec3 bg(0, 1, 0);
    GaussianSet scene = one_gaussian(Vec3(0, 0, 1), 0.05, 0.5, Vec3(1, 0, 0));
    const GaussianSet blue = one_gaussian(Vec3(0, 0, 2), 0.10, 0.5, Vec3(0, 0, 1));
    scene = compose_scene(scene, blue);
    const auto [image, aux] = render(scene, cam, bg);
    // 0.5*red + 0.5*0.5*blue + 0.25*bg at the shared center pixel.
    const Vec3 expect = 0.5 * Vec3(1, 0, 0) + 0.25 * Vec3(0, 0, 1) + 0.25 * bg;
    CHECK((image.pixels.pixel(32, 32) - expect).norm() < 1e-12);
    CHECK(image.alpha_at(32, 32) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("composition order does not change the render") {
    const Camera cam = make_lookat_camera(Vec3(0.25, 0.15, 0.3), Vec3(0, 0, 0), 48, 48, 60.0);
    const GaussianSet a = make_object_gaussians(Vec3(0, 0, 0), 0.05, 25, 4);
    const GaussianSet b = make_object_gaussians(Vec3(0.02, 0.01, -0.01), 0.04, 25, 9);
    const auto [img_ab, aux1] = render(compose_scene(a, b), cam, Vec3(0.1, 0.1, 0.1));
    const auto [img_ba, aux2] = render(compose_scene(b, a), cam, Vec3(0.1, 0.1, 0.1));
    for (int r = 0; r < 48; ++r)
        for (int c = 0; c < 48; ++c)
            CHECK((img_ab.pixels.pixel(r, c) - img_ba.pixels.pixel(r, c)).cwiseAbs().maxCoeff() <
                  1e-6);
}

TEST_CASE("rendered values stay in unit range") {
    const Camera cam = make_lookat_camera(Vec3(0.3, 0.2, 0.25), Vec3(0, 0, 0), 32, 32, 40.0);
    const GaussianSet scene = make_object_gaussians(Vec3(0, 0, 0), 0.06, 60, 17);
    const auto [image, aux] = render(scene, cam, Vec3(0.9, 0.05, 0.4));
    CHECK(aux.skipped_degenerate == 0);
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) {
            const Vec3 p = image.pixels.pixel(r, c);
            CHECK(p.minCoeff() >= 0.0);
            CHECK(p.maxCoeff() <= 1.0);
            CHECK(image.alpha_at(r, c) >= 0.0);
            CHECK(image.alpha_at(r, c) <= 1.0);
        }
}

TEST_CASE("quaternion formula Jacobian agrees with finite differences") {
    std::mt19937_64 rng(41);
    const Quat q = random_unit_quat(rng);
    const auto jac = quat_formula_jacobian(q.w(), q.x(), q.y(), q.z());
    const double h = 1e-7;
    double coeffs[4] = {q.w(), q.x(), q.y(), q.z()};
    for (int k = 0; k < 4; ++k) {
        double cp[4] = {coeffs[0], coeffs[1], coeffs[2], coeffs[3]};
        double cm[4] = {coeffs[0], coeffs[1], coeffs[2], coeffs[3]};
        cp[k] += h;
        cm[k] -= h;
        const Mat3 fd = (quat_formula_matrix(cp[0], cp[1], cp[2], cp[3]) -
                         quat_formula_matrix(cm[0], cm[1], cm[2], cm[3])) /
                        (2 * h);
        CHECK((jac[k] - fd).norm() < 1e-6);
    }
}

TEST_CASE("render_backward matches finite differences for every parameter") {
    const Camera cam = make_lookat_camera(Vec3(0.2, 0.12, 0.22), Vec3(0, 0, 0), 24, 24, 30.0);
    GaussianSet scene = make_object_gaussians(Vec3(0, 0, 0), 0.04, 6, 23);
    // Keep fragments comfortably away from the clamp and floor thresholds.
    for (auto& o : scene.opacities) o = 0.3 + 0.4 * o;

    const Vec3 bg(0.2, 0.3, 0.4);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Image probe(24, 24);
    for (int r = 0; r < 24; ++r)
        for (int c = 0; c < 24; ++c) probe.set_pixel(r, c, Vec3(u(rng), u(rng), u(rng)));

    const auto objective = [&](const GaussianSet& s) {
        const auto [image, aux] = render(s, cam, bg);
        double acc = 0;
        for (int r = 0; r < 24; ++r)
            for (int c = 0; c < 24; ++c) acc += probe.pixel(r, c).dot(image.pixels.pixel(r, c));
        return acc;
    };

    const auto [image, aux] = render(scene, cam, bg);
    const RenderGradients grads = render_backward(aux, scene, cam, probe);

    const double h = 1e-6;
    for (int i = 0; i < scene.size(); ++i) {
        for (int axis = 0; axis < 3; ++axis) {
            GaussianSet sp = scene, sm = scene;
            sp.positions[i][axis] += h;
            sm.positions[i][axis] -= h;
            const double fd = (objective(sp) - objective(sm)) / (2 * h);
            CHECK(grads.d_positions[i][axis] == doctest::Approx(fd).epsilon(5e-4));

            sp = scene;
            sm = scene;
            sp.scales[i][axis] += h;
            sm.scales[i][axis] -= h;
            const double fd_s = (objective(sp) - objective(sm)) / (2 * h);
            CHECK(grads.d_scales[i][axis] == doctest::Approx(fd_s).epsilon(5e-4));

            sp = scene;
            sm = scene;
            sp.colors[i][axis] = std::min(1.0, sp.colors[i][axis] + h);
            sm.colors[i][axis] = std::max(0.0, sm.colors[i][axis] - h);
            const double fd_c = (objective(sp) - objective(sm)) /
                                (sp.colors[i][axis] - sm.colors[i][axis]);
            CHECK(grads.d_colors[i][axis] == doctest::Approx(fd_c).epsilon(5e-4));
        }
        {
            GaussianSet sp = scene, sm = scene;
            sp.opacities[i] += h;
            sm.opacities[i] -= h;
            const double fd = (objective(sp) - objective(sm)) / (2 * h);
            CHECK(grads.d_opacities[i] == doctest::Approx(fd).epsilon(5e-4));
        }
        // Quaternion cotangent, (w,x,y,z): perturb raw coefficients; the
        // renderer normalizes internally, so the gradient includes the
        // normalization projection.
        for (int k = 0; k < 4; ++k) {
            GaussianSet sp = scene, sm = scene;
            Vec4 cp = quat_coeffs_wxyz(scene.orientations[i]);
            Vec4 cm = cp;
            cp[k] += h;
            cm[k] -= h;
            sp.orientations[i] = Quat(cp[0], cp[1], cp[2], cp[3]);
            sm.orientations[i] = Quat(cm[0], cm[1], cm[2], cm[3]);
            const double fd = (objective(sp) - objective(sm)) / (2 * h);
            CHECK(grads.d_orientations[i][k] == doctest::Approx(fd).epsilon(5e-4));
        }
    }
}

TEST_CASE("render_backward gives zero gradients to culled splats") {
    const Camera cam = identity_camera(80.0, 16.0, 16.0, 32, 32);
    GaussianSet scene = one_gaussian(Vec3(0, 0, 1), 0.02, 0.6, Vec3(1, 1, 0));
    const GaussianSet behind = one_gaussian(Vec3(0, 0, -1), 0.02, 0.6, Vec3(0, 1, 1));
    scene = compose_scene(scene, behind);
    const auto [image, aux] = render(scene, cam, Vec3::Zero());
    Image probe(32, 32);
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) probe.set_pixel(r, c, Vec3::Ones());
    const RenderGradients grads = render_backward(aux, scene, cam, probe);
    CHECK(grads.d_positions[1].norm() == doctest::Approx(0.0));
    CHECK(grads.d_orientations[1].norm() == doctest::Approx(0.0));
    CHECK(grads.d_scales[1].norm() == doctest::Approx(0.0));
    CHECK(grads.d_opacities[1] == doctest::Approx(0.0));
    CHECK(grads.d_colors[1].norm() == doctest::Approx(0.0));
    CHECK(grads.d_positions[0].norm() > 0.0);
}
