#include "splathand/rasterizer.hpp"

#include <algorithm>
#include <cmath>

#include "splathand/errors.hpp"

namespace splathand {

void Camera::validate() const {
    if (fx <= 0.0 || fy <= 0.0) throw ValidationError("focal lengths must be positive");
    if (width < 1 || height < 1) throw ValidationError("image dimensions must be >= 1");
    if (near_clip <= 0.0) throw ValidationError("near_clip must be positive");
    if (!is_rotation(rotation, 1e-6)) {
        throw ValidationError("world_to_camera rotation is not orthonormal");
    }
}

namespace {

Eigen::Matrix<double, 2, 3> projection_jacobian(const Camera& cam, const Vec3& m) {
    const double iz = 1.0 / m.z();
    Eigen::Matrix<double, 2, 3> j;
    j << cam.fx * iz, 0.0, -cam.fx * m.x() * iz * iz,
         0.0, cam.fy * iz, -cam.fy * m.y() * iz * iz;
    return j;
}

ProjectedSplat project_splat(const Vec3& position, const Quat& orientation, const Vec3& scale,
                             const Camera& cam, const RasterConfig& cfg) {
    ProjectedSplat s;
    s.view_mean = cam.rotation * position + cam.translation;
    if (s.view_mean.z() < cam.near_clip) return s;  // culled, not an error

    const double iz = 1.0 / s.view_mean.z();
    s.mean2d = Vec2(cam.fx * s.view_mean.x() * iz + cam.cx,
                    cam.fy * s.view_mean.y() * iz + cam.cy);
    s.depth = s.view_mean.z();

    const Quat q = orientation.normalized();
    const Mat3 rot = quat_formula_matrix(q.w(), q.x(), q.y(), q.z());
    const Mat3 m3 = rot * scale.asDiagonal();
    s.sigma3 = m3 * m3.transpose();

    s.proj = projection_jacobian(cam, s.view_mean);
    const Eigen::Matrix<double, 2, 3> a = s.proj * cam.rotation;
    s.cov = a * s.sigma3 * a.transpose() + cfg.blur_floor * Mat2::Identity();

    const double det = s.cov.determinant();
    if (det < 1e-12) return s;  // flagged by the caller as degenerate
    s.inv_cov = s.cov.inverse();

    const double mid = 0.5 * (s.cov(0, 0) + s.cov(1, 1));
    const double lam_max = mid + std::sqrt(std::max(mid * mid - det, 0.0));
    s.radius = cfg.sigma_cutoff * std::sqrt(lam_max);
    s.visible = true;
    return s;
}

struct Fragment {
    int order_pos;   // index into sorted_order
    double alpha;
    double gauss;
    Vec2 delta;
    double transmittance;  // before this fragment
};

}  // namespace

ProjectionResult project_gaussian(const Vec3& mean, const Quat& orientation, const Vec3& scale,
                                  const Camera& camera, const RasterConfig& config) {
    const ProjectedSplat s = project_splat(mean, orientation, scale, camera, config);
    ProjectionResult r;
    if (s.view_mean.z() < camera.near_clip) {
        r.culled = true;
        return r;
    }
    r.mean2d = s.mean2d;
    r.cov2d = s.cov;
    r.depth = s.depth;
    return r;
}

std::pair<RenderedImage, RenderAux> render(const GaussianSet& scene, const Camera& camera,
                                           const Vec3& background, const RasterConfig& config) {
    scene.validate();
    camera.validate();

    RenderAux aux;
    aux.background = background;
    aux.config = config;
    aux.splats.resize(static_cast<size_t>(scene.size()));
    for (int i = 0; i < scene.size(); ++i) {
        auto& s = aux.splats[static_cast<size_t>(i)];
        s = project_splat(scene.positions[static_cast<size_t>(i)],
                          scene.orientations[static_cast<size_t>(i)],
                          scene.scales[static_cast<size_t>(i)], camera, config);
        if (!s.visible && s.view_mean.z() >= camera.near_clip) ++aux.skipped_degenerate;
        if (s.visible) aux.sorted_order.push_back(i);
    }
    std::stable_sort(aux.sorted_order.begin(), aux.sorted_order.end(), [&](int a, int b) {
        return aux.splats[static_cast<size_t>(a)].depth < aux.splats[static_cast<size_t>(b)].depth;
    });

    RenderedImage out;
    out.pixels = Image(camera.height, camera.width);
    out.alpha.assign(static_cast<size_t>(camera.width) * camera.height, 0.0);

    for (int row = 0; row < camera.height; ++row) {
        for (int col = 0; col < camera.width; ++col) {
            Vec3 color = Vec3::Zero();
            double transmittance = 1.0;
            for (int idx : aux.sorted_order) {
                const auto& s = aux.splats[static_cast<size_t>(idx)];
                if (std::abs(col - s.mean2d.x()) > s.radius ||
                    std::abs(row - s.mean2d.y()) > s.radius) {
                    continue;
                }
                const Vec2 delta(col - s.mean2d.x(), row - s.mean2d.y());
                const double power = -0.5 * delta.dot(s.inv_cov * delta);
                if (power < -0.5 * config.sigma_cutoff * config.sigma_cutoff) continue;
                const double alpha = std::min(
                    config.alpha_clamp,
                    scene.opacities[static_cast<size_t>(idx)] * std::exp(power));
                if (alpha < config.alpha_floor) continue;
                color += scene.colors[static_cast<size_t>(idx)] * alpha * transmittance;
                transmittance *= 1.0 - alpha;
            }
            color += background * transmittance;
            out.pixels.set_pixel(row, col, color);
            out.alpha[static_cast<size_t>(row) * camera.width + col] = 1.0 - transmittance;
        }
    }
    return {std::move(out), std::move(aux)};
}

RenderGradients render_backward(const RenderAux& aux, const GaussianSet& scene,
                                const Camera& camera, const Image& d_image) {
    const int k = scene.size();
    if (static_cast<int>(aux.splats.size()) != k) {
        throw StructuralError("RenderAux does not match the scene");
    }
    if (d_image.width != camera.width || d_image.height != camera.height) {
        throw StructuralError("d_image dimensions do not match the camera");
    }

    RenderGradients g;
    g.d_positions.assign(static_cast<size_t>(k), Vec3::Zero());
    g.d_orientations.assign(static_cast<size_t>(k), Vec4::Zero());
    g.d_scales.assign(static_cast<size_t>(k), Vec3::Zero());
    g.d_opacities.assign(static_cast<size_t>(k), 0.0);
    g.d_colors.assign(static_cast<size_t>(k), Vec3::Zero());
    g.d_rotations.assign(static_cast<size_t>(k), Mat3::Zero());

    // 2D-stage accumulators per Gaussian.
    std::vector<Vec2> d_mean2d(static_cast<size_t>(k), Vec2::Zero());
    std::vector<Mat2> d_invcov(static_cast<size_t>(k), Mat2::Zero());

    const RasterConfig& cfg = aux.config;
    std::vector<Fragment> frags;
    frags.reserve(64);

    for (int row = 0; row < camera.height; ++row) {
        for (int col = 0; col < camera.width; ++col) {
            const Vec3 d_pix = d_image.pixel(row, col);
            if (d_pix.isZero()) continue;

            // replay the forward compositing for this pixel
            frags.clear();
            double transmittance = 1.0;
            for (size_t pos = 0; pos < aux.sorted_order.size(); ++pos) {
                const int idx = aux.sorted_order[pos];
                const auto& s = aux.splats[static_cast<size_t>(idx)];
                if (std::abs(col - s.mean2d.x()) > s.radius ||
                    std::abs(row - s.mean2d.y()) > s.radius) {
                    continue;
                }
                const Vec2 delta(col - s.mean2d.x(), row - s.mean2d.y());
                const double power = -0.5 * delta.dot(s.inv_cov * delta);
                if (power < -0.5 * cfg.sigma_cutoff * cfg.sigma_cutoff) continue;
                const double gauss = std::exp(power);
                const double alpha =
                    std::min(cfg.alpha_clamp, scene.opacities[static_cast<size_t>(idx)] * gauss);
                if (alpha < cfg.alpha_floor) continue;
                frags.push_back({static_cast<int>(pos), alpha, gauss, delta, transmittance});
                transmittance *= 1.0 - alpha;
            }

            // walk back-to-front; suffix = color composited behind fragment i
            Vec3 suffix = aux.background * transmittance;
            for (auto it = frags.rbegin(); it != frags.rend(); ++it) {
                const int idx = aux.sorted_order[static_cast<size_t>(it->order_pos)];
                const size_t ui = static_cast<size_t>(idx);
                const Vec3& color = scene.colors[ui];

                g.d_colors[ui] += d_pix * it->alpha * it->transmittance;
                const double d_alpha =
                    d_pix.dot(color * it->transmittance - suffix / (1.0 - it->alpha));
                suffix += color * it->alpha * it->transmittance;

                const bool clamped = scene.opacities[ui] * it->gauss >= cfg.alpha_clamp;
                if (clamped) continue;  // ceiling kills the gradient
                g.d_opacities[ui] += d_alpha * it->gauss;
                const double d_gauss = d_alpha * scene.opacities[ui];
                const double d_power = d_gauss * it->gauss;
                const Vec2 d_delta = d_power * (-(aux.splats[ui].inv_cov * it->delta));
                d_mean2d[ui] -= d_delta;
                d_invcov[ui] += d_power * (-0.5) * (it->delta * it->delta.transpose());
            }
        }
    }

    // 2D -> 3D parameter chain per visible splat.
    for (int idx : aux.sorted_order) {
        const size_t ui = static_cast<size_t>(idx);
        const auto& s = aux.splats[ui];
        if (d_mean2d[ui].isZero() && d_invcov[ui].isZero() && g.d_colors[ui].isZero() &&
            g.d_opacities[ui] == 0.0) {
            continue;
        }

        // d(inv_cov) -> d(cov)
        const Mat2 d_cov = -s.inv_cov * d_invcov[ui] * s.inv_cov;
        // cov = A sigma3 A^T + blur I, A = J W
        const Eigen::Matrix<double, 2, 3> a = s.proj * camera.rotation;
        const Mat3 d_sigma3 = a.transpose() * d_cov * a;
        const Eigen::Matrix<double, 2, 3> d_a = 2.0 * d_cov * a * s.sigma3;
        const Eigen::Matrix<double, 2, 3> d_j = d_a * camera.rotation.transpose();

        // view-mean gradient from the Jacobian entries and from mean2d
        const Vec3& m = s.view_mean;
        const double iz = 1.0 / m.z();
        Vec3 d_m = Vec3::Zero();
        d_m.x() += d_j(0, 2) * (-camera.fx * iz * iz);
        d_m.y() += d_j(1, 2) * (-camera.fy * iz * iz);
        d_m.z() += d_j(0, 0) * (-camera.fx * iz * iz) + d_j(1, 1) * (-camera.fy * iz * iz) +
                   d_j(0, 2) * (2.0 * camera.fx * m.x() * iz * iz * iz) +
                   d_j(1, 2) * (2.0 * camera.fy * m.y() * iz * iz * iz);
        d_m.x() += d_mean2d[ui].x() * camera.fx * iz;
        d_m.z() += d_mean2d[ui].x() * (-camera.fx * m.x() * iz * iz);
        d_m.y() += d_mean2d[ui].y() * camera.fy * iz;
        d_m.z() += d_mean2d[ui].y() * (-camera.fy * m.y() * iz * iz);

        g.d_positions[ui] = camera.rotation.transpose() * d_m;

        // sigma3 = M M^T, M = R diag(s)
        const Quat q = scene.orientations[ui].normalized();
        const Mat3 rot = quat_formula_matrix(q.w(), q.x(), q.y(), q.z());
        const Vec3& scale = scene.scales[ui];
        const Mat3 m3 = rot * scale.asDiagonal();
        const Mat3 d_m3 = 2.0 * d_sigma3 * m3;
        Mat3 d_rot;
        for (int c = 0; c < 3; ++c) {
            d_rot.col(c) = d_m3.col(c) * scale[c];
            g.d_scales[ui][c] = rot.col(c).dot(d_m3.col(c));
        }
        g.d_rotations[ui] = d_rot;

        const auto jac = quat_formula_jacobian(q.w(), q.x(), q.y(), q.z());
        Vec4 d_q_unit;
        for (int c = 0; c < 4; ++c) d_q_unit[c] = (d_rot.array() * jac[c].array()).sum();
        const Vec4 qc = quat_coeffs_wxyz(q);
        const double nrm = quat_coeffs_wxyz(scene.orientations[ui]).norm();
        g.d_orientations[ui] = (d_q_unit - qc * qc.dot(d_q_unit)) / nrm;
    }
    return g;
}

}  // namespace splathand
