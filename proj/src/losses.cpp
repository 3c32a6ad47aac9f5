#include "splathand/losses.hpp"

#include <cmath>

#include "splathand/errors.hpp"

namespace splathand {

void LossWeights::validate() const {
    if (lambda_verts < 0 || lambda_joints < 0 || lambda_pose < 0 || lambda_transl < 0 ||
        lambda_reg < 0) {
        throw ValidationError("loss weights must be nonnegative");
    }
    if (lambda_1 < 0.0 || lambda_1 > 1.0) throw ValidationError("lambda_1 must lie in [0,1]");
}

void HeatmapStack::validate() const {
    if (values.size() != kNumJoints || beta.size() != kNumJoints) {
        throw StructuralError("heatmap stack must have 21 maps and 21 beta values");
    }
    for (size_t j = 0; j < values.size(); ++j) {
        if (values[j].rows() < 1 || values[j].cols() < 1) {
            throw ValidationError("heatmap " + std::to_string(j) + " is empty");
        }
        if (values[j].rows() != values[0].rows() || values[j].cols() != values[0].cols()) {
            throw StructuralError("heatmap dimensions disagree across joints");
        }
        if (!values[j].allFinite()) {
            throw ValidationError("heatmap " + std::to_string(j) + " has non-finite values");
        }
        if (beta[j] <= 0.0) {
            throw ValidationError("beta " + std::to_string(j) + " must be positive");
        }
    }
}

std::vector<double> positional_encoding(double x, double y, int dim, double tau) {
    if (dim < 2 || dim % 2 != 0) throw ValidationError("encoding dimension must be even, >= 2");
    if (tau <= 0.0) throw ValidationError("temperature must be positive");
    std::vector<double> out;
    out.reserve(static_cast<size_t>(2 * dim));
    for (double coord : {x, y}) {
        for (int i = 0; i < dim / 2; ++i) {
            out.push_back(std::sin(coord / std::pow(tau, (2.0 * i) / dim)));
            out.push_back(std::cos(coord / std::pow(tau, (2.0 * i + 1.0) / dim)));
        }
    }
    return out;
}

std::vector<Vec2> soft_argmax(const HeatmapStack& stack) {
    stack.validate();
    std::vector<Vec2> points(kNumJoints);
    for (int j = 0; j < kNumJoints; ++j) {
        const Eigen::MatrixXd& m = stack.values[static_cast<size_t>(j)];
        const double peak = (stack.beta[static_cast<size_t>(j)] * m).maxCoeff();
        Eigen::MatrixXd h =
            (stack.beta[static_cast<size_t>(j)] * m.array() - peak).exp().matrix();
        h /= h.sum();
        Vec2 p = Vec2::Zero();
        for (int u = 0; u < m.rows(); ++u) {
            for (int v = 0; v < m.cols(); ++v) {
                p += h(u, v) * Vec2(u, v);
            }
        }
        points[static_cast<size_t>(j)] = p;
    }
    return points;
}

LossBreakdown mano_losses(const HandState& pred, const HandState& truth,
                          const LossWeights& weights) {
    weights.validate();
    if (pred.vertices.size() != truth.vertices.size()) {
        throw StructuralError("vertex counts differ between prediction and truth");
    }
    if (pred.vertices.empty()) throw StructuralError("hand state has no vertices");

    LossBreakdown out;
    const double n = static_cast<double>(pred.vertices.size());
    double acc = 0.0;
    for (size_t i = 0; i < pred.vertices.size(); ++i) {
        acc += (pred.vertices[i] - truth.vertices[i]).squaredNorm();
    }
    out.verts = weights.lambda_verts * acc / n;

    acc = 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
        acc += (pred.joints[static_cast<size_t>(j)] - truth.joints[static_cast<size_t>(j)])
                   .squaredNorm();
    }
    out.joints = weights.lambda_joints * acc / kNumJoints;

    double pose_acc = 0.0, reg_acc = 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
        pose_acc += (pred.pose.joint_rotations[static_cast<size_t>(j)] -
                     truth.pose.joint_rotations[static_cast<size_t>(j)])
                        .squaredNorm();
        reg_acc += (Mat3::Identity() - pred.pose.joint_rotations[static_cast<size_t>(j)])
                       .squaredNorm();
    }
    out.pose = weights.lambda_pose * pose_acc / kNumJoints;
    out.reg = weights.lambda_reg * reg_acc / kNumJoints;
    out.transl =
        weights.lambda_transl * (pred.pose.translation - truth.pose.translation).squaredNorm();

    out.mano = out.verts + out.joints + out.pose + out.transl + out.reg;
    return out;
}

namespace {

constexpr int kWindow = 11;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const Eigen::MatrixXd& ssim_window() {
    static const Eigen::MatrixXd win = [] {
        Eigen::VectorXd g(kWindow);
        const double sigma = 1.5;
        for (int i = 0; i < kWindow; ++i) {
            const double d = i - (kWindow - 1) / 2.0;
            g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        }
        g /= g.sum();
        return Eigen::MatrixXd(g * g.transpose());
    }();
    return win;
}

void check_ssim_inputs(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height) {
        throw StructuralError("image dimensions differ");
    }
    if (a.width < kWindow || a.height < kWindow) {
        throw StructuralError("images must be at least 11x11 for SSIM");
    }
}

// Windowed moment at valid position (r, c) for channel ch.
struct Moments {
    double mu1, mu2, var1, var2, cov;
};

Moments window_moments(const Image& a, const Image& b, int r, int c, int ch,
                       const Eigen::MatrixXd& w) {
    double mu1 = 0, mu2 = 0, m11 = 0, m22 = 0, m12 = 0;
    for (int i = 0; i < kWindow; ++i) {
        for (int j = 0; j < kWindow; ++j) {
            const double av = a.at(r + i, c + j, ch);
            const double bv = b.at(r + i, c + j, ch);
            const double wk = w(i, j);
            mu1 += wk * av;
            mu2 += wk * bv;
            m11 += wk * av * av;
            m22 += wk * bv * bv;
            m12 += wk * av * bv;
        }
    }
    return {mu1, mu2, m11 - mu1 * mu1, m22 - mu2 * mu2, m12 - mu1 * mu2};
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    check_ssim_inputs(a, b);
    const Eigen::MatrixXd& w = ssim_window();
    const int rows = a.height - kWindow + 1;
    const int cols = a.width - kWindow + 1;
    double total = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const Moments m = window_moments(a, b, r, c, ch, w);
                const double a1 = 2.0 * m.mu1 * m.mu2 + kC1;
                const double a2 = 2.0 * m.cov + kC2;
                const double b1 = m.mu1 * m.mu1 + m.mu2 * m.mu2 + kC1;
                const double b2 = m.var1 + m.var2 + kC2;
                total += (a1 * a2) / (b1 * b2);
            }
        }
    }
    return total / (3.0 * rows * cols);
}

std::pair<double, Image> ssim_with_gradient(const Image& a, const Image& b) {
    check_ssim_inputs(a, b);
    const Eigen::MatrixXd& w = ssim_window();
    const int rows = a.height - kWindow + 1;
    const int cols = a.width - kWindow + 1;
    const double norm = 1.0 / (3.0 * rows * cols);

    double total = 0.0;
    Image grad(a.height, a.width);
    for (int ch = 0; ch < 3; ++ch) {
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const Moments m = window_moments(a, b, r, c, ch, w);
                const double a1 = 2.0 * m.mu1 * m.mu2 + kC1;
                const double a2 = 2.0 * m.cov + kC2;
                const double b1 = m.mu1 * m.mu1 + m.mu2 * m.mu2 + kC1;
                const double b2 = m.var1 + m.var2 + kC2;
                total += (a1 * a2) / (b1 * b2);

                const double ds_dmu1 =
                    (2.0 * m.mu2 * a2 * b1 - a1 * a2 * 2.0 * m.mu1) / (b1 * b1 * b2) * 1.0;
                const double ds_dvar1 = -(a1 * a2) / (b1 * b2 * b2);
                const double ds_dcov = 2.0 * a1 / (b1 * b2);

                for (int i = 0; i < kWindow; ++i) {
                    for (int j = 0; j < kWindow; ++j) {
                        const double av = a.at(r + i, c + j, ch);
                        const double bv = b.at(r + i, c + j, ch);
                        grad.at(r + i, c + j, ch) +=
                            norm * w(i, j) *
                            (ds_dmu1 + 2.0 * ds_dvar1 * (av - m.mu1) + ds_dcov * (bv - m.mu2));
                    }
                }
            }
        }
    }
    return {total * norm, std::move(grad)};
}

double photometric_loss(const Image& rendered, const Image& target, double lambda_1) {
    if (rendered.width != target.width || rendered.height != target.height) {
        throw StructuralError("image dimensions differ");
    }
    double l1 = 0.0;
    for (size_t i = 0; i < rendered.data.size(); ++i) {
        l1 += std::abs(rendered.data[i] - target.data[i]);
    }
    l1 /= static_cast<double>(rendered.data.size());
    if (lambda_1 >= 1.0) return l1;  // SSIM term vanishes
    return lambda_1 * l1 + (1.0 - lambda_1) * (1.0 - ssim(rendered, target));
}

std::pair<double, Image> photometric_loss_gradient(const Image& rendered, const Image& target,
                                                   double lambda_1) {
    if (rendered.width != target.width || rendered.height != target.height) {
        throw StructuralError("image dimensions differ");
    }
    const double inv_n = 1.0 / static_cast<double>(rendered.data.size());
    double l1 = 0.0;
    Image grad(rendered.height, rendered.width);
    for (size_t i = 0; i < rendered.data.size(); ++i) {
        const double d = rendered.data[i] - target.data[i];
        l1 += std::abs(d);
        grad.data[i] = lambda_1 * inv_n * (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0));
    }
    l1 *= inv_n;
    if (lambda_1 >= 1.0) return {l1, std::move(grad)};

    auto [s, ds] = ssim_with_gradient(rendered, target);
    for (size_t i = 0; i < grad.data.size(); ++i) {
        grad.data[i] -= (1.0 - lambda_1) * ds.data[i];
    }
    return {lambda_1 * l1 + (1.0 - lambda_1) * (1.0 - s), std::move(grad)};
}

CombinedLoss combined_loss(double mano, double img, int o_curr, int o_last) {
    if (o_last < 1) throw ValidationError("o_last must be >= 1");
    if (o_curr < 0 || o_curr > o_last) throw ValidationError("o_curr out of [0, o_last]");
    double alpha = 0.5 * (1.0 + std::cos(M_PI * o_curr / o_last));
    if (o_curr == 0) alpha = 1.0;
    if (o_curr == o_last) alpha = 0.0;
    return {alpha * mano + (1.0 - alpha) * img, alpha};
}

}  // namespace splathand
