#pragma once

#include "splathand/geometry.hpp"

namespace splathand {

/// Pinhole camera, OpenCV convention: x_cam = R x_world + t, +z forward,
/// u = fx x/z + cx, v = fy y/z + cy. Pixels are sampled at integer (u,v).
struct Camera {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    Mat3 rotation = Mat3::Identity();   // world-to-camera
    Vec3 translation = Vec3::Zero();
    int width = 0, height = 0;
    double near_clip = 0.01;

    void validate() const;
};

}  // namespace splathand
