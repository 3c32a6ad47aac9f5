#pragma once

#include <vector>

#include "splathand/geometry.hpp"

namespace splathand {

/// Row-major H x W x 3 image with values nominally in [0,1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // height * width * 3

    Image() = default;
    Image(int h, int w, double fill = 0.0)
        : width(w), height(h), data(static_cast<size_t>(w) * h * 3, fill) {}

    double& at(int row, int col, int ch) {
        return data[(static_cast<size_t>(row) * width + col) * 3 + ch];
    }
    double at(int row, int col, int ch) const {
        return data[(static_cast<size_t>(row) * width + col) * 3 + ch];
    }
    Vec3 pixel(int row, int col) const {
        return Vec3(at(row, col, 0), at(row, col, 1), at(row, col, 2));
    }
    void set_pixel(int row, int col, const Vec3& rgb) {
        at(row, col, 0) = rgb[0];
        at(row, col, 1) = rgb[1];
        at(row, col, 2) = rgb[2];
    }
    size_t size() const { return data.size(); }
};

}  // namespace splathand
