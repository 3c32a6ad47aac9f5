#pragma once

#include <vector>

#include "splathand/geometry.hpp"

namespace splathand {

/// A cloud of K anisotropic 3D Gaussians. Scales are the diagonal of S in
/// meters, opacities lie in (0,1), colors are plain RGB in [0,1].
struct GaussianSet {
    std::vector<Vec3> positions;
    std::vector<Quat> orientations;  // unit quaternions
    std::vector<Vec3> scales;
    std::vector<double> opacities;
    std::vector<Vec3> colors;

    int size() const { return static_cast<int>(positions.size()); }
    void validate() const;
};

}  // namespace splathand
