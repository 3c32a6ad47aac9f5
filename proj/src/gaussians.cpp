#include "splathand/gaussians.hpp"

#include "splathand/errors.hpp"

namespace splathand {

void GaussianSet::validate() const {
    const size_t k = positions.size();
    if (orientations.size() != k || scales.size() != k || opacities.size() != k ||
        colors.size() != k) {
        throw StructuralError("GaussianSet field lengths disagree");
    }
    for (size_t i = 0; i < k; ++i) {
        if (std::abs(orientations[i].norm() - 1.0) > 1e-6) {
            throw ValidationError("quaternion " + std::to_string(i) + " is not unit-norm");
        }
        if (scales[i].minCoeff() <= 0.0) {
            throw ValidationError("scale " + std::to_string(i) + " is not strictly positive");
        }
        if (opacities[i] <= 0.0 || opacities[i] >= 1.0) {
            throw ValidationError("opacity " + std::to_string(i) + " is outside (0,1)");
        }
        if (colors[i].minCoeff() < 0.0 || colors[i].maxCoeff() > 1.0) {
            throw ValidationError("color " + std::to_string(i) + " is outside [0,1]");
        }
    }
}

}  // namespace splathand
