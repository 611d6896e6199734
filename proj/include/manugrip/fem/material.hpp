#pragma once

#include <stdexcept>

namespace manugrip::fem {

/// Material description: linear elastic constants, density and the fracture
/// stretch-ratio threshold.
struct MaterialParams {
    double youngs_modulus_pa = 300e6;   // walnut-shell-like default
    double poisson_ratio = 0.3;
    double density_kg_m3 = 800.0;
    double fracture_stretch = 1.1;

    double mu() const { return youngs_modulus_pa / (2.0 * (1.0 + poisson_ratio)); }
    double lambda() const {
        return youngs_modulus_pa * poisson_ratio /
               ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
    }

    void validate() const {
        if (!(youngs_modulus_pa > 0.0)) throw std::invalid_argument("Young's modulus must be > 0");
        if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5)) {
            throw std::invalid_argument("Poisson ratio must be in [0, 0.5)");
        }
        if (!(density_kg_m3 > 0.0)) throw std::invalid_argument("density must be > 0");
        if (!(fracture_stretch > 1.0)) throw std::invalid_argument("fracture stretch must be > 1");
    }
};

}  // namespace manugrip::fem
