#pragma once

#include "modgrok/quadnet.hpp"

namespace mg {

// Analytic interpolating weights built from Fourier features. For odd p the
// forward map is exactly output_scale * 4p * 1((a+b-q) mod p == 0).
enum class ConstructionVariant { EightP, FourP };

struct ConstructionSpec {
    int p = 3;
    ConstructionVariant variant = ConstructionVariant::EightP;
    double output_scale = 1.0;  // multiplies V only
};

// Eight units per frequency k = 0..p-1, h = 8p.
QuadNetParams build_8p(const ConstructionSpec& spec);

// Halved frequency range k = 0..(p-1)/2 with doubled V coefficients for
// k >= 1 and an undoubled constant block at k = 0; h = 4p+4.
QuadNetParams build_4p(const ConstructionSpec& spec);

QuadNetParams build_construction(const ConstructionSpec& spec);

// Widen theta to h_target by copying every unit k = floor(h_target/h) times
// at magnitude k^{-1/3}; spare units stay zero. Forward outputs are
// preserved (3-homogeneity: k copies * k^{-1} each).
QuadNetParams duplicate_shrink(const QuadNetParams& theta, int h_target);

}  // namespace mg
