#include "modgrok/fourier.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mg {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

// variant tables: f=0 cos, f=1 sin; columns are (first input, second input, V)
constexpr int kFunc[8][3] = {{0, 0, 0}, {0, 0, 0}, {1, 1, 0}, {1, 1, 0},
                             {1, 0, 1}, {1, 0, 1}, {0, 1, 1}, {0, 1, 1}};
constexpr double kSign[8][3] = {{+1, +1, +1}, {+1, -1, -1}, {+1, +1, -1}, {+1, -1, +1},
                                {+1, +1, +1}, {+1, -1, -1}, {+1, +1, +1}, {-1, +1, -1}};

double wave(int f, double x) { return f == 0 ? std::cos(x) : std::sin(x); }

void check_odd(int p) {
    if (p < 3 || p % 2 == 0)
        throw std::invalid_argument("construction needs odd p >= 3 (roots-of-unity sum)");
}

// write the 8 units of frequency k at unit offset `base`, with V multiplied
// by `vscale`
void fill_block(QuadNetParams& t, int k, int base, double vscale) {
    const int p = t.p, h = t.h;
    const double ang = kTau * k / p;
    for (int j = 0; j < 8; ++j) {
        int unit = base + j;
        for (int n = 0; n < p; ++n) {
            t.wt[std::size_t(n) * h + unit] = kSign[j][0] * wave(kFunc[j][0], ang * n);
            t.wt[std::size_t(n + p) * h + unit] = kSign[j][1] * wave(kFunc[j][1], ang * n);
        }
        for (int q = 0; q < p; ++q)
            t.v[std::size_t(q) * h + unit] = vscale * kSign[j][2] * wave(kFunc[j][2], ang * q);
    }
}

}  // namespace

QuadNetParams build_8p(const ConstructionSpec& spec) {
    check_odd(spec.p);
    QuadNetParams t = QuadNetParams::zeros(spec.p, 8 * spec.p);
    for (int k = 0; k < spec.p; ++k) fill_block(t, k, 8 * k, spec.output_scale);
    return t;
}

QuadNetParams build_4p(const ConstructionSpec& spec) {
    check_odd(spec.p);
    const int nfreq = (spec.p - 1) / 2;
    QuadNetParams t = QuadNetParams::zeros(spec.p, 8 * (nfreq + 1));
    fill_block(t, 0, 0, spec.output_scale);  // constant term of the halved sum
    for (int k = 1; k <= nfreq; ++k) fill_block(t, k, 8 * k, 2.0 * spec.output_scale);
    return t;
}

QuadNetParams build_construction(const ConstructionSpec& spec) {
    return spec.variant == ConstructionVariant::EightP ? build_8p(spec) : build_4p(spec);
}

QuadNetParams duplicate_shrink(const QuadNetParams& theta, int h_target) {
    if (h_target < theta.h) throw std::invalid_argument("duplicate_shrink: h_target < source h");
    const int copies = h_target / theta.h;
    const double scale = std::pow(double(copies), -1.0 / 3.0);
    QuadNetParams out = QuadNetParams::zeros(theta.p, h_target);
    for (int j = 0; j < 2 * theta.p; ++j) {
        const double* src = theta.wt_row(j);
        double* dst = out.wt_row(j);
        for (int u = 0; u < theta.h; ++u)
            for (int c = 0; c < copies; ++c) dst[u * copies + c] = scale * src[u];
    }
    for (int q = 0; q < theta.p; ++q) {
        const double* src = theta.v_row(q);
        double* dst = out.v_row(q);
        for (int u = 0; u < theta.h; ++u)
            for (int c = 0; c < copies; ++c) dst[u * copies + c] = scale * src[u];
    }
    return out;
}

}  // namespace mg
