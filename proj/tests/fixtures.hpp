#pragma once

#include "pwl/core.hpp"
#include "pwl/market.hpp"

// Maps shared across the test binaries, parameterised by branch slopes.
namespace fixtures {

inline pwl::PwlMap fig4() { return pwl::g3_map(1.0, 0.5, -1.2, 1.2, -1.1); }
inline pwl::PwlMap fig6() { return pwl::g3_map(0.5, 1.0, -1.2, -1.1, -0.4); }
inline pwl::PwlMap fig7(double s_m = -2.82) { return pwl::g3_map(0.5, 0.5, 0.8, s_m, 0.4); }
inline pwl::PwlMap fig8() { return pwl::g3_map(0.4, 1.0, -1.3, -1.1, 0.6993006993); }
inline pwl::PwlMap fig9a() { return pwl::g4_map(1.0, 2.0, -1.3, 1.2, -1.0, 0.9); }
inline pwl::PwlMap fig9c() { return pwl::g4_map(1.0, 2.0, -1.3, 0.9, -1.0, 0.9); }
inline pwl::PwlMap perturbed(double mu_r, double s_m = -2.82) {
    return pwl::g3_map(0.5, 0.5, 0.8, s_m, 0.4, mu_r);
}

// x' = s_L x for x < h, s_R x for x >= h.
inline pwl::PwlMap two_branch(double s_left, double s_right, double h) {
    return pwl::build_map({h}, {pwl::Branch{s_left, 0.0, "L"}, pwl::Branch{s_right, 0.0, "R"}},
                          {pwl::Side::Right});
}

}  // namespace fixtures
