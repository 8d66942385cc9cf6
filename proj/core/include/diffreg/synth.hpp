#pragma once

#include <concepts>
#include <cstdint>
#include <random>
#include <string>

#include "diffreg/field.hpp"

namespace diffreg {

enum class SynthCase { translation, rotation, swirl, compress };

std::string to_string(SynthCase c);
SynthCase synth_case_from_string(const std::string& s);

/// Uniform double in [0, 1) from the top 53 bits; identical on every
/// platform, unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <std::floating_point Real>
struct SynthProblem {
  ScalarField<Real> m0;
  ScalarField<Real> m1;
  VectorField<Real> v_true;
};

/// Sum of periodic von Mises bumps, rescaled to [0, 1].
ScalarField<double> synth_template(const Grid& grid, std::uint64_t seed, bool bump_at_corner = false);

/// Band-limited velocity of the case. Only the translation offset depends
/// on the seed.
VectorField<double> synth_velocity(const Grid& grid, SynthCase c, std::uint64_t seed);

/// m1 = m0 transported by v_true, evaluated along characteristics: the
/// closed-form template at the RK4 departure point (64 steps) of every node.
/// n must be a power of two >= 32.
template <std::floating_point Real>
SynthProblem<Real> synth_case(SynthCase c, int n, std::uint64_t seed, int dim = 2, int time_steps = 4);

}  // namespace diffreg
