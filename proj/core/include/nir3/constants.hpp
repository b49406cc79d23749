#pragma once

// Shared numerical constants. The surface areas are those of the unit
// spheres S^2 and S^3 in R^3 / R^4.

namespace nir3 {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kAreaS2 = 4.0 * kPi;          // |S^2|
inline constexpr double kVolS3 = 2.0 * kPi * kPi;     // |S^3|

// Gram constants of the bubble family in the H^{1/2} inner product,
//   <d delta/dP_l, d delta/dP_l> -> kBubbleLocGram * t^2   (t -> infinity)
//   <d delta/dt,   d delta/dt>   =  kBubbleRateGram / t^2
// Determined numerically at high resolution and frozen; regression-tested.
inline constexpr double kBubbleLocGram = 2.46740110027233965471;   // = pi^2/4
inline constexpr double kBubbleRateGram = 9.86960440108935861883;  // = pi^2

// Coefficients of the reduced energy gradient in the concentration rates,
//   dI/dt_i = kRateGradTau * tau/(K_i^2 t_i)
//           + kRateGradLap * Lap K_i /(K_i^3 t_i^3)
//           + sum_{j != i} kRateGradInteraction * G_ij/(K_i K_j t_i^2 t_j).
inline constexpr double kRateGradTau = (4.0 / 3.0) * kPi * kAreaS2;
inline constexpr double kRateGradLap = (2.0 / 3.0) * kPi * kAreaS2;
inline constexpr double kRateGradInteraction = 2.0 * kPi * kAreaS2;

// Coefficient of -grad K(P_i) in dI/dP_i. No closed form is available; the
// value is the limit integral int_{R^3} |y|^2 (1+|y|^2)^{-3} dy = 3 pi^2/4,
// computed numerically once and frozen.
inline constexpr double kLocationGrad = 7.40220330081701896414;

}  // namespace nir3
