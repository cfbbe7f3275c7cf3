#pragma once

#include "finsler/distance.hpp"

namespace finsler::fields {

/// x^i
ScalarField coordinate(int dimension, int i);
/// |x|^2 / 2 (Euclidean)
ScalarField half_square(int dimension);
/// |x - c| (Euclidean)
ScalarField euclidean_radius(const Vec& center);
/// a . x + c
ScalarField linear(const Vec& a, double c = 0.0);
/// -log x^n, the Busemann function of the upward vertical ray in the
/// hyperbolic upper half-space.
ScalarField negative_log_height(int dimension);

/// x -> d(c, x); differential J(x, u) with u the final unit velocity.
ScalarField distance_from(const FinslerStructure& F, const Vec& c, const DistanceOptions& options = {});
/// x -> d(x, q); differential -J(x, u) with u the initial unit velocity.
ScalarField distance_to(const FinslerStructure& F, const Vec& q, const DistanceOptions& options = {});

}  // namespace finsler::fields
