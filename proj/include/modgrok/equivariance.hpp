#pragma once

#include <cstdint>
#include <vector>

#include "modgrok/dataset.hpp"
#include "modgrok/permutation.hpp"
#include "modgrok/quadnet.hpp"
#include "modgrok/trainer.hpp"

namespace mg {

// Push-forward action of (s1,s2,s3) on weights: input column j of the first
// layer moves to column s1(j) (s2 for the second half), V row j moves to row
// s3(j). Satisfies g(theta; x) = g(tau theta; T x) exactly.
QuadNetParams permute_weights(const QuadNetParams& theta, const PermTriple& sigma);

double max_abs_param_diff(const QuadNetParams& a, const QuadNetParams& b);

// max_x |g(theta; x) - g(tau theta; T x)| over the sample points; covers the
// classification logits too since f_c(.;a,b) = g(.;(a,b,c)).
double check_forward_equivariance(const QuadNetParams& theta, const PermTriple& sigma,
                                  const std::vector<DataPoint>& pts);

// same comparison on per-point gradients of g
double check_gradient_equivariance(const QuadNetParams& theta, const PermTriple& sigma,
                                   const std::vector<DataPoint>& pts);

// Trains twice: from theta_0 on ds, and from tau theta_0 on T ds (same
// config). Returns max |tau theta_t - theta'_t| for t = 0..steps.
std::vector<double> check_training_equivariance(const TrainConfig& cfg, const PermTriple& sigma,
                                                const ModAddDataset& ds);

std::vector<DataPoint> random_triples(int p, int count, std::uint64_t seed);

}  // namespace mg
