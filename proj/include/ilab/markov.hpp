#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ilab/renewal.hpp"

namespace ilab {

/// Renewal chain with i.i.d. inter-passage times drawn from `tail`.
/// Trial t uses the generator seeded with splitmix64_mix(splitmix64_mix(seed) ^ t), so results do not
/// depend on the worker count or on trial order.
struct ChainConfig {
  TailLaw tail;
  std::uint64_t seed = 1;
  std::size_t n_steps = 50;
  std::size_t trials = 100000;
};

struct RenewalEstimate {
  std::vector<double> u_hat;  ///< fraction of trials with a renewal at n = 0..n_steps
  std::vector<double> ci;     ///< 1.96 * binomial standard error
  std::size_t trials = 0;
};

/// Each trial starts at a renewal epoch (n = 0).
RenewalEstimate simulate_renewal(const ChainConfig& cfg);
void write_renewal_estimate_csv(std::ostream& out, const RenewalEstimate& e);

/// Draws one inter-passage time; returns horizon + 1 for any value beyond `horizon`.
class TailSampler {
public:
  explicit TailSampler(const TailLaw& law);
  std::size_t draw(double u, std::size_t horizon) const;

private:
  const TailLaw& law_;
  std::vector<double> cdf_;
  double tail_mass_ = 0.0;
  double survival(std::size_t n) const;  // tail mass beyond n, n >= K
};

/// sum_k z^k p_k including the tail.
double markov_pressure(const TailLaw& tail, double z);

struct StationaryMeasure {
  std::vector<double> pi;  ///< pi_1..pi_K, pi_k = sum_{l>=k} p_l
  double total = 0.0;      ///< sum over all k, +inf when the mean is infinite
};
StationaryMeasure stationary_measure(const TailLaw& tail, std::size_t k_max);

}  // namespace ilab
