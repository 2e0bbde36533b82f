#include "ilab/markov.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "ilab/error.hpp"
#include "ilab/numeric.hpp"
#include "ilab/parallel.hpp"

namespace ilab {

TailSampler::TailSampler(const TailLaw& law) : law_(law) {
  CompensatedSum s;
  cdf_.reserve(law.K());
  for (double p : law.probs) {
    s.add(p);
    cdf_.push_back(s.value());
  }
  tail_mass_ = law.tail_mass();
}

double TailSampler::survival(std::size_t n) const {
  return law_.tail->c * hurwitz_zeta(law_.tail->alpha, static_cast<double>(n + 1));
}

std::size_t TailSampler::draw(double u, std::size_t horizon) const {
  const double explicit_total = cdf_.empty() ? 0.0 : cdf_.back();
  if (u < explicit_total || !law_.tail || tail_mass_ <= 0.0) {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t k = it == cdf_.end() ? cdf_.size() : static_cast<std::size_t>(it - cdf_.begin()) + 1;
    return std::min(k, horizon + 1);
  }
  // inverse CDF on the power tail: smallest n > K with survival(n) <= remaining
  const std::size_t K = law_.K();
  const double remaining = std::max(tail_mass_ - (u - explicit_total), 0.0);
  if (horizon <= K || survival(horizon) > remaining) return horizon + 1;
  std::size_t lo = K, hi = horizon;  // survival(lo) > remaining >= survival(hi)
  while (hi - lo > 1) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (survival(mid) > remaining)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

RenewalEstimate simulate_renewal(const ChainConfig& cfg) {
  if (cfg.n_steps < 1) throw ValidationError("n_steps must be at least 1");
  if (cfg.trials < 1) throw ValidationError("trials must be at least 1");
  cfg.tail.validate();
  if (!cfg.tail.normalized) throw ValidationError("simulation needs a normalized law");
  const std::size_t N = cfg.n_steps;
  TailSampler sampler(cfg.tail);

  // the seed is mixed once first: with seed ^ t alone, seeds differing in low bits permute the same streams
  const std::uint64_t base = splitmix64_mix(cfg.seed);
  const std::size_t workers = std::max<std::size_t>(thread_count(), 1);
  const std::size_t chunk = (cfg.trials + workers - 1) / workers;
  std::vector<std::vector<std::uint64_t>> counts(workers, std::vector<std::uint64_t>(N + 1, 0));
  parallel_for(0, workers, [&](std::size_t wlo, std::size_t whi) {
    for (std::size_t w = wlo; w < whi; ++w) {
      auto& cnt = counts[w];
      const std::size_t t_end = std::min(cfg.trials, (w + 1) * chunk);
      for (std::size_t t = w * chunk; t < t_end; ++t) {
        SplitMix64 rng(splitmix64_mix(base ^ static_cast<std::uint64_t>(t)));
        std::size_t n = 0;
        ++cnt[0];
        while (true) {
          std::size_t sigma = sampler.draw(rng.uniform(), N - n);
          if (sigma > N - n) break;
          n += sigma;
          ++cnt[n];
        }
      }
    }
  });

  RenewalEstimate e;
  e.trials = cfg.trials;
  e.u_hat.assign(N + 1, 0.0);
  e.ci.assign(N + 1, 0.0);
  const double T = static_cast<double>(cfg.trials);
  for (std::size_t n = 0; n <= N; ++n) {
    std::uint64_t c = 0;
    for (const auto& cnt : counts) c += cnt[n];
    double u = static_cast<double>(c) / T;
    e.u_hat[n] = u;
    e.ci[n] = 1.96 * std::sqrt(u * (1.0 - u) / T);
  }
  return e;
}

void write_renewal_estimate_csv(std::ostream& out, const RenewalEstimate& e) {
  out << "n,u_hat,ci\n" << std::setprecision(17);
  for (std::size_t n = 0; n < e.u_hat.size(); ++n) out << n << ',' << e.u_hat[n] << ',' << e.ci[n] << '\n';
}

double markov_pressure(const TailLaw& tail, double z) {
  if (!(z > 0.0 && z <= 1.0)) throw DomainError("markov_pressure: z must lie in (0,1]");
  return moment(tail, 0.0, z).value;
}

StationaryMeasure stationary_measure(const TailLaw& tail, std::size_t k_max) {
  if (k_max < 1) throw ValidationError("k_max must be at least 1");
  TailSums ts = tail_sums(tail, k_max);
  StationaryMeasure st;
  st.pi.assign(ts.d.begin(), ts.d.begin() + static_cast<std::ptrdiff_t>(k_max));
  st.total = first_moment(tail);
  return st;
}

}  // namespace ilab
