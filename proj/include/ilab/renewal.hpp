#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ilab {

/// Declares p_n ~ c n^{-alpha} for every n beyond the explicit atoms.
struct TailDescriptor {
  double alpha = 0.0;
  double c = 0.0;
};

/// Return-time law p_1, p_2, ... given by explicit atoms and an optional power tail.
struct TailLaw {
  std::vector<double> probs;  ///< probs[n-1] = p_n for n = 1..K
  std::optional<TailDescriptor> tail;
  bool normalized = true;

  std::size_t K() const { return probs.size(); }
  /// p_n for any n >= 1, extending by the tail descriptor beyond K.
  double p(std::size_t n) const;
  double explicit_mass() const;
  /// Mass carried by the tail beyond K (0 without descriptor).
  double tail_mass() const;
  /// Throws ValidationError if the invariants fail.
  void validate() const;
};

/// Build a law from explicit atoms; `c_auto` fills the tail constant so total mass is 1.
TailLaw make_law(std::vector<double> probs, std::optional<TailDescriptor> tail = std::nullopt,
                 bool normalized = true);
TailLaw make_law_auto_tail(std::vector<double> probs, double alpha);

/// Builtins: `geometric:q=<v>`, `power:alpha=<v>`, `uniform2`; anything else is read as a CSV path.
TailLaw parse_tail_spec(const std::string& spec);
TailLaw read_tail_csv(std::istream& in);
void write_tail_csv(std::ostream& out, const TailLaw& law);

struct RenewalSeq {
  std::vector<double> a;  ///< a_0..a_N
  double M1 = 0.0;        ///< first moment, +inf when the mean is infinite
  std::optional<std::vector<double>> b;
};

/// a_n from the renewal recurrence. Direct convolution up to 2^15 terms, blocked FFT above.
RenewalSeq renewal_sequence(const TailLaw& law, std::size_t n_max);

enum class ConvolutionMethod { automatic, direct, fft };
RenewalSeq renewal_sequence(const TailLaw& law, std::size_t n_max, ConvolutionMethod method);

struct TailSums {
  std::vector<double> d;   ///< d_n = sum_{k>n} p_k
  std::vector<double> d1;  ///< d1_n = sum_{l>n} d_l (+inf for infinite mean)
};
TailSums tail_sums(const TailLaw& law, std::size_t n_max);

/// b_n = M_1 a_n - 1. Throws DomainError("infinite M_1") when the mean is infinite.
std::vector<double> b_sequence(const RenewalSeq& seq);

struct MomentTable {
  double gamma = 0.0;
  double z = 1.0;
  double value = 0.0;
  bool finite = true;
};
MomentTable moment(const TailLaw& law, double gamma, double z);

/// First moment sum k p_k (+inf when infinite).
double first_moment(const TailLaw& law);

struct GfValues {
  double A = 0.0;
  double B = 0.0;  ///< NaN when M_1 is infinite
  double D = 0.0;
  double D1 = 0.0;
  double P = 0.0;  ///< sum p_n z^n
};
GfValues gf_eval(const TailLaw& law, double z);

struct ErgodicDegree {
  enum class Kind { finite, infinite_degree, undefined };
  Kind kind = Kind::finite;
  double d = 0.0;
};
ErgodicDegree ergodic_degree(const TailLaw& law);
/// Classify from explicit atoms only: compares local decay exponents of p_n on two halves
/// of the window and flags a drifting exponent as undefined.
ErgodicDegree ergodic_degree_from_atoms(const TailLaw& law, std::size_t n_lo, std::size_t n_hi);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n_lo = 0;
  std::size_t n_hi = 0;
  double stderr_slope = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
  bool slowly_varying = false;
};

/// Log-log least squares of seq[n] over n in [n_lo, n_hi] on log-spaced samples.
ExponentFit fit_exponent(const std::vector<double>& seq, std::size_t n_lo, std::size_t n_hi,
                         std::size_t samples = 40);
/// Same, for a sequence given on explicit abscissae.
ExponentFit fit_exponent_xy(const std::vector<double>& n, const std::vector<double>& value);

void write_series_csv(std::ostream& out, const std::vector<double>& v, const std::string& column);

}  // namespace ilab
