#include "ilab/renewal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "ilab/error.hpp"
#include "ilab/numeric.hpp"

namespace ilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse " + what + " from '" + s + "'");
  }
}

// key=value pairs after the first ':'
std::map<std::string, std::string> parse_kv(const std::string& body) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("expected key=value in '" + item + "'");
    kv[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
  }
  return kv;
}

}  // namespace

double TailLaw::p(std::size_t n) const {
  if (n == 0) return 0.0;
  if (n <= probs.size()) return probs[n - 1];
  if (tail) return tail->c * std::pow(static_cast<double>(n), -tail->alpha);
  return 0.0;
}

double TailLaw::explicit_mass() const {
  CompensatedSum s;
  for (double v : probs) s.add(v);
  return s.value();
}

double TailLaw::tail_mass() const {
  if (!tail) return 0.0;
  return tail->c * power_tail_sum(tail->alpha, static_cast<double>(probs.size() + 1));
}

void TailLaw::validate() const {
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(probs[i]) || probs[i] < 0.0)
      throw ValidationError("negative or non-finite mass at n=" + std::to_string(i + 1));
  }
  double m = explicit_mass();
  if (m > 1.0 + 1e-12) throw ValidationError("explicit mass exceeds 1");
  if (tail) {
    if (!(tail->alpha > 1.0)) throw ValidationError("tail exponent must exceed 1");
    if (!(tail->c > 0.0) || !std::isfinite(tail->c)) throw ValidationError("tail constant must be positive");
  }
  if (normalized && std::abs(m + tail_mass() - 1.0) > 1e-9)
    throw ValidationError("law flagged normalized but total mass is " + std::to_string(m + tail_mass()));
}

TailLaw make_law(std::vector<double> probs, std::optional<TailDescriptor> tail, bool normalized) {
  TailLaw law;
  law.probs = std::move(probs);
  law.tail = tail;
  law.normalized = normalized;
  law.validate();
  return law;
}

TailLaw make_law_auto_tail(std::vector<double> probs, double alpha) {
  TailLaw law;
  law.probs = std::move(probs);
  if (!(alpha > 1.0)) throw ValidationError("tail exponent must exceed 1");
  double rest = 1.0 - law.explicit_mass();
  if (rest <= 0.0) throw ValidationError("no mass left for the tail");
  double c = rest / power_tail_sum(alpha, static_cast<double>(law.probs.size() + 1));
  law.tail = TailDescriptor{alpha, c};
  law.normalized = true;
  law.validate();
  return law;
}

TailLaw parse_tail_spec(const std::string& spec) {
  auto colon = spec.find(':');
  std::string head = trim(colon == std::string::npos ? spec : spec.substr(0, colon));
  std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "uniform2") return make_law({0.5, 0.5});
  if (head == "geometric") {
    auto kv = parse_kv(body);
    if (!kv.count("q")) throw ValidationError("geometric needs q=<v>");
    double q = parse_double(kv["q"], "q");
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("geometric q must lie in (0,1)");
    std::vector<double> probs;
    double rest = 1.0;
    for (std::size_t n = 1; rest > 1e-18 && n < 100000; ++n) {
      double pn = (1.0 - q) * std::pow(q, static_cast<double>(n - 1));
      probs.push_back(pn);
      rest = std::pow(q, static_cast<double>(n));
    }
    return make_law(std::move(probs));
  }
  if (head == "power") {
    auto kv = parse_kv(body);
    if (!kv.count("alpha")) throw ValidationError("power needs alpha=<v>");
    double alpha = parse_double(kv["alpha"], "alpha");
    if (!(alpha > 1.0)) throw ValidationError("power alpha must exceed 1");
    std::size_t K = 64;
    if (kv.count("K")) K = static_cast<std::size_t>(parse_double(kv["K"], "K"));
    double c = 1.0 / hurwitz_zeta(alpha, 1.0);
    std::vector<double> probs(K);
    for (std::size_t n = 1; n <= K; ++n) probs[n - 1] = c * std::pow(static_cast<double>(n), -alpha);
    return make_law(std::move(probs), TailDescriptor{alpha, c});
  }
  std::ifstream in(spec);
  if (!in) throw ValidationError("unknown tail spec or unreadable file: '" + spec + "'");
  return read_tail_csv(in);
}

TailLaw read_tail_csv(std::istream& in) {
  std::string line;
  std::map<std::size_t, double> atoms;
  std::optional<double> alpha;
  std::optional<std::string> cstr;
  bool header_seen = false;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      auto pos = t.find("tail:");
      if (pos != std::string::npos) {
        auto kv = parse_kv(t.substr(pos + 5));
        if (!kv.count("alpha") || !kv.count("c")) throw ValidationError("tail line needs alpha and c");
        alpha = parse_double(kv["alpha"], "alpha");
        cstr = kv["c"];
      }
      continue;
    }
    if (!header_seen) {
      if (t != "n,p") throw ValidationError("expected header 'n,p'");
      header_seen = true;
      continue;
    }
    auto comma = t.find(',');
    if (comma == std::string::npos) throw ValidationError("bad row '" + t + "'");
    double n = parse_double(trim(t.substr(0, comma)), "n");
    double p = parse_double(trim(t.substr(comma + 1)), "p");
    if (n < 1 || n != std::floor(n)) throw ValidationError("n must be a positive integer");
    atoms[static_cast<std::size_t>(n)] = p;
  }
  if (!header_seen) throw ValidationError("empty law file");
  std::size_t K = atoms.empty() ? 0 : atoms.rbegin()->first;
  std::vector<double> probs(K, 0.0);
  for (auto& [n, p] : atoms) probs[n - 1] = p;
  if (alpha) {
    if (*cstr == "auto") return make_law_auto_tail(std::move(probs), *alpha);
    double c = parse_double(*cstr, "c");
    TailLaw law;
    law.probs = std::move(probs);
    law.tail = TailDescriptor{*alpha, c};
    law.normalized = std::abs(law.explicit_mass() + law.tail_mass() - 1.0) <= 1e-9;
    law.validate();
    return law;
  }
  TailLaw law;
  law.probs = std::move(probs);
  law.normalized = std::abs(law.explicit_mass() - 1.0) <= 1e-9;
  law.validate();
  return law;
}

void write_tail_csv(std::ostream& out, const TailLaw& law) {
  out << "n,p\n" << std::setprecision(17);
  for (std::size_t n = 1; n <= law.K(); ++n) out << n << ',' << law.probs[n - 1] << '\n';
  if (law.tail) out << "# tail: alpha=" << law.tail->alpha << ",c=" << law.tail->c << '\n';
}

// ---------------------------------------------------------------------------
// renewal recurrence

namespace {

struct FftConvolver {
  std::size_t size = 0;
  std::vector<double> in;
  std::vector<std::array<double, 2>> fa, fb;
  fftw_plan fwd = nullptr, bwd = nullptr;
  double* buf = nullptr;
  fftw_complex* cbuf = nullptr;

  explicit FftConvolver(std::size_t n) : size(n) {
    buf = fftw_alloc_real(n);
    cbuf = fftw_alloc_complex(n / 2 + 1);
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), buf, cbuf, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_1d(static_cast<int>(n), cbuf, buf, FFTW_ESTIMATE);
    fa.resize(n / 2 + 1);
    fb.resize(n / 2 + 1);
  }
  ~FftConvolver() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(buf);
    fftw_free(cbuf);
  }
  FftConvolver(const FftConvolver&) = delete;
  FftConvolver& operator=(const FftConvolver&) = delete;

  void transform(const double* x, std::size_t len, std::vector<std::array<double, 2>>& out) {
    std::fill(buf, buf + size, 0.0);
    std::copy(x, x + len, buf);
    fftw_execute(fwd);
    for (std::size_t i = 0; i < size / 2 + 1; ++i) {
      out[i][0] = cbuf[i][0];
      out[i][1] = cbuf[i][1];
    }
  }
  // result[k] = sum_i x[i] y[k-i], k < size
  const double* convolve(const double* x, std::size_t lx, const double* y, std::size_t ly) {
    transform(x, lx, fa);
    transform(y, ly, fb);
    for (std::size_t i = 0; i < size / 2 + 1; ++i) {
      double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
      double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
      cbuf[i][0] = re / static_cast<double>(size);
      cbuf[i][1] = im / static_cast<double>(size);
    }
    fftw_execute(bwd);
    return buf;
  }
};

class OnlineRenewal {
public:
  OnlineRenewal(const std::vector<double>& p, std::size_t n_max)
      : p_(p), a_(n_max + 1, 0.0), acc_(n_max + 1) {}

  std::vector<double> run() {
    solve(0, a_.size());
    return a_;
  }

private:
  static constexpr std::size_t kLeaf = 256;
  const std::vector<double>& p_;  // p_[j] = p_j, p_[0] = 0
  std::vector<double> a_;
  std::vector<CompensatedSum> acc_;
  std::map<std::size_t, std::unique_ptr<FftConvolver>> plans_;

  FftConvolver& plan(std::size_t n) {
    auto& slot = plans_[n];
    if (!slot) slot = std::make_unique<FftConvolver>(n);
    return *slot;
  }

  void leaf(std::size_t l, std::size_t r) {
    for (std::size_t n = l; n < r; ++n) {
      if (n == 0) {
        a_[0] = 1.0;
        continue;
      }
      CompensatedSum s = acc_[n];
      for (std::size_t m = l; m < n; ++m) s.add(p_[n - m] * a_[m]);
      a_[n] = s.value();
    }
  }

  void solve(std::size_t l, std::size_t r) {
    if (r - l <= kLeaf) {
      leaf(l, r);
      return;
    }
    std::size_t mid = l + (r - l) / 2;
    solve(l, mid);
    // contributions of a[l, mid) to n in [mid, r): sum_m a_m p_{n-m}
    std::size_t la = mid - l;
    std::size_t lp = r - l;  // p_0 .. p_{r-l-1}
    std::size_t n = 1;
    while (n < la + lp) n <<= 1;
    const double* conv = plan(n).convolve(&a_[l], la, p_.data(), std::min(lp, p_.size()));
    for (std::size_t t = mid; t < r; ++t) acc_[t].add(conv[t - l]);
    solve(mid, r);
  }
};

}  // namespace

double first_moment(const TailLaw& law) {
  CompensatedSum s;
  for (std::size_t n = 1; n <= law.K(); ++n) s.add(static_cast<double>(n) * law.probs[n - 1]);
  if (law.tail) {
    if (law.tail->alpha <= 2.0) return kInf;
    s.add(law.tail->c * power_tail_sum(law.tail->alpha - 1.0, static_cast<double>(law.K() + 1)));
  }
  return s.value();
}

RenewalSeq renewal_sequence(const TailLaw& law, std::size_t n_max) {
  return renewal_sequence(law, n_max, ConvolutionMethod::automatic);
}

RenewalSeq renewal_sequence(const TailLaw& law, std::size_t n_max, ConvolutionMethod method) {
  if (n_max < 1) throw ValidationError("n_max must be at least 1");
  law.validate();
  std::size_t support = law.tail ? n_max : std::min(law.K(), n_max);
  std::vector<double> p(support + 1, 0.0);
  for (std::size_t j = 1; j <= support; ++j) p[j] = law.p(j);

  bool use_fft = method == ConvolutionMethod::fft ||
                 (method == ConvolutionMethod::automatic && n_max > (std::size_t{1} << 15) &&
                  support > 512);
  RenewalSeq seq;
  if (use_fft) {
    p.resize(n_max + 1, 0.0);
    seq.a = OnlineRenewal(p, n_max).run();
  } else {
    seq.a.assign(n_max + 1, 0.0);
    seq.a[0] = 1.0;
    for (std::size_t n = 1; n <= n_max; ++n) {
      CompensatedSum s;
      std::size_t jm = std::min(n, support);
      for (std::size_t j = 1; j <= jm; ++j) s.add(p[j] * seq.a[n - j]);
      seq.a[n] = s.value();
    }
  }
  seq.M1 = first_moment(law);
  if (std::isfinite(seq.M1)) seq.b = b_sequence(seq);
  return seq;
}

TailSums tail_sums(const TailLaw& law, std::size_t n_max) {
  law.validate();
  TailSums ts;
  ts.d.assign(n_max + 1, 0.0);
  ts.d1.assign(n_max + 1, 0.0);
  const std::size_t N = n_max;
  const std::size_t K = law.K();
  // d_N = sum_{k>N} p_k
  CompensatedSum dN;
  for (std::size_t k = N + 1; k <= K; ++k) dN.add(law.probs[k - 1]);
  if (law.tail)
    dN.add(law.tail->c * power_tail_sum(law.tail->alpha, static_cast<double>(std::max(N, K) + 1)));
  // d1_N = sum_{k>N+1} (k-N-1) p_k
  double d1N = 0.0;
  {
    CompensatedSum s;
    for (std::size_t k = N + 2; k <= K; ++k) s.add(static_cast<double>(k - N - 1) * law.probs[k - 1]);
    if (law.tail) {
      if (law.tail->alpha <= 2.0) {
        d1N = kInf;
      } else {
        double k0 = static_cast<double>(std::max(N + 2, K + 1));
        s.add(law.tail->c * (power_tail_sum(law.tail->alpha - 1.0, k0) -
                             static_cast<double>(N + 1) * power_tail_sum(law.tail->alpha, k0)));
      }
    }
    if (std::isfinite(d1N)) d1N = s.value();
  }
  CompensatedSum dacc = dN;
  ts.d[N] = dacc.value();
  for (std::size_t n = N; n >= 1; --n) {
    dacc.add(law.p(n));
    ts.d[n - 1] = dacc.value();
  }
  if (!std::isfinite(d1N)) {
    std::fill(ts.d1.begin(), ts.d1.end(), kInf);
  } else {
    CompensatedSum d1acc;
    d1acc.add(d1N);
    ts.d1[N] = d1acc.value();
    for (std::size_t n = N; n >= 1; --n) {
      d1acc.add(ts.d[n]);
      ts.d1[n - 1] = d1acc.value();
    }
  }
  return ts;
}

std::vector<double> b_sequence(const RenewalSeq& seq) {
  if (!std::isfinite(seq.M1)) throw DomainError("infinite M_1");
  std::vector<double> b(seq.a.size());
  for (std::size_t n = 0; n < b.size(); ++n) b[n] = seq.M1 * seq.a[n] - 1.0;
  return b;
}

namespace {

// sum_{k>K} z^k k^gamma c k^{-alpha} for 0 < z < 1
double tail_series(const TailDescriptor& t, std::size_t K, double gamma, double z) {
  CompensatedSum s;
  const double e = gamma - t.alpha;
  const double lz = std::log(z);
  const double turn = e > 0 ? e / -lz : 0.0;
  for (std::size_t k = K + 1; k < K + 200000000ULL; ++k) {
    double kd = static_cast<double>(k);
    double term = t.c * std::exp(kd * lz + e * std::log(kd));
    s.add(term);
    if (kd > turn && term < 1e-18 * std::abs(s.value())) break;
    if (term == 0.0 && kd > turn) break;
  }
  return s.value();
}

}  // namespace

MomentTable moment(const TailLaw& law, double gamma, double z) {
  if (!(z > 0.0 && z <= 1.0)) throw DomainError("moment: z must lie in (0,1]");
  if (gamma < 0.0) throw DomainError("moment: gamma must be nonnegative");
  MomentTable mt{gamma, z, 0.0, true};
  CompensatedSum s;
  for (std::size_t k = 1; k <= law.K(); ++k) {
    double kd = static_cast<double>(k);
    s.add(std::pow(z, kd) * std::pow(kd, gamma) * law.probs[k - 1]);
  }
  if (law.tail) {
    if (z == 1.0) {
      if (law.tail->alpha - gamma <= 1.0) {
        mt.finite = false;
        mt.value = kInf;
        return mt;
      }
      s.add(law.tail->c * power_tail_sum(law.tail->alpha - gamma, static_cast<double>(law.K() + 1)));
    } else {
      s.add(tail_series(*law.tail, law.K(), gamma, z));
    }
  }
  mt.value = s.value();
  return mt;
}

GfValues gf_eval(const TailLaw& law, double z) {
  if (!(z >= 0.0 && z < 1.0)) throw DomainError("gf_eval: z must lie in [0,1)");
  law.validate();
  GfValues g;
  double total = law.explicit_mass() + law.tail_mass();
  if (z == 0.0) {
    g.P = 0.0;
    g.A = 1.0;
    g.D = total;
    double M1 = first_moment(law);
    g.D1 = std::isfinite(M1) ? M1 - total : kInf;
    g.B = std::isfinite(M1) ? g.D1 / g.D : std::numeric_limits<double>::quiet_NaN();
    return g;
  }
  g.P = moment(law, 0.0, z).value;
  g.A = 1.0 / (1.0 - g.P);
  const double M1 = first_moment(law);
  std::size_t terms = static_cast<std::size_t>(std::ceil(std::log(1e-18) / std::log(z))) + 2;
  terms = std::min<std::size_t>(terms, 50000000);
  CompensatedSum D, D1;
  double dn = total;        // d_0
  double d1n = M1 - total;  // d1_0 = sum_{l>0} d_l
  double zn = 1.0;
  for (std::size_t n = 0; n < terms; ++n) {
    D.add(dn * zn);
    if (std::isfinite(d1n)) D1.add(d1n * zn);
    zn *= z;
    dn -= law.p(n + 1);
    if (dn < 0) dn = 0;
    d1n -= dn;
    if (d1n < 0) d1n = 0;
  }
  g.D = D.value();
  if (std::isfinite(M1)) {
    g.D1 = D1.value();
    g.B = g.D1 / g.D;
  } else {
    g.D1 = kInf;
    g.B = std::numeric_limits<double>::quiet_NaN();
  }
  return g;
}

ErgodicDegree ergodic_degree(const TailLaw& law) {
  law.validate();
  if (law.tail) return {ErgodicDegree::Kind::finite, law.tail->alpha - 2.0};
  return {ErgodicDegree::Kind::infinite_degree, kInf};
}

ErgodicDegree ergodic_degree_from_atoms(const TailLaw& law, std::size_t n_lo, std::size_t n_hi) {
  if (n_hi > law.K()) throw ValidationError("window exceeds explicit atoms");
  std::vector<double> seq(law.K() + 1, 0.0);
  for (std::size_t n = 1; n <= law.K(); ++n) seq[n] = law.probs[n - 1];
  for (std::size_t n = n_lo; n <= n_hi; ++n)
    if (seq[n] <= 0.0) return {ErgodicDegree::Kind::infinite_degree, kInf};
  std::size_t mid = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_lo) * n_hi));
  ExponentFit lo = fit_exponent(seq, n_lo, mid, 30);
  ExponentFit hi = fit_exponent(seq, mid, n_hi, 30);
  double a1 = -lo.slope, a2 = -hi.slope;
  if (a1 > 50.0 && a2 > 50.0) return {ErgodicDegree::Kind::infinite_degree, kInf};
  if (std::abs(a1 - a2) > 0.05) return {ErgodicDegree::Kind::undefined, std::numeric_limits<double>::quiet_NaN()};
  ExponentFit all = fit_exponent(seq, n_lo, n_hi, 40);
  return {ErgodicDegree::Kind::finite, -all.slope - 2.0};
}

ExponentFit fit_exponent_xy(const std::vector<double>& n, const std::vector<double>& value) {
  if (n.size() != value.size()) throw ValidationError("fit: size mismatch");
  if (n.size() < 20) throw ValidationError("fit needs at least 20 sample points");
  std::vector<double> lx, ly, llx;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(value[i] > 0.0) || !(n[i] > 0.0)) throw DomainError("fit: nonpositive value in window");
    lx.push_back(std::log(n[i]));
    ly.push_back(std::log(value[i]));
  }
  LinearFit f = least_squares(lx, ly);
  ExponentFit out;
  out.slope = f.slope;
  out.intercept = f.intercept;
  out.stderr_slope = f.stderr_slope;
  out.r_squared = f.r_squared;
  out.points = n.size();
  out.n_lo = static_cast<std::size_t>(n.front());
  out.n_hi = static_cast<std::size_t>(n.back());
  bool loglog_ok = true;
  for (double x : lx)
    if (x <= 0.0) loglog_ok = false;
  if (loglog_ok && std::abs(f.slope) < 0.25) {
    for (double x : lx) llx.push_back(std::log(x));
    LinearFit g = least_squares(llx, ly);
    out.slowly_varying = g.sse <= f.sse * (1.0 + 1e-9) + 1e-24;
  }
  return out;
}

ExponentFit fit_exponent(const std::vector<double>& seq, std::size_t n_lo, std::size_t n_hi,
                         std::size_t samples) {
  if (!(n_lo >= 1 && n_lo < n_hi)) throw ValidationError("fit window must satisfy 1 <= n_lo < n_hi");
  if (n_hi >= seq.size()) throw ValidationError("fit window exceeds sequence length");
  for (std::size_t n = n_lo; n <= n_hi; ++n)
    if (!(seq[n] > 0.0)) throw DomainError("fit: nonpositive value in window");
  auto idx = log_spaced_indices(n_lo, n_hi, std::max<std::size_t>(samples, 20));
  if (idx.size() < 20) {
    // dense fallback for short windows
    idx.clear();
    for (std::size_t n = n_lo; n <= n_hi; ++n) idx.push_back(n);
  }
  std::vector<double> x, y;
  for (auto n : idx) {
    x.push_back(static_cast<double>(n));
    y.push_back(seq[n]);
  }
  ExponentFit f = fit_exponent_xy(x, y);
  f.n_lo = n_lo;
  f.n_hi = n_hi;
  return f;
}

void write_series_csv(std::ostream& out, const std::vector<double>& v, const std::string& column) {
  out << "n," << column << '\n' << std::setprecision(17);
  for (std::size_t n = 0; n < v.size(); ++n) out << n << ',' << v[n] << '\n';
}

}  // namespace ilab
