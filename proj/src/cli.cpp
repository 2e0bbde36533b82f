#include "ilab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>

#include "ilab/error.hpp"
#include "ilab/interval_map.hpp"
#include "ilab/markov.hpp"
#include "ilab/mixing.hpp"
#include "ilab/numeric.hpp"
#include "ilab/parallel.hpp"
#include "ilab/tower.hpp"
#include "ilab/transfer.hpp"
#include "ilab/zeta.hpp"

namespace ilab {

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Every option of the chosen subcommand and of the top level, with its resolved value.
std::string resolved_config(const CLI::App& app, const CLI::App& sub) {
  std::ostringstream os;
  bool first = true;
  auto emit = [&](const CLI::App& a) {
    for (const CLI::Option* o : a.get_options()) {
      std::string name = o->get_name(false, true);
      if (name.empty() || name == "--help" || name == "-h") continue;
      std::string value;
      if (o->count() > 0) {
        auto res = o->results();
        for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
        if (o->get_type_size() == 0 && value.empty()) value = "true";
      } else {
        value = o->get_default_str();
      }
      if (value.empty()) continue;
      os << (first ? "" : " ") << name.substr(name.find_first_not_of('-')) << '=' << value;
      first = false;
    }
  };
  emit(app);
  emit(sub);
  return os.str();
}

void write_header(std::ostream& out, const std::string& command, const std::string& config, std::uint64_t seed) {
  out << "# intermittency-lab " << kVersion << '\n';
  out << "# command: " << command << '\n';
  out << "# config: " << config << '\n';
  out << "# seed: " << seed << '\n';
}

std::vector<std::size_t> dyadic_points(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> v;
  for (std::size_t n = lo; n <= hi; n *= 2) v.push_back(n);
  if (v.empty() || v.back() != hi) v.push_back(hi);
  return v;
}

struct GlobalOpts {
  std::uint64_t seed = 1;
  std::optional<std::size_t> threads;
  std::string out_path;
};

struct RenewalOpts {
  std::string tail;
  std::size_t n_max = 1000;
  std::string method = "auto";
  bool with_b = false;
};

struct MapOpts {
  std::string map = "lsv:s=1";
  std::size_t n_max = 100;
  std::size_t distortion = 0;
  std::size_t samples = 200;
};

struct PressureOpts {
  std::string map = "lsv:s=0.5";
  std::size_t N = 400;
  std::size_t grid = 1024;
  double fd_step = 1e-3;
  int order = 1;
  std::optional<double> triple_z;
};

struct MixingOpts {
  std::string map = "lsv:s=0.5";
  std::string mode = "v";
  std::size_t n_max = 2000;
  std::size_t grid = 1024;
  std::size_t J = 0;
  std::string set = "intervals:0.6-0.9";
  std::string f = "pow:0.6";
  std::string g = "cos:1";
  std::size_t ell = 6;
  std::size_t obs_levels = 200;
  std::size_t orbit_len = 10000000;
  std::size_t fit_lo = 200;
};

struct ZetaOpts {
  std::string map = "lsv:s=1";
  std::string markov_tail;
  std::string mode = "consistency";
  std::size_t N = 20;
  std::size_t L = 10;
  double z = 0.5;
  double w = 1.0;
  double prune = 1e-12;
  std::size_t n_max = 14;
  std::size_t grid = 1024;
};

struct MarkovOpts {
  std::string tail;
  std::string mode = "simulate";
  std::size_t n_max = 50;
  std::size_t trials = 100000;
  double z = 1.0;
  std::size_t k_max = 100;
};

int run_renewal(const RenewalOpts& o, std::ostream& out) {
  TailLaw law = parse_tail_spec(o.tail);
  ConvolutionMethod method = ConvolutionMethod::automatic;
  if (o.method == "direct") method = ConvolutionMethod::direct;
  else if (o.method == "fft") method = ConvolutionMethod::fft;
  RenewalSeq seq = renewal_sequence(law, o.n_max, method);
  out << "# M1: " << std::setprecision(17) << seq.M1 << '\n';
  if (o.with_b) {
    auto b = b_sequence(seq);
    out << "n,a,b\n";
    for (std::size_t n = 0; n <= o.n_max; ++n) out << n << ',' << seq.a[n] << ',' << b[n] << '\n';
  } else {
    write_series_csv(out, seq.a, "a");
  }
  return kExitOk;
}

int run_map(const MapOpts& o, std::uint64_t seed, std::ostream& out) {
  MapModel m = parse_map_spec(o.map);
  if (o.distortion > 0) {
    auto sups = distortion_check(m, o.distortion, o.samples, seed);
    out << "ell,sup\n" << std::setprecision(17);
    for (std::size_t l = 0; l < sups.size(); ++l) out << l << ',' << sups[l] << '\n';
    return kExitOk;
  }
  write_geometry_csv(out, level_sets(m, o.n_max));
  return kExitOk;
}

int run_pressure(const PressureOpts& o, std::ostream& out) {
  MapModel m = parse_map_spec(o.map);
  if (o.triple_z) {
    InducedOperator op(m, o.N, o.grid);
    write_triple_csv(out, leading_triple(op, *o.triple_z));
    return kExitOk;
  }
  PressureResult p = pressure_and_derivatives(m, o.N, o.grid, o.fd_step, o.order);
  out << "key,value\n" << std::setprecision(17);
  out << "P1," << p.P1 << '\n';
  out << "dP," << p.dP << '\n';
  out << "dP_exact," << p.dP_exact << '\n';
  if (o.order >= 2) out << "d2P," << p.d2P << '\n';
  out << "M1," << p.M1 << '\n';
  out << "deficit," << p.deficit << '\n';
  return kExitOk;
}

void write_fit(std::ostream& out, const std::string& label, const ExponentFit& f) {
  out << "# fit " << label << ": slope=" << f.slope << " stderr=" << f.stderr_slope << " r2=" << f.r_squared
      << " window=" << f.n_lo << '-' << f.n_hi << (f.slowly_varying ? " slowly_varying" : "") << '\n';
}

int run_mixing(const MixingOpts& o, std::uint64_t seed, std::ostream& out) {
  MapModel m = parse_map_spec(o.map);
  if (o.mode == "pipeline") {
    PipelineOptions po;
    po.n_max = o.n_max;
    po.n_grid = o.grid;
    po.fit_lo = o.fit_lo;
    write_pipeline_report(out, pipeline_lsv(m.s, po));
    return kExitOk;
  }
  if (o.mode == "orbit") {
    auto s = correlation_orbit(m, parse_observable(o.f), parse_observable(o.g), o.n_max, o.orbit_len, seed);
    write_correlation_csv(out, s);
    return kExitOk;
  }
  std::size_t extra = o.mode == "observable" ? o.obs_levels : (o.mode == "wb" ? o.ell : 64);
  std::size_t J = o.J ? o.J : o.n_max + extra + 2;
  if (o.mode == "set" || o.mode == "complement") {
    SetSpec E = parse_set_spec(o.set);
    validate_set(E, m);
    if (!o.J) J = o.n_max + E.membership_depth + 2;
    Tower tw(m, J, o.grid);
    if (o.mode == "set") {
      SetRates r = set_rates(tw, E, o.n_max);
      out << "# measure: " << std::setprecision(17) << r.measure << '\n';
      out << (r.mu.empty() ? "n,joint,sigma\n" : "n,joint,sigma,mu\n");
      for (std::size_t n = 0; n <= o.n_max; ++n) {
        out << n << ',' << r.joint[n] << ',' << r.sigma[n];
        if (!r.mu.empty()) out << ',' << r.mu[n];
        out << '\n';
      }
    } else {
      ComplementCheck c = complement_identity(tw, E, o.n_max);
      out << "# max_abs_diff: " << std::setprecision(17) << c.max_abs_diff << '\n';
      out << "n,lhs,rhs\n";
      for (std::size_t n = 0; n <= o.n_max; ++n) out << n << ',' << c.lhs[n] << ',' << c.rhs[n] << '\n';
    }
    return kExitOk;
  }
  Tower tw(m, J, o.grid);
  if (o.mode == "u" || o.mode == "v") {
    CorrelationSeries u = return_density(tw, o.n_max);
    CorrelationSeries s = o.mode == "v" ? v_from_u(u, tw.M1()) : u;
    if (o.fit_lo < o.n_max) write_fit(out, s.kind, fit_exponent(s.values, o.fit_lo, o.n_max));
    write_correlation_csv(out, s);
  } else if (o.mode == "observable") {
    auto s = correlation_operator(tw, parse_observable(o.f), parse_observable(o.g), o.n_max, o.obs_levels);
    write_correlation_csv(out, s);
  } else if (o.mode == "wb") {
    auto s = cylinder_wb_sum(tw, o.ell, dyadic_points(1, o.n_max));
    write_correlation_csv(out, s);
  } else if (o.mode == "wandering") {
    WanderingRelation w = wandering_relation(tw, o.n_max);
    out << "n,r,sum_u,sum_w\n" << std::setprecision(17);
    for (std::size_t n = 1; n <= o.n_max; ++n)
      out << n << ',' << w.r[n - 1] << ',' << w.sum_u[n - 1] << ',' << w.sum_w[n - 1] << '\n';
  } else {
    throw ValidationError("unknown mixing mode '" + o.mode + "'");
  }
  return kExitOk;
}

int run_zeta(const ZetaOpts& o, std::ostream& out) {
  ZetaConfig cfg;
  cfg.N = o.N;
  cfg.L = o.L;
  cfg.z = o.z;
  cfg.w = o.w;
  cfg.prune = o.prune;
  MapModel m = parse_map_spec(o.map);
  if (!o.markov_tail.empty()) {
    TailLaw law = parse_tail_spec(o.markov_tail);
    std::vector<double> p(cfg.N);
    for (std::size_t k = 1; k <= cfg.N; ++k) p[k - 1] = law.p(k);
    cfg.markov_p = p;
  }
  if (o.mode == "xi") {
    write_partition_csv(out, partition_table(m, cfg));
  } else if (o.mode == "zeta2") {
    Zeta2 z = zeta2_eval(m, cfg);
    out << "key,value\n" << std::setprecision(17);
    out << "log_zeta2," << z.log_value << "\nzeta2," << z.value << "\nremainder," << z.remainder << '\n';
  } else if (o.mode == "consistency") {
    if (cfg.markov_p) throw ValidationError("consistency mode needs the map, not a Markov law");
    write_consistency_report(out, zeta_consistency(m, cfg, o.n_max, o.grid));
  } else {
    throw ValidationError("unknown zeta mode '" + o.mode + "'");
  }
  return kExitOk;
}

int run_markov(const MarkovOpts& o, std::uint64_t seed, std::ostream& out) {
  TailLaw law = parse_tail_spec(o.tail);
  if (o.mode == "simulate") {
    ChainConfig cfg{law, seed, o.n_max, o.trials};
    write_renewal_estimate_csv(out, simulate_renewal(cfg));
  } else if (o.mode == "stationary") {
    StationaryMeasure st = stationary_measure(law, o.k_max);
    out << "# total: " << std::setprecision(17) << st.total << '\n' << "k,pi\n";
    for (std::size_t k = 1; k <= st.pi.size(); ++k) out << k << ',' << st.pi[k - 1] << '\n';
  } else if (o.mode == "pressure") {
    out << "z,pressure\n" << std::setprecision(17) << o.z << ',' << markov_pressure(law, o.z) << '\n';
  } else {
    throw ValidationError("unknown markov mode '" + o.mode + "'");
  }
  return kExitOk;
}

int run_self_check(bool quick, std::ostream& out) {
  auto lines = self_check(quick);
  bool ok = true;
  for (const auto& l : lines) {
    out << (l.ok ? "ok   " : "FAIL ") << l.name;
    if (!l.detail.empty()) out << "  " << l.detail;
    out << '\n';
    ok = ok && l.ok;
  }
  return ok ? kExitOk : kExitSelfCheck;
}

}  // namespace

std::vector<std::string> expand_args_from(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--args-from") {
      if (i + 1 >= args.size()) throw ValidationError("--args-from needs a file");
      path = args[++i];
    } else if (args[i].rfind("--args-from=", 0) == 0) {
      path = args[i].substr(12);
    } else {
      out.push_back(args[i]);
      continue;
    }
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open args file '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      // "--flag value" and "--flag=value" split once; bare values stay whole
      auto sp = line[0] == '-' ? line.find_first_of(" \t=") : std::string::npos;
      if (sp == std::string::npos) {
        out.push_back(line);
      } else {
        out.push_back(line.substr(0, sp));
        std::string rest = trim(line.substr(sp + 1));
        if (!rest.empty()) out.push_back(rest);
      }
    }
  }
  return out;
}

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical laboratory for intermittent interval maps", "intermittency-lab"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  GlobalOpts g;
  app.add_option("--seed", g.seed, "64-bit seed");
  app.add_option("--threads", g.threads, "worker threads (fallback INTERMITTENCY_LAB_THREADS, default 1)");
  app.add_option("--out", g.out_path, "output file (default standard output)");

  RenewalOpts ro;
  auto* sr = app.add_subcommand("renewal", "renewal sequence a_n of a return-time law");
  sr->add_option("--tail", ro.tail, "geometric:q=..., power:alpha=..., uniform2 or a CSV path")->required();
  sr->add_option("--n-max", ro.n_max);
  sr->add_option("--method", ro.method)->check(CLI::IsMember({"auto", "direct", "fft"}));
  sr->add_flag("--with-b", ro.with_b, "also emit b_n = M_1 a_n - 1");

  MapOpts mo;
  auto* sm = app.add_subcommand("map", "level sets of the map, or bounded-distortion sups");
  sm->add_option("--map", mo.map);
  sm->add_option("--n-max", mo.n_max);
  sm->add_option("--distortion", mo.distortion, "max cylinder depth for the distortion check");
  sm->add_option("--samples", mo.samples);

  PressureOpts po;
  auto* sp = app.add_subcommand("pressure", "pressure of the induced operator and its derivatives at z = 1");
  sp->add_option("--map", po.map);
  sp->add_option("--N", po.N);
  sp->add_option("--grid", po.grid);
  sp->add_option("--fd-step", po.fd_step);
  sp->add_option("--order", po.order)->check(CLI::Range(1, 2));
  sp->add_option("--triple", po.triple_z, "emit the leading triple at this z instead");

  MixingOpts xo;
  auto* sx = app.add_subcommand("mixing", "return densities, set rates, correlations and the pipeline report");
  sx->add_option("--map", xo.map);
  sx->add_option("--mode", xo.mode)
      ->check(CLI::IsMember({"u", "v", "set", "complement", "observable", "orbit", "wb", "wandering", "pipeline"}));
  sx->add_option("--n-max", xo.n_max);
  sx->add_option("--grid", xo.grid);
  sx->add_option("--J", xo.J, "explicit tower levels (0 picks n-max plus the observable depth)");
  sx->add_option("--set", xo.set);
  sx->add_option("--f", xo.f);
  sx->add_option("--g", xo.g);
  sx->add_option("--ell", xo.ell);
  sx->add_option("--obs-levels", xo.obs_levels);
  sx->add_option("--orbit-len", xo.orbit_len);
  sx->add_option("--fit-lo", xo.fit_lo);

  ZetaOpts zo;
  auto* sz = app.add_subcommand("zeta", "grand partition function, two-variable zeta, consistency report");
  sz->add_option("--map", zo.map);
  sz->add_option("--markov-tail", zo.markov_tail, "piecewise-constant weights p_k from this law");
  sz->add_option("--mode", zo.mode)->check(CLI::IsMember({"xi", "zeta2", "consistency"}));
  sz->add_option("--N", zo.N);
  sz->add_option("--L", zo.L);
  sz->add_option("--z", zo.z);
  sz->add_option("--w", zo.w);
  sz->add_option("--prune", zo.prune);
  sz->add_option("--n-max", zo.n_max);
  sz->add_option("--grid", zo.grid);

  MarkovOpts ko;
  auto* sk = app.add_subcommand("markov", "renewal Markov chain: simulation, stationary measure, pressure");
  sk->add_option("--tail", ko.tail)->required();
  sk->add_option("--mode", ko.mode)->check(CLI::IsMember({"simulate", "stationary", "pressure"}));
  sk->add_option("--n-max", ko.n_max);
  sk->add_option("--trials", ko.trials);
  sk->add_option("--z", ko.z);
  sk->add_option("--k-max", ko.k_max);

  bool quick = false;
  auto* sc = app.add_subcommand("self-check", "invariant suite");
  sc->add_flag("--quick", quick);

  std::vector<std::string> args;
  try {
    args = expand_args_from(raw_args);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    set_thread_count(resolve_threads(g.threads));
    std::unique_ptr<std::ofstream> file;
    std::ostream* os = &out;
    if (!g.out_path.empty()) {
      file = std::make_unique<std::ofstream>(g.out_path);
      if (!*file) throw ValidationError("cannot open output file '" + g.out_path + "'");
      os = file.get();
    }
    CLI::App* sub = app.get_subcommands().front();
    if (sub == sc) return run_self_check(quick, *os);
    write_header(*os, sub->get_name(), resolved_config(app, *sub), g.seed);
    *os << std::setprecision(17);
    if (sub == sr) return run_renewal(ro, *os);
    if (sub == sm) return run_map(mo, g.seed, *os);
    if (sub == sp) return run_pressure(po, *os);
    if (sub == sx) return run_mixing(xo, g.seed, *os);
    if (sub == sz) return run_zeta(zo, *os);
    if (sub == sk) return run_markov(ko, g.seed, *os);
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ResourceError& e) {
    err << "resource error: " << e.what() << '\n';
    return kExitUsage;
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

PipelineReport pipeline_lsv(double s, const PipelineOptions& opt) {
  if (!(s > 0.0)) throw DomainError("pipeline needs s > 0");
  if (opt.fit_lo >= opt.n_max) throw ValidationError("fit window is empty");
  MapModel m = make_lsv(s);
  PipelineReport r;
  r.s = s;
  r.d = 1.0 / s - 1.0;
  if (std::abs(s - 1.0) < 1e-12) {
    r.regime = "logarithmic";
    r.series = "u";
  } else if (s < 1.0) {
    r.regime = "finite";
    r.series = "v";
    r.predicted = 1.0 - 1.0 / s;
  } else {
    r.regime = "infinite";
    r.series = "u";
    r.predicted = -1.0 + 1.0 / s;
  }
  Tower tw(m, opt.n_max + 2, opt.n_grid);
  CylinderMeasures cm = cylinder_measures(tw.triple(), m, opt.n_max + 2);
  r.deficit = cm.deficit;
  // complete the computed atoms with the LSV tail p_n ~ c n^{-1-1/s}
  TailLaw law = make_law_auto_tail(cm.law.probs, 1.0 + 1.0 / s);
  RenewalSeq seq = renewal_sequence(law, opt.n_max);
  CorrelationSeries u = return_density(tw, opt.n_max);
  if (r.regime == "finite") {
    r.M1 = tw.M1();
    r.operator_series = v_from_u(u, r.M1).values;
    r.renewal_series.resize(opt.n_max + 1);
    for (std::size_t n = 0; n <= opt.n_max; ++n) r.renewal_series[n] = seq.M1 * seq.a[n] - 1.0;
  } else {
    r.M1 = std::numeric_limits<double>::infinity();
    r.operator_series = u.values;
    r.renewal_series = seq.a;
  }
  r.operator_fit = fit_exponent(r.operator_series, opt.fit_lo, opt.n_max);
  r.renewal_fit = fit_exponent(r.renewal_series, opt.fit_lo, opt.n_max);
  return r;
}

void write_pipeline_report(std::ostream& out, const PipelineReport& r) {
  out << std::setprecision(10);
  out << "# pipeline: s=" << r.s << " d=" << r.d << " regime=" << r.regime << " series=" << r.series << '\n';
  if (r.regime == "logarithmic")
    out << "# logarithmic regime: rate (log n)^{-1}, no exponent prediction\n";
  else
    out << "# predicted exponent: " << r.predicted << '\n';
  out << "# M1: " << r.M1 << " deficit: " << r.deficit << '\n';
  write_fit(out, "operator", r.operator_fit);
  write_fit(out, "renewal", r.renewal_fit);
  out << "n,operator,renewal\n" << std::setprecision(17);
  for (std::size_t n = 0; n < r.operator_series.size(); ++n)
    out << n << ',' << r.operator_series[n] << ',' << r.renewal_series[n] << '\n';
}

std::vector<SelfCheckLine> self_check(bool quick) {
  std::vector<SelfCheckLine> out;
  auto check = [&](const std::string& name, auto&& body) {
    SelfCheckLine l{name, false, ""};
    try {
      std::ostringstream detail;
      l.ok = body(detail);
      l.detail = detail.str();
    } catch (const std::exception& e) {
      l.detail = std::string("threw: ") + e.what();
    }
    out.push_back(l);
  };
  const std::size_t scale = quick ? 1 : 4;

  check("renewal geometric a_n = 1/2", [&](std::ostream& d) {
    auto seq = renewal_sequence(parse_tail_spec("geometric:q=0.5"), 200 * scale);
    double e = 0.0;
    for (std::size_t n = 1; n < seq.a.size(); ++n) e = std::max(e, std::abs(seq.a[n] - 0.5));
    d << "max err " << e;
    return e < 1e-12;
  });
  check("renewal identity sum d_k a_{n-k} = 1", [&](std::ostream& d) {
    TailLaw law = parse_tail_spec("power:alpha=3");
    const std::size_t N = 500 * scale;
    auto seq = renewal_sequence(law, N);
    auto ts = tail_sums(law, N);
    double e = 0.0;
    for (std::size_t n = 0; n <= N; ++n) {
      CompensatedSum s;
      for (std::size_t k = 0; k <= n; ++k) s.add(ts.d[k] * seq.a[n - k]);
      e = std::max(e, std::abs(s.value() - 1.0));
    }
    d << "max err " << e;
    return e < 1e-10;
  });
  check("level sets n^2 |A_n| at s = 1", [&](std::ostream& d) {
    auto g = level_sets(make_lsv(1.0), 10000);
    double v = 1e8 * g.len[10000];
    d << "value " << v;
    return v > 0.49 && v < 0.51;
  });
  check("markov-mode eigenvalue", [&](std::ostream& d) {
    std::vector<double> p{0.5, 0.25, 0.125, 0.125};
    auto op = InducedOperator::markov(make_lsv(1.0), p, 64);
    double z = 0.7, want = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) want += std::pow(z, static_cast<double>(k + 1)) * p[k];
    double got = leading_triple(op, z).lambda;
    d << "err " << std::abs(got - want);
    return std::abs(got - want) < 1e-10;
  });
  check("operator identity residual", [&](std::ostream& d) {
    GridFn f = sample(257, [](double x) { return 1.0 + x * x; });
    double r = identity_check(make_lsv(0.5), 0.5, f, 60);
    d << "residual " << r;
    return r < 1e-8;
  });
  check("zeta Q_1 = 3/2", [&](std::ostream& d) {
    double q1 = direct_q(make_lsv(1.0), 1)[0];
    d << "Q_1 " << q1;
    return std::abs(q1 - 1.5) < 1e-12;
  });
  check("markov pressure at z = 1", [&](std::ostream& d) {
    double v = markov_pressure(parse_tail_spec("power:alpha=3"), 1.0);
    d << "value " << v;
    return std::abs(v - 1.0) < 1e-9;
  });
  check("complement identity", [&](std::ostream& d) {
    MapModel m = make_lsv(0.5);
    SetSpec E = parse_set_spec("intervals:0.6-0.9");
    validate_set(E, m);
    Tower tw(m, 40 * scale + E.membership_depth + 2, 128);
    auto c = complement_identity(tw, E, 40 * scale);
    d << "max diff " << c.max_abs_diff;
    return c.max_abs_diff < 1e-6;
  });
  return out;
}

}  // namespace ilab
