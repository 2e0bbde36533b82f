#pragma once

#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

#include "ilab/renewal.hpp"

namespace ilab {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2, kExitSelfCheck = 3 };

/// Full command line without the program name. Output goes to `out` unless --out is given.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

/// Replaces each `--args-from <file>` with the flags listed in the file, one per line.
std::vector<std::string> expand_args_from(const std::vector<std::string>& args);

struct PipelineOptions {
  std::size_t n_max = 2000;
  std::size_t n_grid = 1024;
  std::size_t fit_lo = 200;
};

struct PipelineReport {
  double s = 0.0;
  double d = 0.0;
  std::string regime;  ///< finite, infinite or logarithmic
  std::string series;  ///< v for finite measure, u otherwise
  double predicted = std::nan("");
  ExponentFit operator_fit;  ///< fit of the tower sequence
  ExponentFit renewal_fit;   ///< fit of the renewal sequence built from the computed p_n
  double M1 = 0.0;
  double deficit = 0.0;
  std::vector<double> operator_series;
  std::vector<double> renewal_series;
};
/// leading_triple -> cylinder_measures -> renewal_sequence -> return_density -> fits.
PipelineReport pipeline_lsv(double s, const PipelineOptions& opt);
void write_pipeline_report(std::ostream& out, const PipelineReport& r);

struct SelfCheckLine {
  std::string name;
  bool ok = false;
  std::string detail;
};
std::vector<SelfCheckLine> self_check(bool quick);

}  // namespace ilab
