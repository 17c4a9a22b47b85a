#pragma once

#include <sstream>
#include <string>

#include "chaosbench/entropy_curve.hpp"
#include "chaosbench/errors.hpp"
#include "chaosbench/real.hpp"

namespace chaosbench {

struct FigureData {
  std::string csv;     // t,H_classical,H_quantum,ceiling_lnN
  std::string script;  // gnuplot
  std::size_t rows = 0;
};

/// Aligns the two curves row by row. The t column is the classical time; the
/// quantum value in row i is the entropy after i kicks.
inline FigureData emit_figure_data(const EntropyCurve& classical, const EntropyCurve& quantum, double ceiling_ln_n,
                                   const std::string& csv_name = "figure.csv") {
  if (classical.size() == 0 || quantum.size() == 0) throw InvalidInput("emit_figure_data: missing entropy curve");
  if (classical.size() != quantum.size())
    throw InvalidInput("emit_figure_data: curves have different lengths (" + std::to_string(classical.size()) + " vs " +
                       std::to_string(quantum.size()) + ")");
  if (!(ceiling_ln_n > 0.0)) throw InvalidInput("emit_figure_data: ceiling must be positive");
  FigureData f;
  std::ostringstream csv;
  csv << "t,H_classical,H_quantum,ceiling_lnN\n";
  for (std::size_t i = 0; i < classical.size(); ++i) {
    csv << to_decimal(classical.times[i]) << "," << to_decimal(classical.entropy[i]) << ","
        << to_decimal(quantum.entropy[i]) << "," << to_decimal(ceiling_ln_n) << "\n";
  }
  f.csv = csv.str();
  f.rows = classical.size();

  std::ostringstream gp;
  gp << "# gnuplot -p figure.gp\n"
     << "set datafile separator ','\n"
     << "set key top left\n"
     << "set xlabel 't'\n"
     << "set ylabel 'entropy (nats)'\n"
     << "plot '" << csv_name << "' using 1:2 skip 1 with lines title 'classical (coarse-grained)', \\\n"
     << "     '' using 1:3 skip 1 with lines title 'quantum (measured cat map)', \\\n"
     << "     '' using 1:4 skip 1 with lines dashtype 2 title 'ln N'\n";
  f.script = gp.str();
  return f;
}

}  // namespace chaosbench
