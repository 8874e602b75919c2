#include "setn/commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "setn/analysis.hpp"
#include "setn/csv.hpp"
#include "setn/ed.hpp"
#include "setn/errors.hpp"
#include "setn/selayer.hpp"
#include "setn/transfer.hpp"

namespace setn {

namespace {

using Results = std::vector<std::pair<std::string, std::string>>;
using Rows = std::vector<std::vector<std::string>>;

std::string num(double x) { return format_number(x); }

std::vector<int> trotter_steps(const ExperimentConfig& c) {
  std::vector<int> steps;
  for (double t : c.time_grid()) {
    const double n = std::round(t / c.model.tau);
    if (std::abs(n * c.model.tau - t) > 1e-9 * std::max(1.0, t))
      throw ConfigError("time " + num(t) + " is not a multiple of tau");
    steps.push_back(static_cast<int>(n));
  }
  return steps;
}

std::string cmd_spectrum(const ExperimentConfig& c) {
  const int n = std::max(1, static_cast<int>(std::round(c.t_max / c.model.tau)));
  const RealizationBatch batch = sample(c.model.spec, c.realizations, c.seed);
  const SeLayerChain chain = compress_streaming(batch, n, c.model.tau, c.policy());
  const SpectrumSeries series = spectrum_series(chain);
  Results res{{"max_bond", std::to_string(chain.max_bond())},
              {"discarded_weight", num(chain.total_discarded_weight())},
              {"peak_aux_numbers", std::to_string(chain.peak_aux_numbers)}};
  for (const auto& f : fit_scaling_coefficients(series, c.model.spec.strength, c.model.tau, c.fit_window)) {
    const std::string i = std::to_string(f.index);
    res.push_back({"c" + i, num(f.c)});
    res.push_back({"slope" + i, num(f.slope)});
    res.push_back({"residual" + i, num(f.residual)});
    res.push_back({"points" + i, std::to_string(f.points)});
  }
  Rows rows;
  for (std::size_t p = 0; p < series.times.size(); ++p)
    for (std::size_t i = 0; i < series.ratios[p].size(); ++i)
      rows.push_back({std::to_string(p + 1), num(series.times[p]), std::to_string(i), num(series.ratios[p][i])});
  return render_csv(c, res, {"step", "t", "i", "ratio_sq"}, rows);
}

std::string cmd_sff_ed(const ExperimentConfig& c) {
  const auto grid = c.time_grid();
  const SffSeries s = sff_averaged(c.model, grid, c.realizations, c.seed, {c.threads, 0});
  return render_csv(c, {}, sff_columns(), sff_rows(s));
}

std::string cmd_sff_exact4(const ExperimentConfig& c) {
  const auto grid = c.time_grid();
  const SffSeries s = sff_quadrature_L4(c.model, grid, c.nodes);
  const SffSeries fine = sff_quadrature_L4(c.model, grid, 2 * c.nodes);
  double delta = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) delta = std::max(delta, std::abs(s.values[k] - fine.values[k]));
  return render_csv(c, {{"node_doubling_max_delta", num(delta)}}, sff_columns(), sff_rows(fine));
}

std::string cmd_sff_setn(const ExperimentConfig& c) {
  const std::vector<int> steps = trotter_steps(c);
  const int n_max = std::max(1, *std::max_element(steps.begin(), steps.end()));
  const RealizationBatch batch = sample(c.model.spec, c.realizations, c.seed);
  const SeLayerChain chain = compress_streaming(batch, n_max, c.model.tau, c.policy());
  NetworkOptions opt;
  opt.steps = steps;
  const SffSeries s = sff_via_network(c.model, chain, c.policy(), opt);
  Results res{{"max_bond", std::to_string(chain.max_bond())},
              {"discarded_weight", num(chain.total_discarded_weight())}};
  for (std::size_t i = 0; i < s.warnings.size(); ++i) res.push_back({"warning" + std::to_string(i), s.warnings[i]});
  return render_csv(c, res, sff_columns(), sff_rows(s));
}

std::string cmd_transfer_eig(const ExperimentConfig& c) {
  std::vector<int> steps;
  for (int n : trotter_steps(c))
    if (n > 0) steps.push_back(n);
  if (steps.empty()) throw ConfigError("transfer-eig needs at least one positive time");
  std::optional<SeLayerChain> chain;
  if (c.layer == "sampled")
    chain = compress_streaming(sample(c.model.spec, c.realizations, c.seed),
                               *std::max_element(steps.begin(), steps.end()), c.model.tau, c.policy());
  Rows rows;
  for (int n : steps) {
    const TransferOperator op =
        chain ? TransferOperator::from_chain(c.model, *chain, n) : TransferOperator::analytic(c.model, n);
    EigResult r;
    if (c.eig_method == "dmrg") {
      DmrgSettings ds;
      ds.chi_D = c.chi_d;
      ds.seed = c.seed;
      r = leading_eig_dmrg(op, ds).result;
    } else {
      KrylovSettings ks;
      ks.k = c.eig_count;
      ks.seed = c.seed;
      ks.mps_policy = c.policy();
      if (!ks.mps_policy.max_rank) ks.mps_policy.max_rank = 64;
      r = leading_eigs_krylov(op, ks);
    }
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
      rows.push_back({num(n * c.model.tau), std::to_string(n), to_string(r.method), std::to_string(i),
                      num(r.eigenvalues[i].real()), num(r.eigenvalues[i].imag()), num(std::abs(r.eigenvalues[i])),
                      num(r.residuals[i]), std::to_string(r.bond_dim)});
  }
  return render_csv(c, {}, {"t", "n", "method", "k", "re", "im", "abs", "residual", "bond_dim"}, rows);
}

std::string cmd_levels(const ExperimentConfig& c) {
  std::vector<double> alphas = c.alphas;
  if (alphas.empty()) alphas.push_back(c.model.spec.strength);
  Rows rows;
  for (double a : alphas) {
    ModelParams p = c.model;
    p.spec.strength = a;
    const RatioAverage r = averaged_spacing_ratio(p, c.realizations, c.seed, {c.threads, 0});
    rows.push_back({num(a), num(r.mean), num(r.stderr_of_mean), std::to_string(r.realizations),
                    std::to_string(r.skipped)});
  }
  return render_csv(c, {}, {"alpha", "r_mean", "r_stderr", "realizations", "skipped"}, rows);
}

std::vector<SffSeries> read_inputs(const ExperimentConfig& c) {
  if (c.inputs.empty()) throw ConfigError("no input files given (key 'inputs')");
  std::vector<SffSeries> out;
  for (const auto& path : c.inputs) out.push_back(sff_from_table(read_csv(path)));
  return out;
}

std::string cmd_fit_lambda(const ExperimentConfig& c) {
  const auto series = read_inputs(c);
  const LambdaFit f = extract_lambda(series);
  Results res;
  for (std::size_t i = 0; i < f.flags.size(); ++i) res.push_back({"flag" + std::to_string(i), f.flags[i]});
  Rows rows;
  for (std::size_t k = 0; k < f.times.size(); ++k)
    rows.push_back({num(f.times[k]), num(f.lambda[k]), num(f.ci80_low[k]), num(f.ci80_high[k]),
                    std::to_string(f.n_sizes[k])});
  return render_csv(c, res, {"t", "lambda", "lo80", "hi80", "n_sizes"}, rows);
}

std::string cmd_thouless(const ExperimentConfig& c) {
  Rows rows;
  for (const auto& s : read_inputs(c)) {
    const ThoulessEstimate e = thouless_estimate(s, c.window_lo, c.window_hi);
    rows.push_back({std::to_string(s.L), num(e.t_th), num(e.uncertainty), num(e.peak_time)});
  }
  return render_csv(c, {}, {"L", "t_th", "uncertainty", "peak_time"}, rows);
}

std::string cmd_toy(const ExperimentConfig& c) {
  std::vector<int> sizes = c.sizes;
  if (sizes.empty())
    for (int L = 9; L <= 20; ++L) sizes.push_back(L);
  const int t_max = static_cast<int>(std::floor(c.t_max));
  Results res;
  Rows rows;
  for (int L : sizes) {
    res.push_back({"dominance_L" + std::to_string(L), std::to_string(toy_dominance_time(L, c.toy_threshold))});
    const SffSeries s = toy_model_sff(t_max, L);
    for (std::size_t k = 0; k < s.times.size(); ++k) rows.push_back({num(s.times[k]), std::to_string(L), num(s.values[k])});
  }
  return render_csv(c, res, {"t", "L", "K"}, rows);
}

}  // namespace

std::vector<std::string> command_names() {
  return {"spectrum", "sff-ed", "sff-exact4", "sff-setn", "transfer-eig", "levels", "fit-lambda", "thouless", "toy"};
}

std::string run_command(const ExperimentConfig& c) {
  c.validate();
  if (c.command == "spectrum") return cmd_spectrum(c);
  if (c.command == "sff-ed") return cmd_sff_ed(c);
  if (c.command == "sff-exact4") return cmd_sff_exact4(c);
  if (c.command == "sff-setn") return cmd_sff_setn(c);
  if (c.command == "transfer-eig") return cmd_transfer_eig(c);
  if (c.command == "levels") return cmd_levels(c);
  if (c.command == "fit-lambda") return cmd_fit_lambda(c);
  if (c.command == "thouless") return cmd_thouless(c);
  if (c.command == "toy") return cmd_toy(c);
  throw ConfigError("unknown command '" + c.command + "'");
}

std::string diagnostic_path(const ExperimentConfig& c) {
  return c.out.empty() ? std::string("setn-diagnostic.txt") : c.out + ".diag";
}

int run(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  std::string text;
  try {
    text = run_command(c);
    if (c.out.empty()) {
      out << text;
    } else {
      write_text(c.out, text);
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::string diag = "error: " + std::string(e.what()) + "\n";
    if (const auto* ce = dynamic_cast<const ConvergenceError*>(&e)) diag += "best_residual: " + num(ce->best_residual) + "\n";
    for (const auto& [k, v] : config_echo(c)) diag += "config." + k + " = " + v + "\n";
    const std::string path = diagnostic_path(c);
    try {
      write_text(path, diag);
    } catch (const std::exception&) {
    }
    err << "numerical failure: " << e.what() << " (details in " << path << ")\n";
    return 3;
  }
}

}  // namespace setn
