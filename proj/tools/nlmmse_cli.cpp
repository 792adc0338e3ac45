// Experiment runner: sweeps, figure presets, plots and the calibration report.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "nlmmse/errors.hpp"
#include "nlmmse/plot.hpp"
#include "nlmmse/sweep.hpp"

namespace {

constexpr int kExitConfig = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nlmmse::ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string replace_extension(const std::string& path, const std::string& ext) {
  return std::filesystem::path(path).replace_extension(ext).string();
}

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

struct Flags {
  std::string out;
  int workers = 1;
  bool no_plot = false;
  long long trials = -1;
  long long seed = -1;
  std::string receiver, mod, nl, power;
  int k = 0;
  int ml_terms = 0;
  bool ber = false;
};

nlmmse::SweepOverrides overrides_from(const Flags& f) {
  nlmmse::SweepOverrides o;
  if (f.trials >= 0) o.trials = f.trials;
  if (f.seed >= 0) o.seed = static_cast<std::uint64_t>(f.seed);
  if (!f.receiver.empty()) o.receiver = nlmmse::parse_receiver_kind(f.receiver);
  if (!f.mod.empty()) o.modulation = nlmmse::parse_modulation(f.mod);
  if (!f.nl.empty()) o.factors = nlmmse::parse_augment(f.nl);
  if (f.k > 0) o.k = f.k;
  if (!f.power.empty()) o.powers_dbw = nlmmse::parse_range(f.power);
  if (f.ml_terms > 0) o.ml_terms = f.ml_terms;
  if (f.ber) o.ber = true;
  return o;
}

int run_plan(nlmmse::SweepPlan plan, const Flags& flags, const std::string& default_out) {
  try {
    nlmmse::apply_overrides(plan, overrides_from(flags));
  } catch (const std::exception& e) {
    throw nlmmse::ConfigError(e.what());
  }
  const std::string out = flags.out.empty() ? default_out : flags.out;
  const auto records = nlmmse::run_sweep(plan, flags.workers);
  const std::string csv = nlmmse::sweep_csv(records);
  ensure_parent(out);
  {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw nlmmse::ConfigError("cannot write '" + out + "'");
    f << csv;
  }
  std::cout << "wrote " << records.size() << " rows to " << out << '\n';
  if (!flags.no_plot) {
    const auto plot = nlmmse::emit_plot(csv, plan.plot);
    const std::string svg_path = replace_extension(out, ".svg");
    std::ofstream(svg_path, std::ios::binary) << plot.svg;
    std::cout << "wrote " << plot.series.size() << " series to " << svg_path << '\n';
    for (const auto& w : plot.warnings) std::cerr << "warning: " << w << '\n';
  }
  for (const auto& r : records)
    if (!r.error.empty()) std::cerr << "point failed: " << r.error << '\n';
  return nlmmse::sweep_exit_code(records);
}

void add_sweep_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--out", f.out, "Output CSV path (plot goes next to it as .svg)");
  cmd->add_option("--workers", f.workers, "Worker threads for sweep points")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-plot", f.no_plot, "Skip the SVG plot");
  cmd->add_option("--trials", f.trials, "Monte-Carlo trials per point (0 = analytical only)");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--receiver", f.receiver, "Receiver kind: pc|pmt|apd");
  cmd->add_option("--mod", f.mod, "Modulation: ook|ppm<M>");
  cmd->add_option("--nl", f.nl, "Nonlinear factors: m or m,n");
  cmd->add_option("--k", f.k, "Receiver count");
  cmd->add_option("--power-dbw", f.power, "Power sweep a:b:step (dBW)");
  cmd->add_option("--ml-terms", f.ml_terms, "Mixture terms in the ML likelihood (default 50)");
  cmd->add_flag("--ber", f.ber, "Also simulate BER (OOK only)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LMMSE receivers with nonlinear conversion for photon-limited SIMO links"};
  app.require_subcommand(1);

  Flags sweep_flags, figure_flags;
  std::string config_path, preset, csv_path, plot_spec, plot_out;

  auto* sweep = app.add_subcommand("sweep", "Run the sweep described by a config file");
  sweep->add_option("config", config_path, "Config file")->required();
  add_sweep_flags(sweep, sweep_flags);

  auto* figure = app.add_subcommand("figure", "Run a built-in figure preset");
  figure->add_option("preset", preset, "fig1a|fig1b|fig2a|fig2b|fig3a|fig3b")->required();
  add_sweep_flags(figure, figure_flags);

  auto* plot = app.add_subcommand("plot", "Render a sweep CSV as SVG");
  plot->add_option("csv", csv_path, "Sweep CSV")->required();
  plot->add_option("spec", plot_spec, "mse|ber|x=<col>;y=<col>,..;group=<col>,..")->required();
  plot->add_option("--out", plot_out, "Output SVG path");

  auto* calibrate = app.add_subcommand("calibrate", "Compare analytical values with the reference operating points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sweep) return run_plan(nlmmse::load_sweep_config(config_path), sweep_flags, "sweep.csv");
    if (*figure) return run_plan(nlmmse::preset_plan(preset), figure_flags, preset + ".csv");
    if (*plot) {
      const auto result = nlmmse::emit_plot(read_file(csv_path), plot_spec);
      const std::string out = plot_out.empty() ? replace_extension(csv_path, ".svg") : plot_out;
      ensure_parent(out);
      std::ofstream(out, std::ios::binary) << result.svg;
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "wrote " << result.series.size() << " series to " << out << '\n';
      return 0;
    }
    if (*calibrate) {
      std::cout << nlmmse::calibration_report();
      return 0;
    }
  } catch (const nlmmse::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlmmse::ParseError& e) {
    std::cerr << "csv error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
