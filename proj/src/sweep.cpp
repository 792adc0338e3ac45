#include "nlmmse/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nlmmse/errors.hpp"
#include "nlmmse/estimator.hpp"
#include "nlmmse/parallel.hpp"
#include "nlmmse/simulation.hpp"

namespace nlmmse {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

long long parse_integer(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "yes" || s == "true" || s == "1" || s == "on") return true;
  if (s == "no" || s == "false" || s == "0" || s == "off") return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

// Parser state for one sweep block.
struct Block {
  SweepSpec spec;
  std::set<std::string> axes_set;  // axes assigned inside this block
  bool has_power = false;
  int line = 0;
};

const std::set<std::string>& axis_keys() {
  static const std::set<std::string> keys{"receiver", "modulation", "k", "nl", "power_dbw", "gain"};
  return keys;
}

void assign_axis(Block& b, const std::string& key, const std::vector<std::string>& values) {
  SweepSpec& s = b.spec;
  const bool first = b.axes_set.insert(key).second;
  auto reset = [first](auto& v) {
    if (first) v.clear();
  };
  if (key == "receiver") {
    reset(s.receivers);
    for (const auto& v : values) s.receivers.push_back(parse_receiver_kind(v));
  } else if (key == "modulation") {
    reset(s.modulations);
    for (const auto& v : values) s.modulations.push_back(parse_modulation(v));
  } else if (key == "k") {
    reset(s.k_values);
    for (const auto& v : values)
      for (double x : parse_range(v)) {
        if (x < 1.0 || x != std::round(x)) throw std::invalid_argument("receiver count must be a positive integer");
        s.k_values.push_back(static_cast<int>(x));
      }
  } else if (key == "nl") {
    reset(s.factors);
    for (const auto& v : values) s.factors.push_back(parse_augment(v));
  } else if (key == "power_dbw") {
    reset(s.powers_dbw);
    b.has_power = true;
    for (const auto& v : values)
      for (double x : parse_range(v)) s.powers_dbw.push_back(x);
  } else if (key == "gain") {
    reset(s.gains);
    for (const auto& v : values)
      for (double x : parse_range(v)) s.gains.push_back(x);
  }
}

void assign_scalar(Block& b, const std::string& key, const std::string& value, SweepPlan& plan) {
  SweepSpec& s = b.spec;
  PhysicalConfig& p = s.physical;
  if (key == "trials") {
    s.trials = parse_integer(value);
    if (s.trials < 0) throw std::invalid_argument("trials must be >= 0");
  }
  else if (key == "seed") s.seed = static_cast<std::uint64_t>(parse_integer(value));
  else if (key == "ml_terms") {
    s.ml_terms = static_cast<int>(parse_integer(value));
    if (s.ml_terms < 1) throw std::invalid_argument("ml_terms must be >= 1");
  }
  else if (key == "ber") s.ber = parse_bool(value);
  else if (key == "ml") s.ml = parse_bool(value);
  else if (key == "plot") plan.plot = value;
  else if (key == "power_convention") p.power_convention = parse_power_convention(value);
  else if (key == "quantum_efficiency") p.quantum_efficiency = parse_double(value);
  else if (key == "path_loss") p.path_loss = parse_double(value);
  else if (key == "bit_rate") p.bit_rate = parse_double(value);
  else if (key == "wavelength") p.wavelength = parse_double(value);
  else if (key == "background_rate") p.background_rate = parse_double(value);
  else if (key == "temperature") p.temperature = parse_double(value);
  else if (key == "load_resistance") p.load_resistance = parse_double(value);
  else if (key == "pmt_spreading") p.pmt_spreading = parse_double(value);
  else if (key == "apd_ionization") p.apd_ionization = parse_double(value);
  else throw std::invalid_argument("unknown key '" + key + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Point {
  const SweepSpec* spec;
  ReceiverKind kind;
  Modulation mod;
  int k;
  AugmentSpec factors;
  double power;
  std::optional<double> gain;
};

SweepRecord evaluate(const Point& pt) {
  SweepRecord rec;
  rec.receiver_kind = pt.kind;
  rec.modulation = pt.mod;
  rec.k = pt.k;
  rec.augment = pt.factors;
  rec.power_dbw = pt.power;
  rec.gain_a = pt.gain;
  rec.seed = pt.spec->seed;
  try {
    const ExperimentConfig cfg =
        make_experiment(*pt.spec, pt.kind, pt.mod, pt.k, pt.factors, pt.power, pt.gain.value_or(1.0));
    rec.lambda_sig = cfg.channel.signal_means.front();
    rec.lambda_bg = cfg.channel.background_mean;

    const CovarianceBlocks blocks = assemble_blocks(cfg);
    const MseDetail full = analytical_mse_block_detail(blocks);
    const MseDetail linear = analytical_mse_linear_detail(blocks);
    rec.mse_analytical = full.value;
    rec.mse_linear_analytical = linear.value;
    rec.regularized = full.regularized || linear.regularized;

    if (pt.spec->trials > 0) {
      McResult mc;
      if (pt.spec->ber && pt.mod.is_ook()) {
        DetectorSet detectors = DetectorSet(Detector::lmmse) | Detector::lmmse_nc;
        if (pt.spec->ml) detectors = detectors | Detector::ml;
        mc = run_mc_ber(cfg, detectors);
      } else {
        mc = run_mc_mse(cfg);
      }
      rec.trials = mc.trials;
      rec.mse_mc = mc.mse;
      rec.mse_stderr = mc.mse_stderr;
      rec.ber_lmmse = mc.ber_lmmse;
      rec.ber_lmmse_nc = mc.ber_lmmse_nc;
      rec.ber_ml = mc.ber_ml;
      rec.regularized = rec.regularized || mc.regularization_flag;
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

const std::vector<std::string>& sweep_csv_columns() {
  static const std::vector<std::string> cols{
      "receiver_kind", "modulation", "M",          "K",        "m",           "n",
      "power_dbw",     "lambda_sig", "lambda_bg",  "gain_A",   "mse_analytical",
      "mse_linear_analytical",       "mse_mc",     "mse_stderr", "ber_lmmse", "ber_lmmse_nc",
      "ber_ml",        "trials",     "seed",       "regularized_flag",        "error"};
  return cols;
}

void SweepSpec::validate() const {
  if (receivers.empty() || modulations.empty() || k_values.empty() || factors.empty() || powers_dbw.empty() ||
      gains.empty()) {
    throw ConfigError("empty sweep axis");
  }
  for (int k : k_values)
    if (k < 1) throw ConfigError("receiver count must be >= 1");
  if (trials < 0) throw ConfigError("trials must be >= 0");
  if (ml_terms < 1) throw ConfigError("ml_terms must be >= 1");
  for (ReceiverKind kind : receivers)
    for (const AugmentSpec& f : factors) {
      try {
        f.validate(kind);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(to_string(kind)) + ": " + e.what());
      }
    }
}

std::vector<double> parse_range(const std::string& text) {
  const auto first = text.find(':');
  if (first == std::string::npos) return {parse_double(text)};
  const auto second = text.find(':', first + 1);
  if (second == std::string::npos) throw ConfigError("range '" + text + "' must be a:b:step");
  const double a = parse_double(text.substr(0, first));
  const double b = parse_double(text.substr(first + 1, second - first - 1));
  const double step = parse_double(text.substr(second + 1));
  if (!(step > 0.0)) throw ConfigError("range '" + text + "' needs a positive step");
  std::vector<double> out;
  for (long long i = 0;; ++i) {
    double v = a + static_cast<double>(i) * step;
    if (v > b + 1e-9 * step) break;
    v = std::round(v * 1e9) / 1e9;  // strip accumulated binary fraction noise
    out.push_back(v);
    if (out.size() > 100000) throw ConfigError("range '" + text + "' is too long");
  }
  if (out.empty()) throw ConfigError("range '" + text + "' is empty");
  return out;
}

SweepPlan parse_sweep_config(const std::string& text) {
  SweepPlan plan;
  Block defaults;
  std::vector<Block> blocks;
  Block* current = &defaults;

  std::istringstream is(text);
  int line_no = 0;
  for (std::string raw; std::getline(is, raw);) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line == "[sweep]") {
      blocks.push_back(defaults);
      blocks.back().axes_set.clear();
      blocks.back().line = line_no;
      current = &blocks.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key", line_no);
    try {
      if (axis_keys().count(key)) {
        const auto values = split_ws(value);
        if (values.empty()) throw std::invalid_argument("empty sweep axis '" + key + "'");
        assign_axis(*current, key, values);
      } else {
        if (value.empty()) throw std::invalid_argument("missing value for '" + key + "'");
        assign_scalar(*current, key, value, plan);
      }
    } catch (const ConfigError& e) {
      if (e.line() > 0) throw;
      throw ConfigError(e.what(), line_no);
    } catch (const std::exception& e) {
      throw ConfigError(e.what(), line_no);
    }
  }
  if (blocks.empty()) blocks.push_back(defaults);
  for (const Block& b : blocks) {
    if (!b.has_power) throw ConfigError("sweep has no power_dbw axis", b.line);
    try {
      b.spec.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), b.line);
    }
    plan.sweeps.push_back(b.spec);
  }
  return plan;
}

SweepPlan load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_sweep_config(ss.str());
}

void apply_overrides(SweepPlan& plan, const SweepOverrides& o) {
  for (SweepSpec& s : plan.sweeps) {
    if (o.trials) s.trials = *o.trials;
    if (o.seed) s.seed = *o.seed;
    if (o.receiver) s.receivers = {*o.receiver};
    if (o.modulation) s.modulations = {*o.modulation};
    if (o.factors) s.factors = {*o.factors};
    if (o.k) s.k_values = {*o.k};
    if (o.powers_dbw) s.powers_dbw = *o.powers_dbw;
    if (o.ml_terms) s.ml_terms = *o.ml_terms;
    if (o.ber) s.ber = *o.ber;
    s.validate();
  }
}

std::vector<std::string> preset_names() { return {"fig1a", "fig1b", "fig2a", "fig2b", "fig3a", "fig3b"}; }

std::string preset_config(const std::string& name) {
  static const std::map<std::string, std::string> presets{
      {"fig1a",
       "# MSE of nonlinear-factor combinations, analytical and Monte-Carlo\n"
       "receiver = pc\nmodulation = ook\nk = 3\nnl = 1 2 3 1,2 1,3 2,3\n"
       "power_dbw = -10:10:2.5\ntrials = 100000\nplot = mse\n"},
      {"fig1b",
       "# MSE vs receiver count with and without nonlinear conversion\n"
       "receiver = pc\nmodulation = ook\nk = 1 2 3 4\nnl = 1,2\npower_dbw = -20:20:1\nplot = mse\n"},
      {"fig2a",
       "# MSE for PC, PMT and APD front ends\n"
       "receiver = pc pmt apd\nmodulation = ook\nk = 3\nnl = 1,2\ngain = 100\npower_dbw = -20:20:1\nplot = mse\n"},
      {"fig2b",
       "# MSE for OOK and M-PPM\n"
       "receiver = pc\nmodulation = ook ppm2 ppm4 ppm8\nk = 3\nnl = 1,2\npower_dbw = -20:20:1\nplot = mse\n"},
      {"fig3a",
       "# BER of ML, LMMSE and LMMSE with nonlinear conversion\n"
       "receiver = pc\nmodulation = ook\nk = 1 2 3\nnl = 1,2\npower_dbw = -5:10:1\n"
       "trials = 100000\nber = yes\nplot = ber\n"},
      {"fig3b",
       "# BER vs gain for PMT (1 dBW) and APD (8 dBW)\n"
       "modulation = ook\nk = 2\nnl = 1,2\ngain = 50:500:50\ntrials = 100000\nber = yes\n"
       "plot = x=gain_A;y=ber_lmmse,ber_lmmse_nc,ber_ml\n"
       "[sweep]\nreceiver = pmt\npower_dbw = 1\n"
       "[sweep]\nreceiver = apd\npower_dbw = 8\n"},
  };
  const auto it = presets.find(name);
  if (it == presets.end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second;
}

SweepPlan preset_plan(const std::string& name) { return parse_sweep_config(preset_config(name)); }

ExperimentConfig make_experiment(const SweepSpec& spec, ReceiverKind kind, const Modulation& mod, int k,
                                 const AugmentSpec& factors, double power_dbw, double gain) {
  PhysicalConfig phys = spec.physical;
  phys.receiver_kind = kind;
  phys.transmit_power_dbw = power_dbw;
  phys.gain = gain;
  ExperimentConfig cfg;
  cfg.channel = derive_channel_params(phys, k, mod);
  cfg.modulation = mod;
  cfg.augment = factors;
  cfg.trials = std::max<long long>(spec.trials, 1);
  cfg.seed = spec.seed;
  cfg.ml_terms = spec.ml_terms;
  cfg.validate();
  return cfg;
}

std::vector<SweepRecord> run_sweep(const SweepPlan& plan, int workers) {
  std::vector<Point> points;
  for (const SweepSpec& s : plan.sweeps) {
    s.validate();
    for (ReceiverKind kind : s.receivers) {
      for (const Modulation& mod : s.modulations) {
        for (int k : s.k_values) {
          for (const AugmentSpec& f : s.factors) {
            std::vector<std::optional<double>> gains;
            if (kind == ReceiverKind::pc) gains.emplace_back();
            else
              for (double g : s.gains) gains.emplace_back(g);
            for (const auto& g : gains)
              for (double p : s.powers_dbw) points.push_back({&s, kind, mod, k, f, p, g});
          }
        }
      }
    }
  }
  std::vector<SweepRecord> records(points.size());
  parallel_for(points.size(), workers, [&](std::size_t i) { records[i] = evaluate(points[i]); });
  return records;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  const auto& cols = sweep_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const SweepRecord& r : records) {
    os << to_string(r.receiver_kind) << ',' << r.modulation.name() << ',' << r.modulation.order << ',' << r.k
       << ',' << r.augment.m << ',' << (r.augment.augmented ? std::to_string(r.augment.n) : std::string()) << ','
       << format_double(r.power_dbw) << ',' << format_double(r.lambda_sig) << ',' << format_double(r.lambda_bg)
       << ',' << csv_field(r.gain_a) << ',' << csv_field(r.mse_analytical) << ','
       << csv_field(r.mse_linear_analytical) << ',' << csv_field(r.mse_mc) << ',' << csv_field(r.mse_stderr) << ','
       << csv_field(r.ber_lmmse) << ',' << csv_field(r.ber_lmmse_nc) << ',' << csv_field(r.ber_ml) << ','
       << r.trials << ',' << r.seed << ',' << (r.regularized ? 1 : 0) << ',' << csv_quote(r.error) << '\n';
  }
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream os;
  write_sweep_csv(os, records);
  return os.str();
}

int sweep_exit_code(const std::vector<SweepRecord>& records) {
  for (const SweepRecord& r : records)
    if (!r.error.empty()) return 3;
  return 0;
}

std::vector<CalibrationEntry> calibration_entries() {
  struct Case {
    std::string label;
    double target;
    double tol;
    double power;
    Modulation mod;
    int k;
    AugmentSpec factors;
  };
  const std::vector<Case> cases{
      {"0 dBW, K=2, OOK, NC (1,2)", 0.02199, 0.25, 0.0, Modulation::ook(), 2, AugmentSpec::pair(1, 2)},
      {"0 dBW, K=4, OOK, no NC", 0.02953, 0.25, 0.0, Modulation::ook(), 4, AugmentSpec::conventional(1)},
      {"10 dBW, K=3, OOK, NC (1,2)", 0.000231, 0.50, 10.0, Modulation::ook(), 3, AugmentSpec::pair(1, 2)},
      {"10 dBW, K=3, 8-PPM, no NC", 0.000732, 0.50, 10.0, Modulation::ppm(8), 3, AugmentSpec::conventional(1)},
  };
  std::vector<CalibrationEntry> out;
  for (const Case& c : cases) {
    CalibrationEntry e{c.label, c.target, c.tol, 0.0, 0.0};
    for (PowerConvention conv : {PowerConvention::energy_per_pulse, PowerConvention::average_per_bit}) {
      SweepSpec spec;
      spec.physical.power_convention = conv;
      const ExperimentConfig cfg =
          make_experiment(spec, ReceiverKind::pc, c.mod, c.k, c.factors, c.power, 1.0);
      const double d = analytical_mse_block(assemble_blocks(cfg));
      (conv == PowerConvention::energy_per_pulse ? e.pulse_value : e.average_value) = d;
    }
    out.push_back(e);
  }
  return out;
}

std::string calibration_report() {
  std::ostringstream os;
  os << "Calibration of the power-to-photon mapping (PC receiver, lambda_b = 0.02)\n";
  os << "  'pulse'   : lambda = bits-per-pulse * eta P_t wl / (L h c R_b)  [default]\n";
  os << "  'average' : lambda = eta P_t wl / (L h c R_b)\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "  %-30s %12s %12s %8s %12s %8s\n", "point", "target", "pulse", "dev",
                "average", "dev");
  os << buf;
  for (const CalibrationEntry& e : calibration_entries()) {
    std::snprintf(buf, sizeof buf, "  %-30s %12.6g %12.6g %+7.1f%% %12.6g %+7.1f%%  (tol %.0f%%)\n",
                  e.label.c_str(), e.target, e.pulse_value, 100.0 * (e.pulse_value / e.target - 1.0),
                  e.average_value, 100.0 * (e.average_value / e.target - 1.0), 100.0 * e.tolerance);
    os << buf;
  }
  return os.str();
}

}  // namespace nlmmse
