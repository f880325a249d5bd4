#include "lsv/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "lsv/harness.hpp"
#include "lsv/parallel.hpp"
#include "lsv/serialize.hpp"
#include "lsv/structure.hpp"
#include "lsv/witness.hpp"

#ifndef LSV_VERSION
#define LSV_VERSION "0.0.0"
#endif

namespace lsv::cli {

std::string_view version() noexcept { return LSV_VERSION; }

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kEnsembleNames = {"gaussian", "rademacher", "uniform", "student_t5"};

Ensemble ensemble_from(const std::string& name) {
  auto e = Ensemble::parse(name);
  if (!e) throw UsageError("unknown ensemble '" + name + "'");
  return *e;
}

std::vector<double> parse_reals(const std::string& csv, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v))
      throw UsageError(std::string(flag) + ": cannot parse '" + item + "' as a real number");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

// Arguments minus the global options, so a manifest replays the same data
// regardless of how many workers produced it.
std::vector<std::string> strip_global(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--workers" || a == "--replay" || a == "--replay-out") {
      ++i;
      continue;
    }
    if (a.starts_with("--workers=") || a.starts_with("--replay=") || a.starts_with("--replay-out=")) continue;
    out.push_back(a);
  }
  return out;
}

struct Output {
  std::string path;
  std::string data;
  OrderedJson parameters;
  std::uint64_t master_seed = 0;
  int exit_code = kExitOk;
  std::string summary;
};

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  f.close();
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

std::string hex64(std::uint64_t h) {
  std::ostringstream s;
  s << "0x" << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

void emit(const std::string& command, const std::vector<std::string>& argv, unsigned workers, Output& o,
          double seconds) {
  try {
    write_file(o.path, o.data);
    OrderedJson m;
    m["command"] = command;
    m["version"] = std::string(version());
    m["argv"] = argv;
    m["parameters"] = o.parameters;
    m["master_seed"] = o.master_seed;
    m["workers"] = resolve_workers(workers);
    m["wall_clock_seconds"] = round_sig10(seconds);
    OrderedJson file;
    file["path"] = o.path;
    file["bytes"] = o.data.size();
    file["fnv1a64"] = hex64(fnv1a64(o.data));
    m["outputs"] = OrderedJson::array({file});
    write_file(manifest_path(o.path), m.dump(2) + "\n");
  } catch (...) {
    std::error_code ec;
    fs::remove(o.path, ec);
    fs::remove(manifest_path(o.path), ec);
    throw;
  }
}

// ---------------------------------------------------------------------------
// Commands

struct TailArgs {
  std::string ensemble;
  std::vector<std::size_t> n;
  std::vector<double> k;
  std::size_t trials = 2000;
  std::uint64_t seed = 0;
  std::string direction = "upper";
  std::string out;
};

Output cmd_tail(const TailArgs& a, unsigned workers, std::ostream& err) {
  TailSweepConfig cfg;
  cfg.ensemble = ensemble_from(a.ensemble);
  for (auto n : a.n)
    if (n < 2) throw UsageError("--n must be at least 2");
  for (double k : a.k)
    if (!(k >= 0.0) || !std::isfinite(k)) throw UsageError("--k must be finite and nonnegative");
  if (a.trials == 0) throw UsageError("--trials must be at least 1");
  cfg.n_values = a.n;
  cfg.k_values = a.k;
  cfg.trials = a.trials;
  cfg.master_seed = a.seed;
  cfg.direction = *parse_direction(a.direction);
  cfg.workers = workers;

  const auto res = run_tail_sweep(cfg);
  for (const auto& e : res.estimates)
    if (e.outside_theorem_range)
      err << "note: K = " << format_number(e.k) << " is below 2, outside the stated range of the upper-tail bound\n";

  Output o;
  o.path = a.out;
  o.data = tail_csv(res.estimates);
  o.master_seed = a.seed;
  o.parameters["ensemble"] = a.ensemble;
  o.parameters["n"] = a.n;
  OrderedJson ks = OrderedJson::array();
  for (double k : a.k) ks.push_back(round_sig10(k));
  o.parameters["K"] = ks;
  o.parameters["trials"] = a.trials;
  o.parameters["direction"] = a.direction;
  o.parameters["witness_checked"] = res.witness_checked;
  o.parameters["witness_violations"] = res.witness_violations;
  if (res.witness_violations > 0) {
    o.exit_code = kExitRuntime;
    o.summary = "tail: witness cross-check failed on " + std::to_string(res.witness_violations) + " trials";
  }
  return o;
}

struct WitnessArgs {
  std::string ensemble;
  std::size_t n = 0;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t column = 1;
  std::string out;
};

Output cmd_witness(const WitnessArgs& a, unsigned workers) {
  const Ensemble ens = ensemble_from(a.ensemble);
  if (a.n < 2) throw UsageError("--n must be at least 2");
  if (a.column < 1 || a.column > a.n) throw UsageError("--column must lie in 1..n");
  if (a.trials == 0) throw UsageError("--trials must be at least 1");

  struct Slot {
    std::optional<WitnessReport> report;
    std::size_t resamples = 0;
  };
  std::vector<Slot> slots(a.trials);
  parallel_for(a.trials, workers, [&](std::size_t t) {
    for (int attempt = 0; attempt < kMaxResampleAttempts; ++attempt) {
      const Matrix m = sample_matrix(ens, a.n, trial_stream(a.seed, t, attempt));
      try {
        slots[t].report = audit(m, a.column - 1);
        return;
      } catch (const SingularMatrix&) {
        ++slots[t].resamples;
      } catch (const DegenerateGeometry&) {
        ++slots[t].resamples;
      }
    }
  });

  OrderedJson arr = OrderedJson::array();
  std::size_t violations = 0, failed = 0;
  for (std::size_t t = 0; t < slots.size(); ++t) {
    if (!slots[t].report) {
      ++failed;
      continue;
    }
    OrderedJson j;
    j["trial"] = t;
    j["resamples"] = slots[t].resamples;
    const OrderedJson report = to_json(*slots[t].report);
    for (const auto& [key, value] : report.items()) j[key] = value;
    violations += slots[t].report->violations.size();
    arr.push_back(std::move(j));
  }

  Output o;
  o.path = a.out;
  o.data = arr.dump(2) + "\n";
  o.master_seed = a.seed;
  o.parameters["ensemble"] = a.ensemble;
  o.parameters["n"] = a.n;
  o.parameters["trials"] = a.trials;
  o.parameters["column"] = a.column;
  o.parameters["violations"] = violations;
  o.parameters["failed_trials"] = failed;
  o.summary = "witness: " + std::to_string(a.trials - failed) + " audits, " + std::to_string(violations) +
              " violations";
  if (violations > 0 || failed > 0) o.exit_code = kExitRuntime;
  return o;
}

struct LcdArgs {
  std::string vector;
  std::size_t subspace_dim = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::optional<double> alpha;
  double gamma = 0.5;
  double theta_max = 1e4;
  double grid_step = 0.0;
  std::size_t samples = 32;
  std::string out;
};

Output cmd_lcd(const LcdArgs& a, unsigned workers) {
  const bool vector_mode = !a.vector.empty();
  if (vector_mode == (a.subspace_dim != 0)) throw UsageError("give exactly one of --vector or --subspace-dim");
  if (!(a.gamma > 0.0 && a.gamma < 1.0)) throw UsageError("--gamma must lie in (0, 1)");
  if (!(a.theta_max > 0.0)) throw UsageError("--theta-max must be positive");
  if (a.alpha && !(*a.alpha > 0.0)) throw UsageError("--alpha must be positive");
  if (!(a.grid_step >= 0.0)) throw UsageError("--grid-step must be nonnegative");

  Vector v;
  std::size_t dim = a.n;
  if (vector_mode) {
    v = parse_reals(a.vector, "--vector");
    if (norm2(v) == 0.0) throw UsageError("--vector must be nonzero");
    dim = v.size();
  } else {
    if (a.n < 1) throw UsageError("--subspace-dim needs --n");
    if (a.subspace_dim > a.n) throw UsageError("--subspace-dim must not exceed --n");
    if (a.samples == 0) throw UsageError("--samples must be at least 1");
  }

  LcdQuery q = LcdQuery::defaults(dim);
  if (a.alpha) q.alpha = *a.alpha;
  q.gamma = a.gamma;
  q.theta_max = a.theta_max;
  q.grid_step = a.grid_step;

  OrderedJson j;
  LcdResult r;
  if (vector_mode) {
    j["mode"] = "vector";
    j["n"] = dim;
    r = lcd_vector(v, q);
  } else {
    j["mode"] = "subspace";
    j["n"] = a.n;
    j["subspace_dim"] = a.subspace_dim;
    j["seed"] = a.seed;
    // Spanning vectors are Gaussian columns from stream 0; direction samples use streams 1..samples.
    const Vector g = sample_vector(Ensemble{EnsembleKind::gaussian}, a.n * a.subspace_dim, {a.seed, 0});
    std::vector<Vector> cols(a.subspace_dim, Vector(a.n));
    for (std::size_t c = 0; c < a.subspace_dim; ++c)
      for (std::size_t i = 0; i < a.n; ++i) cols[c][i] = g[c * a.n + i];
    r = lcd_subspace_sampled(orthonormalize(cols, a.n), q, a.samples, {a.seed, 1}, workers);
  }
  const OrderedJson result = to_json(r, q);
  for (const auto& [key, value] : result.items()) j[key] = value;

  Output o;
  o.path = a.out;
  o.data = j.dump(2) + "\n";
  o.master_seed = a.seed;
  o.parameters["mode"] = vector_mode ? "vector" : "subspace";
  o.parameters["alpha"] = round_sig10(q.alpha);
  o.parameters["gamma"] = round_sig10(q.gamma);
  o.parameters["theta_max"] = round_sig10(q.theta_max);
  if (!vector_mode) o.parameters["samples"] = a.samples;
  o.summary = r.bounded() ? "lcd: theta_star = " + format_number(*r.theta_star) : "lcd: unbounded up to theta_max";
  return o;
}

struct SmallBallArgs {
  std::string weights;
  std::string ensemble;
  double epsilon = 0.0;
  std::size_t trials = 100000;
  std::uint64_t seed = 0;
  std::string out;
};

Output cmd_smallball(const SmallBallArgs& a, unsigned workers) {
  Vector w = parse_reals(a.weights, "--weights");
  const double wn = norm2(w);
  if (wn == 0.0) throw UsageError("--weights must not be the zero vector");
  for (double& x : w) x /= wn;
  const Ensemble ens = ensemble_from(a.ensemble);
  if (!(a.epsilon > 0.0)) throw UsageError("--epsilon must be positive");
  if (a.trials == 0) throw UsageError("--trials must be at least 1");

  const auto est = small_ball_estimate(w, ens, a.epsilon, a.trials, {a.seed, 0}, workers);
  OrderedJson j = to_json(est, ens);
  OrderedJson wj = OrderedJson::array();
  for (double x : w) wj.push_back(round_sig10(x));
  j["weights"] = wj;
  j["seed"] = a.seed;

  Output o;
  o.path = a.out;
  o.data = j.dump(2) + "\n";
  o.master_seed = a.seed;
  o.parameters["ensemble"] = a.ensemble;
  o.parameters["epsilon"] = round_sig10(a.epsilon);
  o.parameters["trials"] = a.trials;
  o.summary = "smallball: p_hat = " + format_number(est.p_hat);
  return o;
}

struct ScalingArgs {
  std::string ensemble;
  std::vector<std::size_t> n;
  std::size_t trials = 2000;
  std::uint64_t seed = 0;
  std::string out;
};

Output cmd_scaling(const ScalingArgs& a, unsigned workers) {
  const Ensemble ens = ensemble_from(a.ensemble);
  for (auto n : a.n)
    if (n < 2) throw UsageError("--n must be at least 2");
  if (a.trials == 0) throw UsageError("--trials must be at least 1");
  const auto rows = median_scaling_report(ens, a.n, a.trials, a.seed, workers);
  std::string csv = "ensemble,n,trials,median,q1,q3,iqr,singular_count,master_seed\n";
  for (const auto& r : rows) {
    csv += std::string(ens.name()) + ',' + std::to_string(r.n) + ',' + std::to_string(r.trials) + ',' +
           format_number(r.median) + ',' + format_number(r.q1) + ',' + format_number(r.q3) + ',' +
           format_number(r.iqr()) + ',' + std::to_string(r.singular_count) + ',' + std::to_string(a.seed) + '\n';
  }
  Output o;
  o.path = a.out;
  o.data = std::move(csv);
  o.master_seed = a.seed;
  o.parameters["ensemble"] = a.ensemble;
  o.parameters["n"] = a.n;
  o.parameters["trials"] = a.trials;
  return o;
}

struct DistanceArgs {
  std::string ensemble;
  std::size_t n = 0;
  std::size_t trials = 5000;
  std::uint64_t seed = 0;
  std::string out;
};

Output cmd_distance(const DistanceArgs& a, unsigned workers) {
  const Ensemble ens = ensemble_from(a.ensemble);
  if (a.n < 2) throw UsageError("--n must be at least 2");
  if (a.trials == 0) throw UsageError("--trials must be at least 1");
  const auto rep = distance_tail_experiment(ens, a.n, a.trials, a.seed, workers);
  Output o;
  o.path = a.out;
  o.data = to_json(rep).dump(2) + "\n";
  o.master_seed = a.seed;
  o.parameters["ensemble"] = a.ensemble;
  o.parameters["n"] = a.n;
  o.parameters["trials"] = a.trials;
  o.summary = "distance: KS vs half-normal = " + format_number(rep.ks_half_normal);
  return o;
}

int replay(const std::string& manifest_file, const std::string& out_override, unsigned workers,
           std::ostream& out, std::ostream& err) {
  OrderedJson m;
  try {
    std::ifstream f(manifest_file);
    if (!f) throw std::runtime_error("cannot open manifest '" + manifest_file + "'");
    m = OrderedJson::parse(f);
  } catch (const std::exception& e) {
    err << "replay: " << e.what() << "\n";
    return kExitRuntime;
  }
  if (!m.contains("argv") || !m.contains("outputs") || m["outputs"].empty()) {
    err << "replay: manifest lacks argv or outputs\n";
    return kExitRuntime;
  }
  std::vector<std::string> argv = m["argv"].get<std::vector<std::string>>();
  std::string target = m["outputs"][0]["path"].get<std::string>();
  if (!out_override.empty()) {
    for (std::size_t i = 0; i < argv.size(); ++i) {
      if (argv[i] == "--out" && i + 1 < argv.size()) argv[i + 1] = out_override;
      if (argv[i].starts_with("--out=")) argv[i] = "--out=" + out_override;
    }
    target = out_override;
  }
  argv.insert(argv.begin(), {"--workers", std::to_string(workers)});
  const int code = run(argv, out, err);
  if (code == kExitUsage) return code;

  std::ifstream f(target, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const std::string expected = m["outputs"][0]["fnv1a64"].get<std::string>();
  if (!f.good() && !f.eof()) {
    err << "replay: cannot read '" << target << "'\n";
    return kExitRuntime;
  }
  if (hex64(fnv1a64(bytes)) != expected) {
    err << "replay: '" << target << "' differs from the recorded output\n";
    return kExitRuntime;
  }
  out << "replay: reproduced " << target << " byte-for-byte\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Least singular value experiments: witness audits, LCD, small-ball and tail sweeps", "lsv"};
  unsigned workers = 0;
  std::string replay_manifest, replay_out;
  app.add_option("--workers", workers, "Worker threads (0 = hardware concurrency); never changes results");
  app.add_option("--replay", replay_manifest, "Re-run the command recorded in a manifest and verify its output");
  app.add_option("--replay-out", replay_out, "With --replay, write the data file here instead");
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(0, 1);
  app.fallthrough();

  const auto ensemble_check = CLI::IsMember(kEnsembleNames);

  TailArgs tail;
  auto* tail_cmd = app.add_subcommand("tail", "Monte Carlo tail sweep of s_n(A), CSV output");
  tail_cmd->add_option("--ensemble", tail.ensemble)->required()->check(ensemble_check);
  tail_cmd->add_option("--n", tail.n, "Dimension (repeatable)")->required();
  tail_cmd->add_option("--k", tail.k, "K for upper, epsilon for lower (repeatable)")->required();
  tail_cmd->add_option("--trials", tail.trials)->capture_default_str();
  tail_cmd->add_option("--seed", tail.seed)->capture_default_str();
  tail_cmd->add_option("--direction", tail.direction)->check(CLI::IsMember({"upper", "lower"}))->capture_default_str();
  tail_cmd->add_option("--out", tail.out, "CSV path")->required();

  WitnessArgs wit;
  auto* wit_cmd = app.add_subcommand("witness", "Audit the witness construction on sampled matrices, JSON output");
  wit_cmd->add_option("--ensemble", wit.ensemble)->required()->check(ensemble_check);
  wit_cmd->add_option("--n", wit.n)->required();
  wit_cmd->add_option("--trials", wit.trials)->capture_default_str();
  wit_cmd->add_option("--seed", wit.seed)->capture_default_str();
  wit_cmd->add_option("--column", wit.column, "Distinguished column, 1-based")->capture_default_str();
  wit_cmd->add_option("--out", wit.out, "JSON path")->required();

  LcdArgs lcd;
  auto* lcd_cmd = app.add_subcommand("lcd", "Least common denominator of a vector or a random subspace, JSON output");
  lcd_cmd->add_option("--vector", lcd.vector, "Comma-separated coordinates");
  lcd_cmd->add_option("--subspace-dim", lcd.subspace_dim, "Dimension of a random Gaussian subspace of R^n");
  lcd_cmd->add_option("--n", lcd.n, "Ambient dimension in subspace mode");
  lcd_cmd->add_option("--seed", lcd.seed)->capture_default_str();
  lcd_cmd->add_option("--alpha", lcd.alpha, "Default sqrt(n)/2");
  lcd_cmd->add_option("--gamma", lcd.gamma)->capture_default_str();
  lcd_cmd->add_option("--theta-max", lcd.theta_max)->capture_default_str();
  lcd_cmd->add_option("--grid-step", lcd.grid_step, "0 selects min(gamma, 0.1) / (4 |a|)")->capture_default_str();
  lcd_cmd->add_option("--samples", lcd.samples, "Sampled directions in subspace mode")->capture_default_str();
  lcd_cmd->add_option("--out", lcd.out, "JSON path")->required();

  SmallBallArgs sb;
  auto* sb_cmd = app.add_subcommand("smallball", "Small-ball probability of a weighted sum, JSON output");
  sb_cmd->add_option("--weights", sb.weights, "Comma-separated weights, normalized to unit length")->required();
  sb_cmd->add_option("--ensemble", sb.ensemble)->required()->check(ensemble_check);
  sb_cmd->add_option("--epsilon", sb.epsilon)->required();
  sb_cmd->add_option("--trials", sb.trials)->capture_default_str();
  sb_cmd->add_option("--seed", sb.seed)->capture_default_str();
  sb_cmd->add_option("--out", sb.out, "JSON path")->required();

  ScalingArgs sc;
  auto* sc_cmd = app.add_subcommand("scaling", "Median and IQR of sqrt(n) s_n(A) per n, CSV output");
  sc_cmd->add_option("--ensemble", sc.ensemble)->required()->check(ensemble_check);
  sc_cmd->add_option("--n", sc.n, "Dimension (repeatable)")->required();
  sc_cmd->add_option("--trials", sc.trials)->capture_default_str();
  sc_cmd->add_option("--seed", sc.seed)->capture_default_str();
  sc_cmd->add_option("--out", sc.out, "CSV path")->required();

  DistanceArgs dist;
  auto* dist_cmd = app.add_subcommand("distance", "Distribution of dist(X_1, H_1), JSON output");
  dist_cmd->add_option("--ensemble", dist.ensemble)->required()->check(ensemble_check);
  dist_cmd->add_option("--n", dist.n)->required();
  dist_cmd->add_option("--trials", dist.trials)->capture_default_str();
  dist_cmd->add_option("--seed", dist.seed)->capture_default_str();
  dist_cmd->add_option("--out", dist.out, "JSON path")->required();

  std::vector<const char*> argv{"lsv"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (!replay_manifest.empty()) return replay(replay_manifest, replay_out, workers, out, err);
  if (app.get_subcommands().empty()) {
    err << app.help();
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  const auto started = std::chrono::steady_clock::now();
  Output o;
  try {
    if (sub == tail_cmd) o = cmd_tail(tail, workers, err);
    else if (sub == wit_cmd) o = cmd_witness(wit, workers);
    else if (sub == lcd_cmd) o = cmd_lcd(lcd, workers);
    else if (sub == sb_cmd) o = cmd_smallball(sb, workers);
    else if (sub == sc_cmd) o = cmd_scaling(sc, workers);
    else o = cmd_distance(dist, workers);
  } catch (const UsageError& e) {
    err << command << ": " << e.what() << "\n" << sub->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << command << ": " << e.what() << "\n";
    return kExitRuntime;
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  try {
    emit(command, strip_global(args), workers, o, seconds);
  } catch (const std::exception& e) {
    err << command << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  if (!o.summary.empty()) (o.exit_code == kExitOk ? out : err) << o.summary << "\n";
  return o.exit_code;
}

}  // namespace lsv::cli
