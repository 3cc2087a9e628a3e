// lerwlab command line: sampling, capacity estimation, exact-oracle checks,
// two-sided diagnostics and experiment execution, all through the lerwcap
// C API. Exit codes: 0 success, 1 usage error, 2 runtime error.
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lerwcap.h"

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(lerw_status st) {
  if (st == LERW_OK) return;
  if (st == LERW_ERR_INVALID_ARGUMENT) throw UsageError(lerw_last_error());
  throw RuntimeError(lerw_last_error());
}

// absence of --seed draws an entropy seed; the resolved value is always
// echoed so no unreproducible run exists silently
std::uint64_t resolve_seed(bool seed_given, std::uint64_t seed) {
  if (seed_given) return seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void echo_config(const std::string& subcommand, const json& cfg) {
  json line{{"config", cfg}};
  line["config"]["subcommand"] = subcommand;
  std::printf("%s\n", line.dump().c_str());
}

struct PathHandle {
  lerw_path* p = nullptr;
  ~PathHandle() { lerw_path_destroy(p); }
};
struct LepHandle {
  lerw_lep* p = nullptr;
  ~LepHandle() { lerw_lep_destroy(p); }
};
struct RngHandle {
  lerw_rng* p = nullptr;
  RngHandle(std::uint64_t seed, std::uint64_t stream) {
    check(lerw_rng_create(seed, stream, &p));
  }
  ~RngHandle() { lerw_rng_destroy(p); }
};
struct StringHandle {
  char* s = nullptr;
  ~StringHandle() { lerw_string_free(s); }
};

std::string path_text(const lerw_path* p) {
  StringHandle s;
  check(lerw_path_to_text(p, &s.s));
  return std::string(s.s);
}

// built-in point sets for the capacity subcommand
lerw_path* builtin_points(const std::string& name, int d) {
  std::vector<std::int64_t> coords;
  if (name == "single-origin") {
    coords.assign(static_cast<size_t>(d), 0);
  } else if (name == "origin-pair") {
    coords.assign(static_cast<size_t>(2 * d), 0);
    coords[static_cast<size_t>(d)] = 1;  // (e1)
  } else {
    return nullptr;
  }
  lerw_path* p = nullptr;
  check(lerw_path_create(d, coords.data(), coords.size() / static_cast<size_t>(d), &p));
  return p;
}

int run_walk(int d, std::int64_t steps, std::int64_t target_len,
             double safety_factor, std::uint64_t seed, std::uint64_t stream,
             bool do_loop_erase, bool do_cut_times, bool do_erasure_times,
             const std::string& out_file) {
  RngHandle rng(seed, stream);
  std::string text;
  PathHandle walk;
  LepHandle lep;
  json result;

  if (target_len > 0) {
    check(lerw_lerw_sample(d, target_len, safety_factor, rng.p, &lep.p));
    PathHandle lp;
    check(lerw_lep_path(lep.p, &lp.p));
    text = path_text(lp.p);
    result["source_length"] = lerw_lep_source_length(lep.p);
  } else {
    check(lerw_srw_sample(d, steps, rng.p, &walk.p));
    if (do_loop_erase) {
      check(lerw_loop_erase(walk.p, &lep.p));
      PathHandle lp;
      check(lerw_lep_path(lep.p, &lp.p));
      text = path_text(lp.p);
    } else {
      text = path_text(walk.p);
    }
  }

  if (do_erasure_times && lep.p) {
    std::vector<std::int64_t> times(lerw_lep_points(lep.p));
    check(lerw_lep_erasure_times(lep.p, times.data(), times.size()));
    std::string line = "# erasure_times:";
    for (auto t : times) line += " " + std::to_string(t);
    text += line + "\n";
  }
  if (do_cut_times && walk.p) {
    std::int64_t* cuts = nullptr;
    size_t n_cuts = 0;
    check(lerw_path_cut_times(walk.p, &cuts, &n_cuts));
    std::string line = "# cut_times:";
    for (size_t i = 0; i < n_cuts; ++i) line += " " + std::to_string(cuts[i]);
    lerw_buffer_free(cuts);
    text += line + "\n";
  }

  if (out_file.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::FILE* f = std::fopen(out_file.c_str(), "w");
    if (!f) throw RuntimeError("cannot open output file " + out_file);
    std::fputs(text.c_str(), f);
    std::fclose(f);
  }
  return 0;
}

int run_capacity(const std::string& points_arg, std::int64_t lerw_len, int d,
                 const std::string& method, double R, double y_radius,
                 double kill_factor, double eps, std::int64_t trials,
                 std::uint64_t seed, std::uint64_t stream, int threads,
                 const std::string& csv_file) {
  RngHandle rng(seed, stream);
  PathHandle points;
  if (lerw_len > 0) {
    LepHandle lep;
    check(lerw_lerw_sample(d, lerw_len, 0, rng.p, &lep.p));
    check(lerw_lep_path(lep.p, &points.p));
  } else {
    points.p = builtin_points(points_arg, d);
    if (!points.p) check(lerw_path_load(points_arg.c_str(), d, &points.p));
  }

  lerw_estimate est{};
  StringHandle js;
  if (method == "escape_sum") {
    check(lerw_capacity_escape_sum(points.p, R, trials, rng.p, threads, &est, &js.s));
  } else if (method == "decomposition") {
    check(lerw_capacity_decomposition(points.p, R, trials, rng.p, threads, &est, &js.s));
  } else if (method == "hitting") {
    check(lerw_capacity_hitting(points.p, y_radius, kill_factor, trials, rng.p,
                                threads, &est, &js.s));
  } else if (method == "sausage") {
    check(lerw_sausage_capacity(points.p, eps, y_radius, kill_factor, trials,
                                rng.p, threads, &est, &js.s));
  } else {
    throw UsageError("unknown method " + method);
  }
  std::printf("%s\n", js.s);
  if (!csv_file.empty()) {
    json rec = json::parse(js.s);
    double wall = rec["wall_seconds"].get<double>();
    double radius_col = rec["params"].contains("R")
                            ? rec["params"]["R"].get<double>()
                            : rec["params"].value("y_radius", 0.0);
    std::FILE* f = std::fopen(csv_file.c_str(), "a");
    if (!f) throw RuntimeError("cannot open csv file " + csv_file);
    std::fprintf(f, "%s,%.17g,%.17g,%" PRId64 ",%.17g,%" PRIu64 ",%.6f\n",
                 est.method, est.value, est.stderr_value, est.trials,
                 radius_col, seed, wall);
    std::fclose(f);
  }
  return 0;
}

int run_oracle(const std::string& suite, const std::string& chain_file,
               const std::string& set_arg, int chains, int max_states,
               int max_subset, int orderings, std::uint64_t seed) {
  if (!chain_file.empty()) {
    lerw_chain* chain = nullptr;
    check(lerw_chain_load(chain_file.c_str(), &chain));
    std::vector<std::int32_t> states;
    {
      std::string cur;
      for (char ch : set_arg + ",") {
        if (ch == ',') {
          if (!cur.empty()) states.push_back(std::stoi(cur));
          cur.clear();
        } else {
          cur.push_back(ch);
        }
      }
    }
    if (states.empty()) {
      lerw_chain_destroy(chain);
      throw UsageError("--set is required with --file");
    }
    double cap = 0, dec = 0;
    lerw_status st1 = lerw_chain_capacity(chain, states.data(), states.size(), &cap);
    lerw_status st2 = lerw_chain_decomposition(chain, states.data(), states.size(), &dec);
    lerw_chain_destroy(chain);
    check(st1);
    check(st2);
    json out{{"capacity", cap}, {"decomposition", dec}, {"deviation", std::fabs(cap - dec)}};
    std::printf("%s\n", out.dump().c_str());
    return std::fabs(cap - dec) <= 1e-10 ? 0 : 2;
  }
  if (suite != "decomposition") throw UsageError("unknown suite " + suite);
  double max_dev = 0;
  check(lerw_oracle_suite(seed, chains, max_states, max_subset, orderings, &max_dev));
  json out{{"suite", suite},
           {"chains", chains},
           {"max_states", max_states},
           {"max_subset", max_subset},
           {"orderings", orderings},
           {"max_deviation", max_dev},
           {"tolerance", 1e-10}};
  std::printf("%s\n", out.dump().c_str());
  return max_dev <= 1e-10 ? 0 : 2;
}

int run_twosided(int d, std::int64_t side_len, std::int64_t horizon,
                 std::int64_t samples, std::uint64_t seed, std::uint64_t stream,
                 const std::string& dump_fwd, const std::string& dump_bwd,
                 const std::string& diagnostic, const std::string& k_shifts_arg,
                 std::int64_t diag_samples) {
  RngHandle rng(seed, stream);
  if (diagnostic == "stationarity") {
    std::vector<std::int64_t> ks;
    std::string cur;
    for (char ch : k_shifts_arg + ",") {
      if (ch == ',') {
        if (!cur.empty()) ks.push_back(std::stoll(cur));
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (ks.empty()) throw UsageError("--k-shifts required for the diagnostic");
    StringHandle js;
    check(lerw_stationarity_diagnostic(d, diag_samples, ks.data(), ks.size(),
                                       horizon, rng.p, &js.s));
    std::printf("%s\n", js.s);
    return 0;
  }
  if (!diagnostic.empty()) throw UsageError("unknown diagnostic " + diagnostic);

  std::int64_t attempts_total = 0, accepted_total = 0, late_total = 0;
  PathHandle fwd, bwd;
  for (std::int64_t s = 0; s < samples; ++s) {
    lerw_path_destroy(fwd.p);
    lerw_path_destroy(bwd.p);
    fwd.p = bwd.p = nullptr;
    std::int64_t attempts = 0, accepted = 0, late = 0;
    check(lerw_two_sided_sample(d, side_len, horizon, rng.p, &fwd.p, &bwd.p,
                                &attempts, &accepted, &late));
    attempts_total += attempts;
    accepted_total += accepted;
    late_total += late;
  }
  if (!dump_fwd.empty() && fwd.p) check(lerw_path_save(fwd.p, dump_fwd.c_str()));
  if (!dump_bwd.empty() && bwd.p) check(lerw_path_save(bwd.p, dump_bwd.c_str()));
  json out{{"samples", samples},
           {"side_len", side_len},
           {"horizon", horizon},
           {"attempts", attempts_total},
           {"acceptance_rate",
            attempts_total ? static_cast<double>(accepted_total) /
                                 static_cast<double>(attempts_total)
                           : 0.0},
           {"extension_violation_rate",
            accepted_total ? static_cast<double>(late_total) /
                                 static_cast<double>(accepted_total)
                           : 0.0}};
  std::printf("%s\n", out.dump().c_str());
  return 0;
}

int run_experiment_cmd(const std::string& config_file, const std::string& out_dir,
                       int threads, bool seed_given, std::uint64_t seed) {
  StringHandle js;
  check(lerw_experiment_run(config_file.c_str(),
                            out_dir.empty() ? nullptr : out_dir.c_str(), threads,
                            seed, seed_given ? 1 : 0, &js.s));
  std::printf("%s\n", js.s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "lerwlab - loop-erased random walk capacity laboratory.\n"
      "All randomness flows from --seed; without it an entropy seed is drawn\n"
      "and echoed. LERW_THREADS sets the default thread count; --threads wins."};
  app.require_subcommand(1);

  // walk
  auto* walk = app.add_subcommand(
      "walk", "Sample walks and loop erasures; emits one comma-separated point "
              "per line (with optional '# cut_times:'/'# erasure_times:' trailers)");
  int w_d = 3;
  std::int64_t w_steps = 1000, w_target = 0;
  double w_safety = 3.0;
  std::uint64_t w_seed = 0, w_stream = 0;
  bool w_le = false, w_cuts = false, w_times = false;
  std::string w_out;
  walk->add_option("--d", w_d, "Lattice dimension (int)")->capture_default_str();
  walk->add_option("--steps", w_steps, "Walk steps for the plain sample (int)")
      ->capture_default_str();
  walk->add_option("--target-len", w_target,
                   "Sample the loop erasure of an unbounded walk to this many "
                   "steps instead (int, 0 = off)")
      ->capture_default_str();
  walk->add_option("--safety-factor", w_safety,
                   "Freeze radius multiple for --target-len sampling (float)")
      ->capture_default_str();
  auto* w_seed_opt = walk->add_option("--seed", w_seed, "Master seed (uint64)");
  walk->add_option("--stream", w_stream, "Stream id (uint64)")->capture_default_str();
  walk->add_flag("--loop-erase", w_le, "Emit the loop erasure of the sampled walk");
  walk->add_flag("--cut-times", w_cuts, "Append the cut-time list");
  walk->add_flag("--erasure-times", w_times, "Append the erasure-time list");
  walk->add_option("--out", w_out, "Write the path here instead of stdout (file)");

  // capacity
  auto* cap = app.add_subcommand(
      "capacity",
      "Capacity estimators. Output: one JSON object per line; --csv appends "
      "rows with columns method,value,stderr,trials,R,seed,wall_time");
  std::string c_points = "single-origin", c_method = "escape_sum", c_csv;
  std::int64_t c_lerw = 0, c_trials = 100000;
  int c_d = 3, c_threads = 0;
  double c_R = 200, c_y = 50, c_kill = 10, c_eps = 0;
  std::uint64_t c_seed = 0, c_stream = 0;
  cap->add_option("--points", c_points,
                  "Point source: single-origin | origin-pair | file with one "
                  "comma-separated point per line")
      ->capture_default_str();
  cap->add_option("--lerw-len", c_lerw,
                  "Use a fresh loop-erased sample of this length as the set "
                  "(int, 0 = off)")
      ->capture_default_str();
  cap->add_option("--d", c_d, "Lattice dimension (int)")->capture_default_str();
  cap->add_option("--method", c_method,
                  "escape_sum | decomposition | hitting | sausage")
      ->capture_default_str();
  cap->add_option("--R", c_R, "Truncation radius for escape walks (float)")
      ->capture_default_str();
  cap->add_option("--y-radius", c_y, "Far-sphere start radius for hitting (float)")
      ->capture_default_str();
  cap->add_option("--kill-factor", c_kill, "Kill radius over y-radius (float)")
      ->capture_default_str();
  cap->add_option("--eps", c_eps, "Sausage radius for --method sausage (float)")
      ->capture_default_str();
  cap->add_option("--trials", c_trials,
                  "Trials per point (escape_sum/decomposition) or total "
                  "(hitting/sausage) (int)")
      ->capture_default_str();
  auto* c_seed_opt = cap->add_option("--seed", c_seed, "Master seed (uint64)");
  cap->add_option("--stream", c_stream, "Stream id (uint64)")->capture_default_str();
  cap->add_option("--threads", c_threads, "Worker threads (int, 0 = default)")
      ->capture_default_str();
  cap->add_option("--csv", c_csv, "Append a CSV row here (file)");

  // oracle
  auto* ora = app.add_subcommand(
      "oracle", "Exact finite-chain identity checks; exits 0 iff the largest "
                "|capacity - decomposition| is at most 1e-10");
  std::string o_suite = "decomposition", o_file, o_set;
  int o_chains = 1000, o_max_states = 50, o_max_subset = 8, o_orderings = 3;
  std::uint64_t o_seed = 0;
  ora->add_option("--suite", o_suite, "Suite name: decomposition")
      ->capture_default_str();
  ora->add_option("--chains", o_chains, "Random chains to draw (int)")
      ->capture_default_str();
  ora->add_option("--max-states", o_max_states, "Max states per chain (int)")
      ->capture_default_str();
  ora->add_option("--max-subset", o_max_subset, "Max subset size (int)")
      ->capture_default_str();
  ora->add_option("--orderings", o_orderings, "Orderings per subset (int)")
      ->capture_default_str();
  auto* o_seed_opt = ora->add_option("--seed", o_seed, "Master seed (uint64)");
  ora->add_option("--file", o_file,
                  "Run on this chain file (header n_states, then i j p triplets) "
                  "instead of random chains");
  ora->add_option("--set", o_set, "Comma-separated ordered state list for --file");

  // twosided
  auto* two = app.add_subcommand(
      "twosided", "Conditioned two-sided sampling, acceptance-rate reports and "
                  "shift diagnostics (JSON output)");
  int t_d = 5;
  std::int64_t t_side = 64, t_horizon = 256, t_samples = 100, t_diag_samples = 2000;
  std::uint64_t t_seed = 0, t_stream = 0;
  std::string t_dump_fwd, t_dump_bwd, t_diag, t_kshifts = "1,5,25";
  two->add_option("--d", t_d, "Lattice dimension, >= 5 (int)")->capture_default_str();
  two->add_option("--side-len", t_side, "Points per side (int)")->capture_default_str();
  two->add_option("--horizon", t_horizon, "Walk horizon per attempt (int)")
      ->capture_default_str();
  two->add_option("--samples", t_samples, "Accepted samples to draw (int)")
      ->capture_default_str();
  auto* t_seed_opt = two->add_option("--seed", t_seed, "Master seed (uint64)");
  two->add_option("--stream", t_stream, "Stream id (uint64)")->capture_default_str();
  two->add_option("--dump-forward", t_dump_fwd, "Save the last forward side (file)");
  two->add_option("--dump-backward", t_dump_bwd, "Save the last backward side (file)");
  two->add_option("--diagnostic", t_diag, "Diagnostic to run: stationarity");
  two->add_option("--k-shifts", t_kshifts, "Comma-separated shifts (diagnostic)")
      ->capture_default_str();
  two->add_option("--diag-samples", t_diag_samples,
                  "Samples per diagnostic batch (int)")
      ->capture_default_str();

  // experiment
  auto* exp = app.add_subcommand(
      "experiment", "Run an experiment from a flat key-value config file; "
                    "writes CSV/JSON/plot-data into the output directory");
  std::string e_config, e_out;
  int e_threads = 0;
  std::uint64_t e_seed = 0;
  exp->add_option("--config", e_config, "Config file (key = value lines)")
      ->required();
  exp->add_option("--out-dir", e_out, "Output directory (overrides config)");
  exp->add_option("--threads", e_threads, "Worker threads (int, 0 = default)")
      ->capture_default_str();
  auto* e_seed_opt = exp->add_option("--seed", e_seed, "Master seed override (uint64)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (walk->parsed()) {
      std::uint64_t seed = resolve_seed(!w_seed_opt->empty(), w_seed);
      echo_config("walk", {{"d", w_d},
                           {"steps", w_steps},
                           {"target_len", w_target},
                           {"safety_factor", w_safety},
                           {"seed", seed},
                           {"stream", w_stream},
                           {"loop_erase", w_le},
                           {"cut_times", w_cuts},
                           {"erasure_times", w_times},
                           {"out", w_out}});
      return run_walk(w_d, w_steps, w_target, w_safety, seed, w_stream, w_le,
                      w_cuts, w_times, w_out);
    }
    if (cap->parsed()) {
      std::uint64_t seed = resolve_seed(!c_seed_opt->empty(), c_seed);
      echo_config("capacity", {{"points", c_points},
                               {"lerw_len", c_lerw},
                               {"d", c_d},
                               {"method", c_method},
                               {"R", c_R},
                               {"y_radius", c_y},
                               {"kill_factor", c_kill},
                               {"eps", c_eps},
                               {"trials", c_trials},
                               {"seed", seed},
                               {"stream", c_stream},
                               {"threads", c_threads},
                               {"csv", c_csv}});
      return run_capacity(c_points, c_lerw, c_d, c_method, c_R, c_y, c_kill,
                          c_eps, c_trials, seed, c_stream, c_threads, c_csv);
    }
    if (ora->parsed()) {
      std::uint64_t seed = resolve_seed(!o_seed_opt->empty(), o_seed);
      echo_config("oracle", {{"suite", o_suite},
                             {"chains", o_chains},
                             {"max_states", o_max_states},
                             {"max_subset", o_max_subset},
                             {"orderings", o_orderings},
                             {"seed", seed},
                             {"file", o_file},
                             {"set", o_set}});
      return run_oracle(o_suite, o_file, o_set, o_chains, o_max_states,
                        o_max_subset, o_orderings, seed);
    }
    if (two->parsed()) {
      std::uint64_t seed = resolve_seed(!t_seed_opt->empty(), t_seed);
      echo_config("twosided", {{"d", t_d},
                               {"side_len", t_side},
                               {"horizon", t_horizon},
                               {"samples", t_samples},
                               {"seed", seed},
                               {"stream", t_stream},
                               {"diagnostic", t_diag},
                               {"k_shifts", t_kshifts},
                               {"diag_samples", t_diag_samples}});
      return run_twosided(t_d, t_side, t_horizon, t_samples, seed, t_stream,
                          t_dump_fwd, t_dump_bwd, t_diag, t_kshifts,
                          t_diag_samples);
    }
    if (exp->parsed()) {
      bool seed_given = !e_seed_opt->empty();
      std::uint64_t seed = seed_given ? e_seed : 0;
      echo_config("experiment", {{"config", e_config},
                                 {"out_dir", e_out},
                                 {"threads", e_threads},
                                 {"seed_override", seed_given},
                                 {"seed", seed}});
      return run_experiment_cmd(e_config, e_out, e_threads, seed_given, seed);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const RuntimeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
