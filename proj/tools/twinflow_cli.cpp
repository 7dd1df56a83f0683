// twinflow: deterministic simulator of a digital-twin assisted edge network
// with two-timescale control (frame-level association/retraining decisions,
// slot-level DQN resource allocation).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twinflow/twinflow.hpp"

namespace fs = std::filesystem;
using namespace twinflow;

namespace {

struct SeedRange {
  std::uint64_t lo = 1, hi = 1;
};

// "a..b" inclusive, or a single value.
SeedRange parse_seeds(const std::string& text) {
  SeedRange r;
  auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stoull(text);
    } else {
      r.lo = std::stoull(text.substr(0, dots));
      r.hi = std::stoull(text.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw CLI::ValidationError("--seeds", "expected N or A..B, got '" + text + "'");
  }
  if (r.hi < r.lo)
    throw CLI::ValidationError("--seeds", "range end before start");
  return r;
}

std::optional<SchemeKind> parse_scheme(const std::string& name) {
  if (name == "proposed") return SchemeKind::Proposed;
  if (name == "no-il") return SchemeKind::NoIncrementalLearning;
  if (name == "no-dt") return SchemeKind::NoDigitalTwin;
  if (name == "single-timescale") return SchemeKind::SingleTimescale;
  return std::nullopt;
}

ScenarioConfig resolve_config(const std::string& config_path, long shift_frame) {
  ScenarioConfig cfg;
  if (!config_path.empty()) {
    cfg = load_config(config_path);
  } else {
    auto v = validate_config(cfg);
    cfg = v.config;
  }
  if (shift_frame >= 0) cfg.shift_frame = shift_frame;
  return cfg;
}

fs::path resolve_out(const std::string& flag_value) {
  if (const char* env = std::getenv("TWINFLOW_OUT"); env && *env)
    return fs::path(env);
  return fs::path(flag_value.empty() ? "out" : flag_value);
}

fs::path run_dir(const fs::path& out, SchemeKind scheme, std::uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s-seed%03llu", scheme_name(scheme),
                static_cast<unsigned long long>(seed));
  return out / buf;
}

int do_runs(const ScenarioConfig& base, const std::vector<SchemeKind>& schemes,
            SeedRange seeds, const fs::path& out, const std::string& cfg_path) {
  json comparison = json::array();
  for (std::uint64_t seed = seeds.lo; seed <= seeds.hi; ++seed) {
    for (SchemeKind scheme : schemes) {
      ScenarioConfig cfg = base;
      cfg.rng_seed = seed;
      RunResult result = run_simulation(cfg, scheme, seed);
      fs::path dir = run_dir(out, scheme, seed);
      write_metrics(result, cfg, dir, cfg_path);
      comparison.push_back(summary_to_json(result.summary));
      std::printf("%-17s seed %3llu  mean delay %9.4f s  p95 %9.4f s  acc %.4f"
                  "  retrains %ld  breakouts %ld\n",
                  scheme_name(scheme), static_cast<unsigned long long>(seed),
                  result.summary.mean_delay_s, result.summary.p95_delay_s,
                  result.summary.mean_accuracy, result.summary.retrain_count,
                  result.summary.breakout_count);
    }
  }
  if (schemes.size() > 1) {
    fs::create_directories(out);
    std::ofstream cmp(out / "comparison.json", std::ios::binary);
    if (!cmp) {
      std::fprintf(stderr, "error: cannot write comparison.json\n");
      return 1;
    }
    cmp << comparison.dump(2) << "\n";
  }
  return 0;
}

int run_oracle_suites() {
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::printf("[oracle] %-28s %s\n", name, ok ? "PASS" : "FAIL");
    if (!ok) ++failures;
  };

  {  // simplex vs vertex enumeration
    Rng rng(4242);
    bool ok = true;
    int solved = 0;
    for (int trial = 0; trial < 200 && solved < 50; ++trial) {
      int n = rng.uniform_int(2, 6), m = rng.uniform_int(1, 6);
      LpProblem p;
      p.maximize = rng.u01() < 0.5;
      p.objective.resize(n);
      for (auto& c : p.objective) c = std::round(rng.uniform(-5, 5));
      p.lower.assign(n, 0.0);
      p.upper.assign(n, 8.0);
      for (int i = 0; i < m; ++i) {
        std::vector<double> row(n);
        for (auto& a : row) a = std::round(rng.uniform(-4, 4));
        p.rows.push_back(row);
        p.rhs.push_back(std::round(rng.uniform(-6, 12)));
        p.senses.push_back(rng.u01() < 0.7 ? RowSense::LessEqual
                                           : RowSense::GreaterEqual);
      }
      auto mine = simplex_solve(p);
      auto ref = oracle::lp_enumerate_vertices(p);
      if (!ref.feasible) {
        ok = ok && mine.status == LpStatus::Infeasible;
        continue;
      }
      ok = ok && mine.status == LpStatus::Optimal &&
           std::fabs(mine.objective - ref.objective) < 1e-7;
      ++solved;
    }
    report("simplex-vs-enumeration", ok && solved >= 50);
  }

  {  // association branch-and-bound vs exhaustive search
    Rng rng(777);
    bool ok = true;
    for (int trial = 0; trial < 200; ++trial) {
      AssociationProblem ap;
      ap.num_bs = 3;
      ap.num_mus = rng.uniform_int(1, 4);
      ap.costs.resize(static_cast<std::size_t>(ap.num_bs) * ap.num_mus);
      for (auto& c : ap.costs) c = rng.uniform(0.05, 10.0);
      auto mine = solve_association(ap);
      auto ref = oracle::enumerate_associations(ap.costs, ap.num_bs, ap.num_mus);
      ok = ok && std::fabs(mine.objective - ref.objective) <= 1e-9;
    }
    report("association-bnb", ok);
  }

  {  // KL argmin vs brute force
    Rng rng(31337);
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      int k = rng.uniform_int(2, 6);
      int count = rng.uniform_int(1, 50);
      std::vector<ClassDistribution> cands;
      for (int i = 0; i < count; ++i) {
        std::vector<double> v(static_cast<std::size_t>(k));
        double s = 0;
        for (auto& x : v) {
          x = rng.u01_open();
          s += x;
        }
        for (auto& x : v) x /= s;
        cands.emplace_back(ClassDistribution(v));
      }
      std::vector<double> qv(static_cast<std::size_t>(k));
      double s = 0;
      for (auto& x : qv) {
        x = rng.u01_open();
        s += x;
      }
      for (auto& x : qv) x /= s;
      ClassDistribution q{qv};
      ok = ok && optimal_generation_index(q, cands) ==
                     oracle::kl_argmin_brute_force(q, cands);
    }
    report("kl-argmin", ok);
  }

  {  // gradient check
    Rng rng(999);
    bool ok = true;
    for (int t = 0; t < 10; ++t) {
      auto f = oracle::draw_gradient_fixture(rng);
      auto res = oracle::finite_difference_check(f.net, f.batch, f.targets);
      ok = ok && res.max_rel_err <= 1e-4;
    }
    report("gradient-check", ok);
  }

  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"twinflow: digital-twin assisted edge network simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string scheme_name_arg = "proposed";
  std::string seeds_arg = "1..1";
  std::string out_arg;
  long shift_frame = -1;

  auto add_common = [&](CLI::App* cmd, bool with_scheme) {
    cmd->add_option("--config", config_path, "JSON config file (defaults if omitted)");
    if (with_scheme)
      cmd->add_option("--scheme", scheme_name_arg,
                      "proposed | no-il | no-dt | single-timescale");
    cmd->add_option("--seeds", seeds_arg, "seed or inclusive range a..b");
    cmd->add_option("--out", out_arg, "output directory (TWINFLOW_OUT overrides)");
    cmd->add_option("--shift-frame", shift_frame,
                    "frame index of the distribution shift (-1 disables)");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run one scheme");
  add_common(run_cmd, true);
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "run all four schemes with paired seeds");
  add_common(compare_cmd, false);
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check a config file and exit");
  validate_cmd->add_option("--config", config_path, "JSON config file")
      ->required();
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "run the LP/KL/gradient oracle suites");
  (void)oracle_cmd;

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) {
      try {
        load_config(config_path);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
      }
      std::printf("config ok: %s\n", config_path.c_str());
      return 0;
    }
    if (oracle_cmd->parsed()) return run_oracle_suites();

    ScenarioConfig cfg;
    try {
      cfg = resolve_config(config_path, shift_frame);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "%s\n", e.what());
      return 2;
    }
    SeedRange seeds = parse_seeds(seeds_arg);
    fs::path out = resolve_out(out_arg);

    if (run_cmd->parsed()) {
      auto scheme = parse_scheme(scheme_name_arg);
      if (!scheme) {
        std::fprintf(stderr, "error: unknown scheme '%s'\n",
                     scheme_name_arg.c_str());
        return 2;
      }
      return do_runs(cfg, {*scheme}, seeds, out, config_path);
    }
    // compare: all four schemes, paired seeds
    return do_runs(cfg,
                   {SchemeKind::Proposed, SchemeKind::NoIncrementalLearning,
                    SchemeKind::NoDigitalTwin, SchemeKind::SingleTimescale},
                   seeds, out, config_path);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
