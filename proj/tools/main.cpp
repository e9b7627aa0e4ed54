// Command-line pipeline: simulate synthetic registries, run the matching
// analysis for one method, or compare all four methods side by side. Every
// stage writes self-describing CSV/JSON artifacts into the output directory.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "propproc/csv.hpp"
#include "propproc/errors.hpp"
#include "propproc/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace propproc;

namespace {

struct CliConfig {
  json raw;
  std::string config_dir;

  bool has(const char* key) const { return raw.contains(key); }
};

CliConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  CliConfig cfg;
  try {
    in >> cfg.raw;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  cfg.config_dir = fs::path(path).parent_path().string();
  return cfg;
}

std::string resolve_path(const CliConfig& cfg, const std::string& p) {
  fs::path fp(p);
  if (fp.is_absolute() || cfg.config_dir.empty()) return p;
  return (fs::path(cfg.config_dir) / fp).string();
}

IngestConfig ingest_from(const json& j) {
  IngestConfig ic;
  if (!j.contains("horizon_L")) throw ConfigError("registry.horizon_L is required");
  ic.horizon_L = j.at("horizon_L").get<double>();
  ic.time_unit = j.value("time_unit", std::string("months"));
  ic.truncate_at_U = j.value("truncate_at_U", false);
  return ic;
}

Registry load_registry_from(const CliConfig& cfg) {
  if (!cfg.has("registry")) throw ConfigError("config needs a 'registry' section");
  const json& r = cfg.raw["registry"];
  if (!r.contains("subjects") || !r.contains("visits")) {
    throw ConfigError("registry.subjects and registry.visits are required");
  }
  return load_registry(resolve_path(cfg, r["subjects"].get<std::string>()),
                       resolve_path(cfg, r["visits"].get<std::string>()),
                       ingest_from(r));
}

AnalysisOptions analysis_from(const CliConfig& cfg, std::optional<int> grid_override) {
  AnalysisOptions opts;
  if (cfg.has("analysis")) {
    const json& a = cfg.raw["analysis"];
    opts.degree = a.value("degree", 3);
    if (a.contains("interior_knots") && !a["interior_knots"].is_null()) {
      opts.interior_knots = a["interior_knots"].get<std::vector<double>>();
    }
    opts.n_interior_knots = a.value("n_interior_knots", 4);
    if (a.contains("lambda") && !a["lambda"].is_null()) {
      opts.lambda = a["lambda"].get<double>();
    }
    if (a.contains("time_varying") && !a["time_varying"].is_null()) {
      opts.tv_names = a["time_varying"].get<std::vector<std::string>>();
    }
    if (a.contains("baseline") && !a["baseline"].is_null()) {
      opts.baseline_names = a["baseline"].get<std::vector<std::string>>();
    }
    opts.grid_cells = a.value("grid_cells", 200);
    if (a.contains("max_Q") && !a["max_Q"].is_null()) {
      opts.max_Q = a["max_Q"].get<double>();
    }
  }
  if (grid_override) opts.grid_cells = *grid_override;
  return opts;
}

SimConfig sim_from(const CliConfig& cfg, std::optional<std::uint64_t> seed_override) {
  if (!cfg.has("sim")) throw ConfigError("config needs a 'sim' section");
  SimConfig sim = cfg.raw["sim"].get<SimConfig>();
  if (seed_override) sim.seed = *seed_override;
  else if (cfg.has("seed")) sim.seed = cfg.raw["seed"].get<std::uint64_t>();
  sim.validate();
  return sim;
}

std::string out_dir(const CliConfig& cfg, const std::string& flag) {
  std::string dir = flag;
  if (dir.empty() && cfg.has("out")) dir = cfg.raw["out"].get<std::string>();
  if (dir.empty()) throw ConfigError("no output directory: set --out or config 'out'");
  fs::create_directories(dir);
  return dir;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_balance_csv(const std::string& path,
                       const std::vector<BalanceResult>& balance) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& b : balance) {
    rows.push_back({b.covariate, b.method, csv::format_double(b.statistic),
                    csv::format_double(b.p_value), std::to_string(b.n_events_used)});
  }
  csv::write(path, {"covariate", "method", "statistic", "p_value", "n_events"}, rows);
}

void write_outcome_csv(const std::string& path, const OutcomeResult& o) {
  csv::write(path,
             {"method", "median_difference", "p_value", "statistic", "n", "n_a",
              "n_b", "exact"},
             {{o.method, csv::format_double(o.median_difference),
               csv::format_double(o.p_value), csv::format_double(o.statistic),
               std::to_string(o.n), std::to_string(o.n_a), std::to_string(o.n_b),
               o.exact ? "1" : "0"}});
}

json outcome_to_json(const OutcomeResult& o) {
  return json{{"method", o.method},
              {"median_difference", o.median_difference},
              {"p_value", o.p_value},
              {"statistic", o.statistic},
              {"n", o.n},
              {"n_a", o.n_a},
              {"n_b", o.n_b},
              {"exact", o.exact}};
}

json balance_to_json(const std::vector<BalanceResult>& balance) {
  json arr = json::array();
  for (const auto& b : balance) {
    arr.push_back({{"covariate", b.covariate},
                   {"method", b.method},
                   {"statistic", b.statistic},
                   {"p_value", b.p_value},
                   {"n_events", b.n_events_used}});
  }
  return arr;
}

int cmd_simulate(const CliConfig& cfg, const std::string& out_flag,
                 std::optional<std::uint64_t> seed) {
  const SimConfig sim = sim_from(cfg, seed);
  const std::string dir = out_dir(cfg, out_flag);
  auto [reg, truth] = simulate_registry(sim);
  save_registry(reg, dir + "/subjects.csv", dir + "/visits.csv");
  write_truth_csv(dir + "/truth.csv", sim, truth);
  write_json(dir + "/ingest.json", json{{"horizon_L", reg.horizon_L},
                                        {"time_unit", reg.time_unit},
                                        {"truncate_at_U", false}});
  std::cout << "simulated " << reg.n() << " subjects into " << dir << "\n";
  return 0;
}

int cmd_validate(const CliConfig& cfg) {
  const Registry reg = load_registry_from(cfg);
  const ValidationReport rep = validate(reg);
  std::cout << rep.to_string();
  return rep.empty() ? 0 : 3;
}

int cmd_analyze(const CliConfig& cfg, const std::string& method_name,
                const std::string& out_flag, std::optional<int> grid) {
  const auto method = parse_method(method_name);
  if (!method) throw ConfigError("unknown method '" + method_name + "'");
  const Registry reg = load_registry_from(cfg);
  const std::string dir = out_dir(cfg, out_flag);

  AnalysisSession session(reg, analysis_from(cfg, grid));
  const MethodArtifacts art = session.run(*method);

  if (*method != Method::naive) {
    json models = json::array();
    for (const auto& m : session.spline_models()) models.push_back(m);
    write_json(dir + "/spline_models.json", models);
  }
  if (art.cox) write_json(dir + "/cox_model.json", cox_model_to_json(*art.cox));
  if (!art.paths.empty()) write_paths_csv(dir + "/paths.csv", art.paths);
  if (art.matches) {
    write_matchset_csv(dir + "/matches.csv", *art.matches);
    write_json(dir + "/matches.json", matchset_to_json(*art.matches));
  }
  write_balance_csv(dir + "/balance.csv", art.balance);
  write_json(dir + "/balance.json", balance_to_json(art.balance));
  write_outcome_csv(dir + "/outcome.csv", art.outcome);
  write_json(dir + "/outcome.json", outcome_to_json(art.outcome));

  std::cout << "method " << method_label(*method);
  if (art.matches) {
    std::cout << ": " << art.matches->M() << " pairs, "
              << art.matches->unmatched_treated.size() << " unmatched treated";
  }
  std::cout << "; outcome median diff " << csv::format_double(art.outcome.median_difference)
            << " (p=" << csv::format_double(art.outcome.p_value) << ")\n";
  return 0;
}

int compare_single(const CliConfig& cfg, const std::vector<Method>& methods,
                   const std::string& dir, std::optional<int> grid) {
  const Registry reg = load_registry_from(cfg);
  AnalysisSession session(reg, analysis_from(cfg, grid));

  std::vector<std::string> bal_header = {"covariate", "prior"};
  std::vector<Method> matched;
  for (Method m : methods) {
    if (m != Method::naive) {
      matched.push_back(m);
      bal_header.push_back(method_label(m));
    }
  }

  std::map<std::string, std::vector<std::string>> bal_rows;
  for (const auto& b : session.prior_balance()) {
    bal_rows[b.covariate] = {b.covariate, csv::format_double(b.p_value)};
  }

  std::vector<std::vector<std::string>> outcome_rows;
  for (Method m : methods) {
    const MethodArtifacts art = session.run(m);
    if (m != Method::naive) {
      for (const auto& b : art.balance) {
        bal_rows[b.covariate].push_back(csv::format_double(b.p_value));
      }
    }
    outcome_rows.push_back({method_label(m),
                            csv::format_double(art.outcome.median_difference),
                            csv::format_double(art.outcome.p_value),
                            std::to_string(art.matches ? art.matches->M() : 0)});
  }

  std::vector<std::vector<std::string>> bal_out;
  for (const auto& cov : session.balance_covariates()) bal_out.push_back(bal_rows[cov]);
  csv::write(dir + "/balance_table.csv", bal_header, bal_out);
  csv::write(dir + "/outcome_table.csv",
             {"method", "median_difference", "p_value", "pairs"}, outcome_rows);
  std::cout << "wrote " << dir << "/balance_table.csv and outcome_table.csv\n";
  return 0;
}

int compare_replicated(const CliConfig& cfg, const std::vector<Method>& methods,
                       int replicates, const std::string& dir,
                       std::optional<std::uint64_t> seed, std::optional<int> grid) {
  const SimConfig sim = sim_from(cfg, seed);
  const AnalysisOptions opts = analysis_from(cfg, grid);
  const ComparisonResult res = method_comparison(sim, replicates, methods, opts);

  std::vector<std::string> rep_header = {"replicate", "method",    "usable",
                                         "estimate",  "bias",      "p_outcome",
                                         "pairs"};
  for (const auto& cov : res.covariates) rep_header.push_back("balance_" + cov);
  std::vector<std::vector<std::string>> rep_rows;
  for (const auto& row : res.rows) {
    std::vector<std::string> r = {std::to_string(row.replicate),
                                  method_label(row.method),
                                  row.usable ? "1" : "0",
                                  csv::format_double(row.estimate),
                                  csv::format_double(row.bias),
                                  csv::format_double(row.p_outcome),
                                  std::to_string(row.pairs)};
    for (const auto& cov : res.covariates) {
      const auto it = row.balance_p.find(cov);
      r.push_back(it == row.balance_p.end() ? "" : csv::format_double(it->second));
    }
    rep_rows.push_back(std::move(r));
  }
  csv::write(dir + "/replicates.csv", rep_header, rep_rows);

  std::vector<std::vector<std::string>> agg_rows;
  for (Method m : res.methods) {
    const MethodAggregate& a = res.aggregate.at(m);
    agg_rows.push_back({method_label(m), std::to_string(a.n_used),
                        csv::format_double(a.mean_bias),
                        csv::format_double(a.mean_abs_bias),
                        csv::format_double(a.rejection_rate),
                        csv::format_double(a.mean_pairs)});
  }
  csv::write(dir + "/outcome_table.csv",
             {"method", "n_used", "mean_bias", "mean_abs_bias", "rejection_rate",
              "mean_pairs"},
             agg_rows);

  std::vector<std::string> bal_header = {"covariate", "prior_reject_rate"};
  for (Method m : res.methods) {
    if (m != Method::naive) bal_header.push_back(method_label(m) + "_reject_rate");
  }
  std::vector<std::vector<std::string>> bal_rows;
  for (const auto& cov : res.covariates) {
    std::vector<std::string> r = {
        cov, csv::format_double(res.prior_balance_reject_rate.at(cov))};
    for (Method m : res.methods) {
      if (m == Method::naive) continue;
      const auto& rates = res.aggregate.at(m).balance_reject_rate;
      const auto it = rates.find(cov);
      r.push_back(it == rates.end() ? "" : csv::format_double(it->second));
    }
    bal_rows.push_back(std::move(r));
  }
  csv::write(dir + "/balance_table.csv", bal_header, bal_rows);
  std::cout << "compared " << methods.size() << " methods over " << replicates
            << " replicates into " << dir << "\n";
  return 0;
}

int cmd_compare(const CliConfig& cfg, const std::string& out_flag,
                std::optional<std::uint64_t> seed, std::optional<int> grid) {
  std::vector<Method> methods = {Method::naive, Method::propensity_function,
                                 Method::interpolated_gps, Method::propensity_process};
  int replicates = 0;
  if (cfg.has("compare")) {
    const json& c = cfg.raw["compare"];
    replicates = c.value("replicates", 0);
    if (c.contains("methods")) {
      methods.clear();
      for (const auto& name : c["methods"]) {
        const auto m = parse_method(name.get<std::string>());
        if (!m) throw ConfigError("compare.methods: unknown method " + name.dump());
        methods.push_back(*m);
      }
    }
  }
  const std::string dir = out_dir(cfg, out_flag);
  if (replicates >= 1) return compare_replicated(cfg, methods, replicates, dir, seed, grid);
  return compare_single(cfg, methods, dir, grid);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"propensity-process estimation, matching and diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_flag;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  app.add_option("--config", config_path, "pipeline config (JSON)")->required();
  app.add_option("--out", out_flag, "output directory (overrides config)");
  app.add_option("--seed", seed, "RNG seed (overrides config)");
  app.add_option("--grid", grid, "time-grid cells G (overrides config)");

  auto* sim_cmd = app.add_subcommand("simulate", "draw a synthetic registry");
  auto* validate_cmd = app.add_subcommand("validate", "check registry invariants");
  auto* analyze_cmd = app.add_subcommand("analyze", "run one method end to end");
  std::string method_name;
  analyze_cmd->add_option("--method", method_name, "naive|pf|gps|pp")->required();
  auto* compare_cmd = app.add_subcommand("compare", "four-way method comparison");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const CliConfig cfg = load_config(config_path);
    if (sim_cmd->parsed()) return cmd_simulate(cfg, out_flag, seed);
    if (validate_cmd->parsed()) return cmd_validate(cfg);
    if (analyze_cmd->parsed()) return cmd_analyze(cfg, method_name, out_flag, grid);
    if (compare_cmd->parsed()) return cmd_compare(cfg, out_flag, seed, grid);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
