#pragma once

// Front-end orchestration for the planner: loads a topology, derives the
// failure-independence matrix and secondary paths once, builds and solves the
// placement model, audits the result, and emits reports.  The three entry
// points back the `place`, `sweep`, and `inspect` subcommands; cli_main wires
// them to the command line.
//
// Exit codes: 0 success, 2 invalid input, 3 solver timeout without an
// incumbent, 4 internal consistency failure (a solution failed the audit).

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wanplace/failure_model.hpp"
#include "wanplace/metrics.hpp"
#include "wanplace/placement_model.hpp"
#include "wanplace/secondary_paths.hpp"
#include "wanplace/solver.hpp"
#include "wanplace/topology.hpp"

namespace wanplace {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitTimeoutNoIncumbent = 3;
inline constexpr int kExitInternal = 4;

struct RunConfig {
  std::string topology_path;
  std::vector<double> alphas;   // exactly one for place, >=1 for sweep
  std::vector<double> lworsts;  // milliseconds
  std::vector<int> gammas{1};
  double bandwidth_mbps = kDefaultBandwidthMbps;
  std::optional<long> umax;  // empty = unbounded
  std::string solver = "exact";
  double time_limit_s = 300.0;
  std::string out_path;  // place: report file (stdout if empty); sweep: dir
  std::string csv_path;  // sweep only
  std::string dump_model_path;  // optional LP-format dump of the model
};

struct PlaceResult {
  int exit_code = kExitOk;
  std::string report_text;  // JSON report, trailing newline
  std::string model_text;   // filled when dump_model_path is set
  std::string error;
};

struct SweepCell {
  double alpha = 0.0;
  double lworst_ms = 0.0;
  int gamma = 1;
  std::string status;  // OPTIMAL | FEASIBLE | TIMEOUT | ERROR
  std::string file;    // per-cell report file name, empty on ERROR
  long total_primary = 0;
  long total_backup = 0;
  std::string error;
};

struct SweepResult {
  int exit_code = kExitOk;
  std::string error;
  std::string csv_text;
  std::string summary_text;  // sweep.json content
  std::vector<std::pair<std::string, std::string>> cell_files;  // name, body
  std::vector<SweepCell> cells;
};

struct InspectResult {
  int exit_code = kExitOk;
  std::string text;
  std::string error;
};

namespace detail {

inline PlacementParams params_for(const RunConfig& cfg, double alpha,
                                  double lworst_ms, int gamma) {
  PlacementParams p;
  p.alpha = alpha;
  p.bandwidth_mbps = cfg.bandwidth_mbps;
  p.lworst_ms = lworst_ms;
  p.umax = cfg.umax;
  p.use_secondary_paths = gamma;
  p.validate();
  return p;
}

inline SolveOutcome dispatch_solver(const std::string& solver,
                                    const Topology& topo,
                                    const FailureIndependenceMatrix& I,
                                    const SecondaryPathSet& S,
                                    const PlacementParams& params,
                                    double time_limit_s,
                                    MilpModel* model_out) {
  MilpModel model = build_model(topo, I, S, params);
  SolveOutcome out;
  if (solver == "exact") {
    out = solve_exact(model, time_limit_s);
  } else if (solver == "greedy") {
    out = solve_greedy(model);
  } else if (solver == "oracle") {
    out = brute_force_oracle(topo, I, S, params);
  } else {
    throw std::invalid_argument("unknown solver: " + solver);
  }
  if (model_out != nullptr) {
    *model_out = std::move(model);
  }
  return out;
}

inline std::string violations_text(const std::vector<Violation>& violations) {
  std::string out;
  for (const Violation& v : violations) {
    char buf[96];
    std::snprintf(buf, sizeof buf, " (lhs=%.9g, rhs=%.9g)", v.lhs, v.rhs);
    out += "  " + v.equation + ": " + v.detail + buf + "\n";
  }
  return out;
}

inline bool write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  return out.good();
}

}  // namespace detail

inline PlaceResult run_place(const RunConfig& cfg) {
  PlaceResult res;
  try {
    if (cfg.alphas.size() != 1 || cfg.lworsts.size() != 1 ||
        cfg.gammas.size() != 1) {
      res.exit_code = kExitInvalidInput;
      res.error = "place expects exactly one alpha, lworst, and gamma";
      return res;
    }
    const Topology topo = load_topology(cfg.topology_path);
    const PlacementParams params =
        detail::params_for(cfg, cfg.alphas[0], cfg.lworsts[0], cfg.gammas[0]);
    const FailureIndependenceMatrix I = build_independence_matrix(topo);
    const SecondaryPathSet S = compute_secondary_paths(topo);
    MilpModel model;
    const SolveOutcome out = detail::dispatch_solver(
        cfg.solver, topo, I, S, params, cfg.time_limit_s, &model);
    if (!cfg.dump_model_path.empty()) {
      res.model_text = model.milp.to_lp_text();
    }
    if (out.status == SolveStatus::TIMEOUT && out.solution.sites.empty()) {
      res.exit_code = kExitTimeoutNoIncumbent;
      res.error = "time limit reached before any incumbent was found";
      return res;
    }
    const std::vector<Violation> violations =
        check_solution(out.solution, topo, I, S, params);
    if (!violations.empty()) {
      res.exit_code = kExitInternal;
      res.error = "solution failed the constraint audit:\n" +
                  detail::violations_text(violations);
      return res;
    }
    res.report_text = make_report(topo, out.solution, S, params,
                                  to_string(out.status), cfg.solver,
                                  cfg.time_limit_s)
                          .dump(2);
    res.report_text += '\n';
  } catch (const ValidationError& e) {
    res.exit_code = kExitInvalidInput;
    res.error = e.what();
  } catch (const std::invalid_argument& e) {
    res.exit_code = kExitInvalidInput;
    res.error = e.what();
  } catch (const std::exception& e) {
    res.exit_code = kExitInternal;
    res.error = e.what();
  }
  return res;
}

inline SweepResult run_sweep(const RunConfig& cfg) {
  SweepResult res;
  Topology topo;
  try {
    if (cfg.alphas.empty() || cfg.lworsts.empty() || cfg.gammas.empty()) {
      res.exit_code = kExitInvalidInput;
      res.error = "sweep needs at least one alpha, lworst, and gamma";
      return res;
    }
    topo = load_topology(cfg.topology_path);
  } catch (const std::exception& e) {
    res.exit_code = kExitInvalidInput;
    res.error = e.what();
    return res;
  }

  const FailureIndependenceMatrix I = build_independence_matrix(topo);
  const SecondaryPathSet S = compute_secondary_paths(topo);
  res.csv_text = std::string(kSweepCsvHeader) + "\n";

  // Primary totals of OPTIMAL cells, keyed by (alpha index, lworst index)
  // and gamma, for the capacity-reduction pairing.
  std::map<std::pair<std::size_t, std::size_t>,
           std::array<std::optional<long>, 2>>
      optimal_primaries;

  for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
    for (std::size_t li = 0; li < cfg.lworsts.size(); ++li) {
      for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
        SweepCell cell;
        cell.alpha = cfg.alphas[ai];
        cell.lworst_ms = cfg.lworsts[li];
        cell.gamma = cfg.gammas[gi];
        try {
          const PlacementParams params = detail::params_for(
              cfg, cell.alpha, cell.lworst_ms, cell.gamma);
          const SolveOutcome out =
              detail::dispatch_solver(cfg.solver, topo, I, S, params,
                                      cfg.time_limit_s, nullptr);
          const std::vector<Violation> violations =
              check_solution(out.solution, topo, I, S, params);
          if (!violations.empty()) {
            throw std::runtime_error("solution failed the constraint audit:\n" +
                                     detail::violations_text(violations));
          }
          cell.status = to_string(out.status);
          cell.total_primary = out.solution.total_primary();
          cell.total_backup = out.solution.total_backup();
          char name[64];
          std::snprintf(name, sizeof name, "cell_%zu_%zu_%zu.json", ai, li,
                        gi);
          cell.file = name;
          res.cell_files.emplace_back(
              cell.file, make_report(topo, out.solution, S, params,
                                     cell.status, cfg.solver,
                                     cfg.time_limit_s)
                                 .dump(2) +
                             "\n");
          res.csv_text += sweep_csv_row(cell.alpha, cell.lworst_ms, cell.gamma,
                                        cell.total_primary, cell.total_backup,
                                        server_efficiency(out.solution),
                                        cell.status);
          if (out.status == SolveStatus::OPTIMAL &&
              (cell.gamma == 0 || cell.gamma == 1)) {
            optimal_primaries[{ai, li}][static_cast<std::size_t>(cell.gamma)] =
                cell.total_primary;
          }
        } catch (const std::exception& e) {
          cell.status = "ERROR";
          cell.error = e.what();
          res.csv_text += sweep_csv_row(cell.alpha, cell.lworst_ms, cell.gamma,
                                        0, 0, std::nullopt, "ERROR");
        }
        res.cells.push_back(cell);
      }
    }
  }

  nlohmann::ordered_json summary;
  summary["topology"] = topo.name;
  summary["solver"] = cfg.solver;
  summary["bandwidth_mbps"] = cfg.bandwidth_mbps;
  if (cfg.umax) {
    summary["umax"] = *cfg.umax;
  } else {
    summary["umax"] = "UNBOUNDED";
  }
  nlohmann::ordered_json grid;
  grid["alpha"] = cfg.alphas;
  grid["lworst_ms"] = cfg.lworsts;
  grid["gamma"] = cfg.gammas;
  summary["grid"] = grid;

  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const SweepCell& cell : res.cells) {
    nlohmann::ordered_json c;
    c["alpha"] = cell.alpha;
    c["lworst_ms"] = cell.lworst_ms;
    c["gamma"] = cell.gamma;
    c["status"] = cell.status;
    if (cell.status == "ERROR") {
      c["error"] = cell.error;
    } else {
      c["file"] = cell.file;
      c["total_primary"] = cell.total_primary;
      c["total_backup"] = cell.total_backup;
    }
    cells.push_back(c);
  }
  summary["cells"] = cells;

  // 1 - S/S' per (alpha, lworst) whenever both gamma variants solved to
  // proven optimality; TIMEOUT/FEASIBLE/ERROR cells are excluded.
  const bool has_g0 = std::count(cfg.gammas.begin(), cfg.gammas.end(), 0) > 0;
  const bool has_g1 = std::count(cfg.gammas.begin(), cfg.gammas.end(), 1) > 0;
  if (has_g0 && has_g1) {
    nlohmann::ordered_json reductions = nlohmann::ordered_json::array();
    for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
      for (std::size_t li = 0; li < cfg.lworsts.size(); ++li) {
        nlohmann::ordered_json r;
        r["alpha"] = cfg.alphas[ai];
        r["lworst_ms"] = cfg.lworsts[li];
        const auto it = optimal_primaries.find({ai, li});
        std::optional<double> value;
        if (it != optimal_primaries.end() && it->second[0] && it->second[1]) {
          value = capacity_reduction(*it->second[1], *it->second[0]);
        }
        if (value) {
          r["value"] = *value;
        } else {
          r["value"] = "NOT-APPLICABLE";
        }
        reductions.push_back(r);
      }
    }
    summary["capacity_reduction"] = reductions;
  }

  res.summary_text = summary.dump(2);
  res.summary_text += '\n';
  return res;
}

inline InspectResult run_inspect(const RunConfig& cfg,
                                 const std::string& what) {
  InspectResult res;
  try {
    const Topology topo = load_topology(cfg.topology_path);
    if (what == "matrix") {
      res.text = build_independence_matrix(topo).to_csv();
    } else if (what == "paths") {
      res.text = compute_secondary_paths(topo).dump();
    } else if (what == "bounds") {
      if (cfg.alphas.size() != 1) {
        res.exit_code = kExitInvalidInput;
        res.error = "inspect bounds requires --alpha";
        return res;
      }
      PlacementParams p;
      p.alpha = cfg.alphas[0];
      p.bandwidth_mbps = cfg.bandwidth_mbps;
      p.lworst_ms = cfg.lworsts.empty() ? 0.0 : cfg.lworsts[0];
      p.validate();
      res.text = variable_bounds(topo, p).dump();
    } else {
      res.exit_code = kExitInvalidInput;
      res.error = "unknown inspect artifact: " + what;
    }
  } catch (const ValidationError& e) {
    res.exit_code = kExitInvalidInput;
    res.error = e.what();
  } catch (const std::invalid_argument& e) {
    res.exit_code = kExitInvalidInput;
    res.error = e.what();
  } catch (const std::exception& e) {
    res.exit_code = kExitInternal;
    res.error = e.what();
  }
  return res;
}

inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Primary/backup server placement planner for WAN replication"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string umax_text = "unbounded";
  double alpha_single = 0.0;
  double lworst_single = 0.0;
  int gamma_single = 1;
  std::vector<double> alpha_list;
  std::vector<double> lworst_list;
  std::vector<int> gamma_list;
  std::string inspect_what;

  const auto add_solver_opts = [&](CLI::App* sub) {
    sub->add_option("--topology", cfg.topology_path, "Topology JSON file")
        ->required();
    sub->add_option("--bandwidth-mbps", cfg.bandwidth_mbps,
                    "Replication stream bandwidth per server copy (Mb/s)")
        ->capture_default_str();
    sub->add_option("--umax", umax_text,
                    "Maximum number of active sites, or 'unbounded'")
        ->capture_default_str();
    sub->add_option("--solver", cfg.solver, "Solver backend")
        ->check(CLI::IsMember({"exact", "greedy", "oracle"}))
        ->capture_default_str();
    sub->add_option("--time-limit-s", cfg.time_limit_s,
                    "Exact solver time limit in seconds")
        ->capture_default_str();
  };

  CLI::App* place = app.add_subcommand(
      "place", "Solve one placement instance and emit a JSON report");
  add_solver_opts(place);
  place->add_option("--alpha", alpha_single,
                    "Reservable fraction of each link capacity")
      ->required();
  place->add_option("--lworst-ms", lworst_single,
                    "Worst acceptable replication latency (ms)")
      ->required();
  place
      ->add_option("--gamma", gamma_single,
                   "1 = reserve secondary-path bandwidth, 0 = ignore it")
      ->check(CLI::Range(0, 1))
      ->capture_default_str();
  place->add_option("--out", cfg.out_path,
                    "Write the report here instead of stdout");
  place->add_option("--dump-model", cfg.dump_model_path,
                    "Also write the generated integer program (LP format)");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Solve a parameter grid; emit a CSV and per-cell reports");
  add_solver_opts(sweep);
  auto* sw_alpha = sweep->add_option("--alpha", alpha_single,
                                     "Single alpha value");
  auto* sw_alpha_list =
      sweep->add_option("--alpha-list", alpha_list,
                        "Comma-separated alpha values")
          ->delimiter(',');
  auto* sw_lworst = sweep->add_option("--lworst-ms", lworst_single,
                                      "Single latency bound (ms)");
  auto* sw_lworst_list =
      sweep->add_option("--lworst-list", lworst_list,
                        "Comma-separated latency bounds (ms)")
          ->delimiter(',');
  auto* sw_gamma = sweep->add_option("--gamma", gamma_single,
                                     "Single gamma value")
                       ->check(CLI::Range(0, 1));
  auto* sw_gamma_list = sweep->add_option("--gamma-list", gamma_list,
                                          "Comma-separated gamma values")
                            ->delimiter(',')
                            ->check(CLI::Range(0, 1));
  sweep->add_option("--out", cfg.out_path,
                    "Directory for per-cell reports and sweep.json")
      ->required();
  sweep->add_option("--csv", cfg.csv_path, "Write the sweep CSV here")
      ->required();

  CLI::App* inspect = app.add_subcommand(
      "inspect", "Print a derived artifact without solving");
  inspect->add_option("--topology", cfg.topology_path, "Topology JSON file")
      ->required();
  inspect
      ->add_option("what", inspect_what,
                   "Artifact to print: matrix | paths | bounds")
      ->required()
      ->check(CLI::IsMember({"matrix", "paths", "bounds"}));
  auto* in_alpha = inspect->add_option(
      "--alpha", alpha_single, "Reservable capacity fraction (for bounds)");
  auto* in_lworst = inspect->add_option("--lworst-ms", lworst_single,
                                        "Latency bound (ms), optional");
  inspect
      ->add_option("--bandwidth-mbps", cfg.bandwidth_mbps,
                   "Replication stream bandwidth (Mb/s)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidInput;
  }

  if (umax_text == "unbounded") {
    cfg.umax.reset();
  } else {
    try {
      std::size_t pos = 0;
      const long v = std::stol(umax_text, &pos);
      if (pos != umax_text.size()) {
        throw std::invalid_argument(umax_text);
      }
      cfg.umax = v;
    } catch (const std::exception&) {
      std::cerr << "--umax expects a nonnegative integer or 'unbounded'\n";
      return kExitInvalidInput;
    }
  }

  if (place->parsed()) {
    cfg.alphas = {alpha_single};
    cfg.lworsts = {lworst_single};
    cfg.gammas = {gamma_single};
    const PlaceResult r = run_place(cfg);
    if (r.exit_code != kExitOk) {
      std::cerr << r.error << "\n";
      return r.exit_code;
    }
    if (!cfg.dump_model_path.empty() &&
        !detail::write_file(cfg.dump_model_path, r.model_text)) {
      std::cerr << "cannot write " << cfg.dump_model_path << "\n";
      return kExitInvalidInput;
    }
    if (cfg.out_path.empty()) {
      std::fputs(r.report_text.c_str(), stdout);
    } else if (!detail::write_file(cfg.out_path, r.report_text)) {
      std::cerr << "cannot write " << cfg.out_path << "\n";
      return kExitInvalidInput;
    }
    return kExitOk;
  }

  if (sweep->parsed()) {
    if (sw_alpha_list->count() > 0) {
      cfg.alphas = alpha_list;
    } else if (sw_alpha->count() > 0) {
      cfg.alphas = {alpha_single};
    } else {
      cfg.alphas.clear();
    }
    if (sw_lworst_list->count() > 0) {
      cfg.lworsts = lworst_list;
    } else if (sw_lworst->count() > 0) {
      cfg.lworsts = {lworst_single};
    } else {
      cfg.lworsts.clear();
    }
    if (sw_gamma_list->count() > 0) {
      cfg.gammas = gamma_list;
    } else if (sw_gamma->count() > 0) {
      cfg.gammas = {gamma_single};
    } else {
      cfg.gammas = {1};
    }
    if (cfg.alphas.empty() || cfg.lworsts.empty()) {
      std::cerr << "sweep requires --alpha/--alpha-list and "
                   "--lworst-ms/--lworst-list\n";
      return kExitInvalidInput;
    }
    const SweepResult r = run_sweep(cfg);
    if (r.exit_code != kExitOk) {
      std::cerr << r.error << "\n";
      return r.exit_code;
    }
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_path, ec);
    if (ec) {
      std::cerr << "cannot create " << cfg.out_path << ": " << ec.message()
                << "\n";
      return kExitInvalidInput;
    }
    if (!detail::write_file(cfg.csv_path, r.csv_text)) {
      std::cerr << "cannot write " << cfg.csv_path << "\n";
      return kExitInvalidInput;
    }
    const std::filesystem::path outdir(cfg.out_path);
    for (const auto& [name, body] : r.cell_files) {
      if (!detail::write_file((outdir / name).string(), body)) {
        std::cerr << "cannot write " << (outdir / name).string() << "\n";
        return kExitInvalidInput;
      }
    }
    if (!detail::write_file((outdir / "sweep.json").string(),
                            r.summary_text)) {
      std::cerr << "cannot write sweep.json\n";
      return kExitInvalidInput;
    }
    return kExitOk;
  }

  // inspect
  cfg.alphas.clear();
  cfg.lworsts.clear();
  if (in_alpha->count() > 0) cfg.alphas = {alpha_single};
  if (in_lworst->count() > 0) cfg.lworsts = {lworst_single};
  const InspectResult r = run_inspect(cfg, inspect_what);
  if (r.exit_code != kExitOk) {
    std::cerr << r.error << "\n";
    return r.exit_code;
  }
  std::fputs(r.text.c_str(), stdout);
  return kExitOk;
}

}  // namespace wanplace
