// Copyright 2026 The Coalflow Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// coalflow: batch experiments on coalescing diffusive flows and their
// disturbance-flow approximations.
//
//   coalflow <command> --config <path> [--seed N] [--h X] [--jobs N] [--out DIR]
//
// Commands: validate-coeffs, sample-map, moments, simulate-sde,
// simulate-disturbance, path-convergence, reverse-check, metric.
// Exit status: 0 success, 1 configuration/validation error, 2 statistical
// check failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coalflow/coefficient_field.hpp"
#include "coalflow/disturbance.hpp"
#include "coalflow/io.hpp"
#include "coalflow/sde.hpp"
#include "coalflow/verify.hpp"
#include "coalflow/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct Run {
  json config;
  fs::path out_dir;
  std::uint64_t seed = 1;
  std::optional<double> h_override;
  int jobs = 1;
  std::map<std::string, std::string> outputs;  // file -> content hash

  double h() const {
    if (h_override) return *h_override;
    return config.at("h").get<double>();
  }

  std::vector<double> h_ladder() const {
    if (h_override) return {*h_override};
    const json& j = config.at("h");
    if (j.is_array()) return j.get<std::vector<double>>();
    return {j.get<double>()};
  }

  coalflow::CoefficientField field() const {
    double t0 = 0.0, t1 = 1.0;
    if (config.contains("window")) {
      t0 = config["window"][0].get<double>();
      t1 = config["window"][1].get<double>();
    }
    if (t1 < t0) std::swap(t0, t1);
    int grid_n = config.value("grid_n", 64);
    return coalflow::validate_field(config.at("a").get<std::string>(),
                                    config.at("b").get<std::string>(),
                                    t0, t1, grid_n);
  }

  void write(const std::string& name, const std::string& text) {
    fs::path p = out_dir / name;
    coalflow::write_text_file(p.string(), text);
    outputs[name] = hex64(fnv1a64(text));
  }

  void write_manifest(const std::string& command) {
    json m;
    m["command"] = command;
    m["config_hash"] = hex64(fnv1a64(config.dump()));
    m["seed"] = seed;
    m["versions"] = {{"coalflow", coalflow::kVersion}};
    json files = json::object();
    for (const auto& [k, v] : outputs) files[k] = v;
    m["outputs"] = files;
    coalflow::write_text_file((out_dir / "manifest.json").string(),
                              m.dump(2) + "\n");
  }
};

int cmd_validate_coeffs(Run& run) {
  coalflow::CoefficientField f = run.field();
  json out;
  out["a_star"] = f.a_star;
  out["a_upper"] = f.a_upper;
  out["b_upper"] = f.b_upper;
  out["a_prime_upper"] = f.a_prime_upper;
  out["lipschitz_estimate"] = f.lipschitz_estimate;
  out["a_prime"] = coalflow::print_expression(f.a_prime);
  run.write("validation.json", out.dump(2) + "\n");
  std::cout << "coefficients valid: a in [" << f.a_star << ", " << f.a_upper
            << "], |b| <= " << f.b_upper << "\n";
  return 0;
}

int cmd_sample_map(Run& run) {
  coalflow::CoefficientField f = run.field();
  double h = run.h();
  double t = run.config.value("t", 0.0);
  double theta = run.config.value("theta", 0.5);
  bool collapse_only = run.config.value("collapse_only", false);
  coalflow::CircleMap m =
      coalflow::sample_explicit_map({&f, h, t, theta, collapse_only});
  run.write("disturbance_map.json", coalflow::map_to_json(m).dump(2) + "\n");
  std::ostringstream plot;
  plot << "# x F(x)\n";
  for (int i = 0; i <= 1000; ++i) {
    double x = i / 1000.0;
    plot << coalflow::format_double(x) << " "
         << coalflow::format_double(
                coalflow::evaluate(m, x, coalflow::Side::right))
         << "\n";
  }
  run.write("disturbance_map.dat", plot.str());
  return 0;
}

int cmd_moments(Run& run) {
  coalflow::CoefficientField f = run.field();
  double t = run.config.value("t", 0.0);
  double x = run.config.value("x", 0.0);
  long long n = run.config.value("n_samples", 100000LL);
  coalflow::MomentOptions opts;
  opts.collapse_only = run.config.value("collapse_only", false);
  opts.jobs = run.jobs;
  bool reversed = run.config.value("reversed", false);
  std::ostringstream csv;
  csv << "h,t,x,b_h,a_h,M_h,lambda_h,B_h,A_h,ci_radius,samples\n";
  for (double h : run.h_ladder()) {
    coalflow::MomentReport rep =
        reversed
            ? coalflow::estimate_reversed_moments(f, h, t, x, n, run.seed, opts)
            : coalflow::estimate_moments(f, h, t, x, n, run.seed, opts);
    csv << coalflow::format_double(rep.h) << ","
        << coalflow::format_double(rep.t) << ","
        << coalflow::format_double(rep.x) << ","
        << coalflow::format_double(rep.b_h) << ","
        << coalflow::format_double(rep.a_h) << ","
        << coalflow::format_double(rep.M_h) << ","
        << coalflow::format_double(rep.lambda_h) << ","
        << coalflow::format_double(rep.B_h) << ","
        << coalflow::format_double(rep.A_h) << ","
        << coalflow::format_double(rep.ci_radius) << "," << rep.samples
        << "\n";
  }
  run.write("moments.csv", csv.str());
  return 0;
}

int cmd_simulate_sde(Run& run) {
  coalflow::CoefficientField f = run.field();
  std::vector<std::pair<double, double>> starts;
  for (const auto& s : run.config.at("starts")) {
    starts.emplace_back(s[0].get<double>(), s[1].get<double>());
  }
  double dt = run.config.value("dt", 1e-3);
  double t_end = run.config.value("t_end", 1.0);
  long long seeds = run.config.value("seeds", 1LL);
  long long stride = run.config.value("sample_stride", 1LL);
  std::ostringstream csv;
  csv << "seed,path_index,time,position,merged_into\n";
  for (long long s = 0; s < seeds; ++s) {
    coalflow::CoalescingEnsemble ens = coalflow::simulate_ensemble(
        f, starts, dt, t_end, coalflow::derive_seed(run.seed, 0x5de, s));
    for (std::size_t k = 0; k < ens.paths.size(); ++k) {
      const coalflow::FlowPath& p = ens.paths[k];
      for (std::size_t i = 0; i < p.times.size(); i += stride) {
        csv << s << "," << k << "," << coalflow::format_double(p.times[i])
            << "," << coalflow::format_double(p.values[i]) << ","
            << ens.merged_into[k] << "\n";
      }
    }
  }
  run.write("ensemble.csv", csv.str());
  return 0;
}

int cmd_simulate_disturbance(Run& run) {
  coalflow::CoefficientField f = run.field();
  double h = run.h();
  double t0 = run.config["window"][0].get<double>();
  double t1 = run.config["window"][1].get<double>();
  bool collapse_only = run.config.value("collapse_only", false);
  coalflow::DiscreteFlow flow =
      coalflow::build_disturbance_flow(f, h, t0, t1, run.seed, collapse_only);
  run.write("flow.json", coalflow::flow_to_json(flow).dump() + "\n");
  if (run.config.contains("starts")) {
    std::ostringstream csv;
    csv << "path_index,time,position\n";
    int idx = 0;
    for (const auto& s : run.config.at("starts")) {
      coalflow::FlowPath p =
          coalflow::extract_path(flow, s[0].get<double>(), s[1].get<double>(),
                                 coalflow::Side::right);
      for (std::size_t i = 0; i < p.times.size(); ++i) {
        csv << idx << "," << coalflow::format_double(p.times[i]) << ","
            << coalflow::format_double(p.values[i]) << "\n";
      }
      ++idx;
    }
    run.write("paths.csv", csv.str());
  }
  return 0;
}

int cmd_path_convergence(Run& run) {
  coalflow::CoefficientField f = run.field();
  std::vector<double> ladder = run.h_ladder();
  double s = run.config.value("s", 0.0);
  double x = run.config.value("x", 0.5);
  double t_eval = run.config.value("t_eval", 1.0);
  long long seeds = run.config.value("seeds", 10000LL);
  double dt_ref = run.config.value("dt_ref", 1e-3);
  double threshold = run.config.value("ks_threshold", 0.03);
  bool collapse_only = run.config.value("collapse_only", false);
  coalflow::ConvergenceReport rep = coalflow::single_path_convergence_test(
      f, ladder, {s, x}, t_eval, seeds, run.seed, dt_ref, run.jobs,
      collapse_only);
  std::ostringstream csv;
  csv << "h,ks,p_value,seeds\n";
  for (const auto& r : rep.rungs) {
    csv << coalflow::format_double(r.h) << "," << coalflow::format_double(r.ks)
        << "," << coalflow::format_double(r.p_value) << "," << r.seeds << "\n";
  }
  run.write("convergence.csv", csv.str());
  bool ok = rep.final_ks < threshold && (ladder.size() < 2 || rep.decreasing);
  if (!ok) {
    std::cerr << "path-convergence failed: final ks=" << rep.final_ks
              << " threshold=" << threshold
              << (rep.decreasing ? "" : " (ladder not decreasing)") << "\n";
    return 2;
  }
  std::cout << "path-convergence ok: final ks=" << rep.final_ks << "\n";
  return 0;
}

int cmd_reverse_check(Run& run) {
  coalflow::CoefficientField f = run.field();
  double h = run.h();
  double span = run.config.value("span", 1.0);
  long long seeds = run.config.value("seeds", 2000LL);
  coalflow::ReversalOptions opts;
  if (run.config.contains("bins")) {
    opts.n_t_bins = run.config["bins"][0].get<int>();
    opts.n_x_bins = run.config["bins"][1].get<int>();
  }
  opts.start_grid = run.config.value("start_grid", 48);
  opts.delta = run.config.value("delta", 0.0);
  opts.collapse_only = run.config.value("collapse_only", false);
  opts.seed = run.seed;
  opts.jobs = run.jobs;
  coalflow::DriftTable table =
      coalflow::reversal_drift_experiment(f, h, span, seeds, opts);
  run.write("drift_table.csv", table.to_csv());
  if (!table.all_pass) {
    for (const auto& b : table.bins) {
      if (!b.pass) {
        std::cerr << "reverse-check failed in bin (t=" << b.t_center
                  << ", x=" << b.x_center << "): drift " << b.drift_rate
                  << " vs " << b.drift_target << ", variance " << b.var_rate
                  << " vs " << b.var_target << "\n";
      }
    }
    return 2;
  }
  std::cout << "reverse-check ok: " << table.bins.size() << " bins pass\n";
  return 0;
}

int cmd_metric(Run& run) {
  std::string kind = run.config.value("metric", "c");
  json out;
  if (kind == "map") {
    coalflow::CircleMap a = coalflow::map_from_json(
        json::parse(coalflow::read_text_file(run.config.at("map_a"))));
    coalflow::CircleMap b = coalflow::map_from_json(
        json::parse(coalflow::read_text_file(run.config.at("map_b"))));
    out["value"] = coalflow::d_map(a, b);
  } else {
    coalflow::DiscreteFlow a = coalflow::flow_from_json(
        json::parse(coalflow::read_text_file(run.config.at("flow_a"))));
    coalflow::DiscreteFlow b = coalflow::flow_from_json(
        json::parse(coalflow::read_text_file(run.config.at("flow_b"))));
    int n = run.config.value("n", 1);
    if (kind == "d_upper") {
      out["value"] = coalflow::flow_distance_d_upper(a, b, n);
    } else {
      out["value"] = coalflow::flow_distance_c(a, b, n,
                                               run.config.value("grid", 16));
    }
  }
  out["metric"] = kind;
  run.write("metric.json", out.dump(2) + "\n");
  std::cout << kind << " distance: " << out["value"].get<double>() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coalescing diffusive flows and disturbance-flow experiments"};
  app.set_version_flag("--version", std::string("coalflow ") +
                                        coalflow::kVersion);
  std::string command;
  app.add_option("command", command,
                 "validate-coeffs | sample-map | moments | simulate-sde | "
                 "simulate-disturbance | path-convergence | reverse-check | "
                 "metric")
      ->required();
  std::string config_path;
  app.add_option("--config", config_path, "JSON experiment config")
      ->required();
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "override the config seed");
  std::optional<double> h_flag;
  app.add_option("--h", h_flag, "override a scalar h");
  int jobs = coalflow::default_jobs();
  app.add_option("--jobs", jobs, "worker threads");
  std::string out_dir = ".";
  app.add_option("--out", out_dir, "output directory");
  CLI11_PARSE(app, argc, argv);

  Run run;
  try {
    run.config = json::parse(coalflow::read_text_file(config_path));
    run.out_dir = out_dir;
    fs::create_directories(run.out_dir);
    run.seed = seed_flag ? *seed_flag : run.config.value("seed", 1ULL);
    run.h_override = h_flag;
    run.jobs = jobs;

    int rc;
    if (command == "validate-coeffs") {
      rc = cmd_validate_coeffs(run);
    } else if (command == "sample-map") {
      rc = cmd_sample_map(run);
    } else if (command == "moments") {
      rc = cmd_moments(run);
    } else if (command == "simulate-sde") {
      rc = cmd_simulate_sde(run);
    } else if (command == "simulate-disturbance") {
      rc = cmd_simulate_disturbance(run);
    } else if (command == "path-convergence") {
      rc = cmd_path_convergence(run);
    } else if (command == "reverse-check") {
      rc = cmd_reverse_check(run);
    } else if (command == "metric") {
      rc = cmd_metric(run);
    } else {
      std::cerr << "unknown command: " << command << "\n";
      return 1;
    }
    run.write_manifest(command);
    return rc;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
