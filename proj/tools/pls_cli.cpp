// Copyright 2026 The PLS Bandits Authors.
//
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

// Command-line driver: run, plot, audit, schedule.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pls/experiment.hpp"
#include "pls/sim.hpp"
#include "pls/svg.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string utc_timestamp(const char* format) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, format);
  return os.str();
}

struct ConfigFlags {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> parallelism;
  std::vector<std::string> overrides;
};

pls::ExperimentConfig load_config(const ConfigFlags& flags) {
  pls::Json j;
  try {
    j = pls::Json::parse(read_file(flags.config_path));
  } catch (const pls::Json::parse_error& e) {
    throw pls::ConfigError(flags.config_path, std::string("parse error: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw pls::ConfigError(flags.config_path, e.what());
  }
  for (const auto& o : flags.overrides) pls::apply_override(j, o);
  if (flags.seed) j["seed"] = *flags.seed;
  if (flags.parallelism) j["parallelism"] = *flags.parallelism;
  if (!flags.out.empty()) j["output"]["dir"] = flags.out;
  return pls::experiment_from_json(j);
}

fs::path make_run_dir(const std::string& root) {
  const fs::path base = fs::path(root) / ("run-" + utc_timestamp("%Y%m%dT%H%M%SZ"));
  fs::path dir = base;
  for (int n = 1; fs::exists(dir); ++n) dir = base.string() + "-" + std::to_string(n);
  fs::create_directories(dir);
  return dir;
}

int write_plots(const fs::path& dir) {
  const fs::path csv = dir / "curves.csv";
  if (!fs::exists(csv)) {
    std::cerr << "error: " << csv.string() << " not found\n";
    return kExitFailure;
  }
  const auto files = pls::plot_curves(read_file(csv));
  if (files.empty()) std::cerr << "warning: curves.csv has no data rows; no plots written\n";
  for (const auto& f : files) {
    write_file(dir / f.name, f.content);
    std::cout << (dir / f.name).string() << "\n";
  }
  return kExitOk;
}

int cmd_run(const ConfigFlags& flags) {
  const pls::ExperimentConfig cfg = load_config(flags);
  const auto cells = pls::expand_sweep(cfg);
  for (const auto& cell : cells) cell.policy.validate();

  pls::RunOptions opt;
  opt.capacity_bits = cfg.capacity_bits;
  std::vector<pls::ReplicationResult> results;
  for (const auto& cell : cells) {
    std::cerr << "running " << cell.label() << " x " << cfg.n_reps << "\n";
    results.push_back(pls::replicate(cell.policy, cell.instance, cell.algorithm, cfg.n_reps, cfg.parallelism,
                                     pls::derive_seed(cfg.seed, pls::StreamTag::kReplication, {results.size()}),
                                     opt));
  }

  const fs::path dir = make_run_dir(cfg.out_dir);
  write_file(dir / "config.json", pls::to_json(cfg).dump(2) + "\n");

  std::ostringstream schedule;
  std::set<std::string> dumped;
  for (const auto& cell : cells) {
    pls::PolicyConfig p = cell.policy;
    if (cell.algorithm == pls::Algorithm::kIndependentAgents) p.M = 1;
    const pls::EpochSchedule sched(p);
    const std::string text = sched.dump();
    if (dumped.insert(text).second) schedule << "## " << cell.label() << "\n" << text << "\n";
  }
  write_file(dir / "schedule.txt", schedule.str());

  pls::Json doc;
  doc["schema_version"] = pls::kResultsSchemaVersion;
  doc["timestamp"] = utc_timestamp("%Y-%m-%dT%H:%M:%SZ");
  doc["code_version"] = pls::kCodeVersion;
  doc["config"] = pls::to_json(cfg);
  pls::Json cells_json = pls::Json::array();
  std::ostringstream csv;
  csv << pls::kCsvHeader << "\n";
  std::size_t n_records = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    pls::Json cj;
    cj["label"] = cells[c].label();
    cj["algorithm"] = std::string(pls::to_string(cells[c].algorithm));
    cj["summary"] = pls::to_json(results[c].summary);
    pls::Json runs = pls::Json::array();
    for (std::size_t r = 0; r < results[c].runs.size(); ++r) {
      const std::string id = pls::run_id(cells[c], r);
      pls::Json rj = pls::to_json(results[c].runs[r]);
      rj["run_id"] = id;
      runs.push_back(std::move(rj));
      csv << pls::csv_rows(id, results[c].runs[r]);
      ++n_records;
    }
    cj["runs"] = std::move(runs);
    cells_json.push_back(std::move(cj));
  }
  doc["cells"] = std::move(cells_json);
  write_file(dir / "results.json", doc.dump(2) + "\n");
  write_file(dir / "curves.csv", csv.str());
  if (cfg.plots) write_plots(dir);
  std::cout << dir.string() << "\n";
  std::cerr << n_records << " run records written\n";
  return kExitOk;
}

int cmd_schedule(const ConfigFlags& flags) {
  const pls::ExperimentConfig cfg = load_config(flags);
  std::ostringstream os;
  for (const auto& cell : pls::expand_sweep(cfg)) {
    pls::PolicyConfig p = cell.policy;
    if (cell.algorithm == pls::Algorithm::kIndependentAgents) p.M = 1;
    p.validate();
    os << "## " << cell.label() << "\n" << pls::EpochSchedule(p).dump() << "\n";
  }
  if (flags.out.empty()) {
    std::cout << os.str();
  } else {
    write_file(flags.out, os.str());
  }
  return kExitOk;
}

// Only the fields the audit reads.
pls::RunRecord audit_record(const pls::Json& j) {
  pls::RunRecord r;
  const auto alg = pls::algorithm_from_string(j.at("algorithm").get<std::string>());
  if (!alg) throw std::runtime_error("results.json: unknown algorithm");
  r.algorithm = *alg;
  const auto& c = j.at("config");
  r.config.d = c.at("d").get<std::size_t>();
  r.config.M = c.at("M").get<std::size_t>();
  r.config.T = c.at("T").get<std::int64_t>();
  r.config.sigma = c.at("sigma").get<double>();
  r.config.delta = c.at("delta").get<double>();
  r.K = j.at("K").get<int>();
  r.uplink_bits = j.at("c_u_bits").is_null() ? 0 : j.at("c_u_bits").get<std::int64_t>();
  pls::Checkpoint last;
  last.t = r.config.T;
  last.regret = j.at("regret").get<double>();
  r.checkpoints.push_back(last);
  return r;
}

int cmd_audit(const std::vector<std::string>& dirs, const std::string& axis_flag, const std::string& out) {
  std::vector<pls::RunRecord> records;
  for (const auto& d : dirs) {
    const pls::Json doc = pls::Json::parse(read_file(fs::path(d) / "results.json"));
    for (const auto& cell : doc.at("cells"))
      for (const auto& run : cell.at("runs")) records.push_back(audit_record(run));
  }
  if (records.size() < 3) {
    std::cerr << "error: audit needs at least 3 runs\n";
    return kExitConfig;
  }
  std::set<std::string> algs;
  std::set<std::size_t> ds, Ms;
  std::set<std::int64_t> Ts;
  std::set<double> sigmas, deltas;
  for (const auto& r : records) {
    algs.insert(std::string(pls::to_string(r.algorithm)));
    ds.insert(r.config.d);
    Ms.insert(r.config.M);
    Ts.insert(r.config.T);
    sigmas.insert(r.config.sigma);
    deltas.insert(r.config.delta);
  }
  std::string axis = axis_flag;
  if (axis.empty()) axis = Ts.size() > 1 ? "T" : "M";
  if (algs.size() > 1 || ds.size() > 1 || sigmas.size() > 1 || deltas.size() > 1 ||
      (axis == "T" && Ms.size() > 1) || (axis == "M" && Ts.size() > 1)) {
    std::cerr << "error: incomparable runs (algorithm, d, sigma, delta and the unswept variable must agree)\n";
    return kExitConfig;
  }
  const pls::AuditReport report = pls::scaling_audit(records, axis);
  std::cout << report.text();
  pls::Json j;
  j["axis"] = axis;
  j["passed"] = report.passed();
  pls::Json lines = pls::Json::array();
  for (const auto& l : report.lines) {
    pls::Json lj = {{"metric", l.metric}, {"axis", l.axis}, {"slope", l.fit.slope}, {"ci_low", l.fit.ci_low},
                    {"ci_high", l.fit.ci_high}, {"r_squared", l.fit.r_squared}, {"passed", l.passed}};
    if (l.band) lj["band"] = {l.band->first, l.band->second};
    lines.push_back(lj);
  }
  j["lines"] = lines;
  if (!out.empty()) write_file(out, j.dump(2) + "\n");
  return report.passed() ? kExitOk : kExitFailure;
}

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config (JSON)")->required();
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--seed", flags.seed, "root seed");
  cmd->add_option("--parallelism", flags.parallelism, "worker threads");
  cmd->add_option("--override", flags.overrides, "KEY=VALUE with a dotted key, e.g. policy.delta=0.1");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed linear bandits with quantized communication"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  auto* run = app.add_subcommand("run", "run every sweep cell and write a results directory");
  add_config_flags(run, run_flags);

  ConfigFlags sched_flags;
  auto* schedule = app.add_subcommand("schedule", "print the epoch parameter table");
  add_config_flags(schedule, sched_flags);

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "render SVG charts from a run directory");
  plot->add_option("dir", plot_dir, "run directory")->required();

  std::vector<std::string> audit_dirs;
  std::string audit_axis, audit_out;
  auto* audit = app.add_subcommand("audit", "fit scaling slopes across run directories");
  audit->add_option("dirs", audit_dirs, "run directories")->required();
  audit->add_option("--axis", audit_axis, "swept variable")->check(CLI::IsMember({"T", "M"}));
  audit->add_option("--out", audit_out, "write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*schedule) return cmd_schedule(sched_flags);
    if (*plot) return write_plots(plot_dir);
    if (*audit) return cmd_audit(audit_dirs, audit_axis, audit_out);
  } catch (const pls::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const pls::PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const pls::ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitProtocol;
  } catch (const pls::DecodeError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitProtocol;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
