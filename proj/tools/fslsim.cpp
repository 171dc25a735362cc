// Copyright 2026 The chiral-fsl Authors
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

// fslsim: command-line runner for the chiral Fock-state-lattice model.
//
// Exit status: 0 success, 1 usage or configuration error, 2 numerical failure
// (flagged integration, exceeded dimension budget, failed self-test).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fsl/acceptance.hpp"
#include "fsl/config.hpp"
#include "fsl/serialization.hpp"

namespace {

using namespace fsl;

constexpr int kUsage = 1;
constexpr int kNumerical = 2;

class Output {
 public:
  explicit Output(const RunConfig& cfg) : cfg_(cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output.directory, ec);
    if (ec) throw ConfigError("cannot create output directory " + cfg.output.directory + ": " + ec.message());
  }

  // Opens `name` in the output directory when `format` is enabled.
  std::optional<std::ofstream> open(const std::string& name, const std::string& format) const {
    if (!cfg_.wants(format)) return std::nullopt;
    auto path = std::filesystem::path(cfg_.output.directory) / name;
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path.string());
    return f;
  }

  void json_file(const std::string& name, const json& j) const {
    if (auto f = open(name, "json")) *f << j.dump(2) << '\n';
  }

 private:
  const RunConfig& cfg_;
};

StateVector initial_state(const RunConfig& cfg, const BasisPtr& basis) {
  const int N = cfg.model.N;
  if (cfg.evolution.initial == "superposition") return fig3_initial_state(basis, N);
  return cfg.evolution.sigma == Level::g ? fock_state(basis, Level::g, N, 0, 0)
                                         : fock_state(basis, Level::e, N - 1, 0, 0);
}

int cmd_evolve(const RunConfig& cfg) {
  const auto p = cfg.params();
  const int N = cfg.model.N;
  if (N < 1) throw ConfigError("model.N must be >= 1");
  auto basis = cfg.evolution.initial == "superposition" ? enumerate_truncated(N) : enumerate_shell(N);
  auto psi0 = initial_state(cfg, basis);
  const double horizon = cfg.evolution.horizon.resolve(p.kappa);
  if (cfg.evolution.samples < 2) throw ConfigError("evolution.samples must be >= 2");
  auto times = linear_grid(horizon, cfg.evolution.samples);

  PureEvolution r;
  const auto& kind = cfg.evolution.hamiltonian;
  if (kind == "chiral") {
    r = evolve_exact(chiral_hamiltonian(p, basis), psi0, times);
  } else if (kind == "homogeneous") {
    r = evolve_exact(homogeneous_lattice_hamiltonian(basis, std::sqrt(double(N)) * std::abs(p.kappa)), psi0, times);
  } else {
    if (p.nu_d <= 0 || p.g_v <= 0) throw ConfigError("modulated evolution needs model.g_v > 0 and model.nu_d > 0");
    TimeDepOptions opt;
    opt.tol = cfg.evolution.tol;
    auto drive = kind == "modulated" ? full_modulated_drive(p, basis) : coupling_modulated_drive(p, basis);
    r = evolve_timedep(drive, psi0, times, opt);
  }

  Output out(cfg);
  auto frames = snapshots(r);
  if (auto f = out.open("snapshots.jsonl", "jsonl")) write_snapshots_jsonl(*f, frames);
  if (auto f = out.open("observables.csv", "csv")) write_observables_csv(*f, r);

  const auto& last = frames.back();
  auto peak = std::max_element(last.sites.begin(), last.sites.end(),
                               [](auto& a, auto& b) { return a.probability < b.probability; });
  json summary{{"hamiltonian", kind},
               {"N", N},
               {"kappa", p.kappa},
               {"horizon", horizon},
               {"samples", cfg.evolution.samples},
               {"final_norm", r.states.back().norm()},
               {"final_ipr", ipr(last)},
               {"peak", {{"site", peak->site}, {"p", peak->probability}}},
               {"diagnostics", r.diagnostics},
               {"flagged", r.flagged},
               {"notes", r.notes}};
  if (kind == "chiral") {
    json arrivals = json::object();
    for (Level s : {Level::g, Level::e}) {
      try {
        auto a = corner_arrival(r, s);
        if (a.cavity >= 0)
          arrivals[std::string(1, level_char(s))] = {{"time", a.time}, {"cavity", a.cavity}, {"p", a.probability}};
      } catch (const std::invalid_argument&) {
        // sublattice empty at t = 0
      }
    }
    summary["corner_arrival"] = arrivals;
  }
  out.json_file("evolve.json", summary);
  std::cout << summary.dump(2) << std::endl;
  return r.flagged ? kNumerical : 0;
}

int cmd_floquet(const RunConfig& cfg) {
  auto p = cfg.params();
  CompareOptions opt;
  opt.tol = cfg.floquet.tol;
  opt.scheme = cfg.floquet.scheme == "coupling" ? ModulationScheme::coupling : ModulationScheme::frequency;
  opt.chirality = cfg.floquet.chirality == "reversed" ? DriveChirality::reversed : DriveChirality::forward;
  if (!cfg.floquet.ratios.empty() && p.g_v <= 0) throw ConfigError("the convergence scan needs model.g_v > 0");
  auto report = floquet_report(p, cfg.floquet.N, cfg.floquet.ratios, opt);
  auto detail = beta_series_detail(p.f);

  Output out(cfg);
  json j = floquet_to_json(report);
  out.json_file("floquet.json", j);
  if (auto f = out.open("floquet.csv", "csv")) write_floquet_csv(*f, report);
  json shown = j;
  shown["beta_terms"] = detail.terms;
  std::cout << shown.dump(2) << std::endl;
  return 0;
}

int cmd_lindblad(const RunConfig& cfg) {
  const auto p = cfg.params();
  Fig3Setup s;
  s.N = cfg.model.N;
  s.transfer_time = p.transfer_time();
  s.dissipation = cfg.dissipation.enabled;
  s.rates = cfg.dissipation_params();
  s.dephasing = cfg.dissipation.dephasing;
  s.horizon = cfg.evolution.horizon.resolve(p.kappa);
  s.samples = cfg.evolution.samples;
  s.tol = cfg.evolution.tol;
  if (s.samples < 2) throw ConfigError("evolution.samples must be >= 2");
  auto run = fig3_pipeline(s);

  Output out(cfg);
  if (auto f = out.open("fig3.csv", "csv")) write_fig3_csv(*f, run.curves);
  auto at_T = fig3_at(run.curves, s.transfer_time);
  json summary{{"N", s.N},
               {"transfer_time_ns", s.transfer_time},
               {"dissipation", s.dissipation},
               {"at_T", {{"p_e090", at_T[0]}, {"p_g0010", at_T[1]}, {"coh", at_T[2]}}},
               {"diagnostics", run.diagnostics},
               {"flagged", run.flagged},
               {"notes", run.notes}};
  out.json_file("lindblad.json", summary);
  std::cout << summary.dump(2) << std::endl;
  return run.flagged ? kNumerical : 0;
}

int cmd_protocol(const RunConfig& cfg) {
  const auto p = cfg.params();
  const auto& pr = cfg.protocol;
  ProtocolResult r;
  if (pr.kind == "noon") {
    r = noon_protocol(cfg.model.N, p, pr.pulses);
  } else if (pr.kind == "ecs") {
    const int n_max = coherent_truncation(pr.alpha * pr.alpha, pr.max_loss);
    const auto dim = static_cast<std::size_t>(n_max + 1) * (n_max + 2) * (2 * n_max + 3) / 6;
    if (dim > pr.budget)
      throw NumericalError("truncated basis dimension " + std::to_string(dim) + " exceeds budget " +
                           std::to_string(pr.budget));
    r = entangled_coherent_protocol(pr.alpha, p, n_max, pr.pulses, pr.max_loss);
  } else if (pr.kind == "ghz") {
    r = ghz_chain(pr.M, cfg.model.N, p, pr.final_rotation, pr.budget);
  } else {
    std::optional<double> t;
    if (pr.time) t = pr.time->resolve(p.kappa);
    r = two_cavity_rotation(cfg.model.N, p, t);
  }
  Output out(cfg);
  json j = protocol_to_json(r, pr.dump_states);
  out.json_file("protocol.json", j);
  std::cout << protocol_to_json(r, false).dump(2) << std::endl;
  return 0;
}

int cmd_flux(const RunConfig& cfg) {
  const auto p = cfg.params();
  auto basis = enumerate_shell(cfg.model.N);
  auto h = chiral_hamiltonian(p, basis);
  std::ostringstream table;
  table << "sigma,triangle,n0,n1,n2,flux\n";
  for (Level s : {Level::g, Level::e})
    for (auto& pl : enumerate_plaquettes(basis, s)) {
      const auto& o = pl.loop[0].occ;
      table << level_char(s) << ',' << (pl.up ? "up" : "down") << ',' << o[0] << ',' << o[1] << ',' << o[2] << ','
            << format_double(plaquette_flux(h, pl)) << '\n';
    }
  Output out(cfg);
  if (auto f = out.open("flux.csv", "csv")) *f << table.str();
  std::cout << table.str();
  return 0;
}

int cmd_selftest(const std::string& filter) {
  return acceptance::run(std::cout, filter) == 0 ? 0 : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chiral Fock-state-lattice simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  app.add_option("-c,--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", sets, "Override a configuration key, section.key=value (repeatable)");
  app.add_option("-o,--out", out_dir, "Output directory");

  // Flag shortcuts; each maps onto a configuration key.
  std::vector<std::pair<std::string, std::string>> flagged;
  auto shortcut = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&flagged, key](const std::string& v) { flagged.emplace_back(key, v); }, help);
  };

  auto* evolve = app.add_subcommand("evolve", "Closed-system evolution; writes snapshots and observables");
  shortcut(evolve, "--N", "model.N", "Photon number");
  shortcut(evolve, "--kappa", "model.kappa", "Chiral coupling (rad/ns)");
  shortcut(evolve, "--sigma", "evolution.sigma", "Initial atom level, g or e");
  shortcut(evolve, "--horizon", "evolution.horizon", "Evolution time with unit, e.g. 1T or 80ns");
  shortcut(evolve, "--samples", "evolution.samples", "Number of output times");
  shortcut(evolve, "--hamiltonian", "evolution.hamiltonian", "chiral, modulated, coupling or homogeneous");
  shortcut(evolve, "--initial", "evolution.initial", "corner or superposition");

  auto* floquet = app.add_subcommand("floquet", "Effective coupling report and convergence scan");
  shortcut(floquet, "--f", "model.f", "Modulation index");
  shortcut(floquet, "--g-v", "model.g_v", "Vacuum Rabi coupling");
  shortcut(floquet, "--nu-d", "model.nu_d", "Modulation frequency for the reported effective coupling");
  shortcut(floquet, "--N", "floquet.N", "Photon number for the comparison");
  shortcut(floquet, "--ratios", "floquet.ratios", "Comma-separated nu_d/g_v values (empty to skip)");
  shortcut(floquet, "--scheme", "floquet.scheme", "frequency or coupling");

  auto* lindblad = app.add_subcommand("lindblad", "Dissipative transfer of the atom-photon superposition");
  shortcut(lindblad, "--N", "model.N", "Photon number");
  shortcut(lindblad, "--transfer-time", "model.transfer_time", "Transfer time, e.g. 80ns");
  shortcut(lindblad, "--dissipation", "dissipation.enabled", "true or false");
  shortcut(lindblad, "--horizon", "evolution.horizon", "Evolution time with unit");
  shortcut(lindblad, "--samples", "evolution.samples", "Number of output times");
  shortcut(lindblad, "--tol", "evolution.tol", "Integrator tolerance");

  auto* protocol = app.add_subcommand("protocol", "State-preparation protocols");
  std::string protocol_kind;
  protocol->add_option("kind", protocol_kind, "noon, ecs, ghz or two_cavity");
  shortcut(protocol, "--N", "model.N", "Photon number");
  shortcut(protocol, "--pulses", "protocol.pulses", "ideal or physical");
  shortcut(protocol, "--alpha", "protocol.alpha", "Coherent amplitude");
  shortcut(protocol, "--M", "protocol.M", "Number of links in the GHZ chain");
  shortcut(protocol, "--g-v", "model.g_v", "Vacuum Rabi coupling (physical pulses)");
  shortcut(protocol, "--time", "protocol.time", "Two-cavity rotation time with unit");
  shortcut(protocol, "--final-rotation", "protocol.final_rotation", "true or false");
  shortcut(protocol, "--budget", "protocol.budget", "Maximum basis dimension");

  auto* flux = app.add_subcommand("flux", "Plaquette flux table");
  shortcut(flux, "--N", "model.N", "Photon number");

  auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");
  std::string filter;
  selftest->add_option("--filter", filter, "Only run criteria whose name contains this text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (selftest->parsed()) return cmd_selftest(filter);

    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path, cfg);
    apply_overrides(cfg, sets);
    for (auto& [key, value] : flagged) cfg.set(key, value);
    if (!out_dir.empty()) cfg.output.directory = out_dir;
    if (!protocol_kind.empty()) cfg.set("protocol.kind", protocol_kind);

    if (evolve->parsed()) return cmd_evolve(cfg);
    if (floquet->parsed()) return cmd_floquet(cfg);
    if (lindblad->parsed()) return cmd_lindblad(cfg);
    if (protocol->parsed()) return cmd_protocol(cfg);
    if (flux->parsed()) return cmd_flux(cfg);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kUsage;
  }
  return kUsage;
}
