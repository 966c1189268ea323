#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "multidirsbm/cem.hpp"
#include "multidirsbm/evaluation.hpp"
#include "multidirsbm/generator.hpp"
#include "multidirsbm/interpretation.hpp"
#include "multidirsbm/io.hpp"
#include "multidirsbm/selection.hpp"

#ifndef MULTIDIRSBM_VERSION
#define MULTIDIRSBM_VERSION "unknown"
#endif

namespace mdsbm::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Options shared by fit and select.
struct EngineOptions {
  int restarts = 5;
  double tol = 1e-4;
  int max_iter = 200;
  std::uint64_t seed = 1;
  bool binary_only = false;
  int threads = 1;
  std::string empty_clusters = "forbid";

  void attach(CLI::App* sub) {
    sub->add_option("--restarts", restarts, "Random restarts")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "Relative log-likelihood tolerance")->capture_default_str();
    sub->add_option("--max-iter", max_iter, "Maximum CEM iterations per restart")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Random seed")->capture_default_str();
    sub->add_flag("--binary-only", binary_only, "Ignore edge weights (Bernoulli SBM)");
    sub->add_option("--threads", threads, "Threads for restarts")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--empty-clusters", empty_clusters, "forbid | reseed")
        ->capture_default_str()
        ->check(CLI::IsMember({"forbid", "reseed"}));
  }

  FitConfig config(int k) const {
    FitConfig c;
    c.K = k;
    c.restarts = restarts;
    c.tol = tol;
    c.max_iter = max_iter;
    c.seed = seed;
    c.threads = threads;
    c.kind = binary_only ? ModelKind::BinaryOnly : ModelKind::Full;
    c.empty_cluster_policy = empty_clusters == "reseed" ? EmptyClusterPolicy::Reseed : EmptyClusterPolicy::Forbid;
    return c;
  }
};

ZeroMode parse_zero_mode(const std::string& text) {
  if (text == "absent") return ZeroMode::absent();
  if (text == "replace") return ZeroMode::replace();
  if (text.rfind("replace=", 0) == 0) {
    std::size_t used = 0;
    const std::string value = text.substr(8);
    double eps = 0.0;
    try {
      eps = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw CLI::ValidationError("--zero-mode", "bad epsilon '" + value + "'");
    return ZeroMode::replace(eps);
  }
  throw CLI::ValidationError("--zero-mode", "expected absent, replace or replace=<epsilon>");
}

std::string file_safe(std::string name) {
  for (char& c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return name;
}

std::vector<std::string> numbered(int count) {
  std::vector<std::string> out;
  for (int k = 1; k <= count; ++k) out.push_back(std::to_string(k));
  return out;
}

// ------------------------------------------------------------------ commands

struct TransformArgs {
  std::string input, output, zero_mode = "absent";
};

int cmd_transform(const TransformArgs& a, std::ostream& out) {
  const ZeroMode mode = parse_zero_mode(a.zero_mode);
  const RawMultiplex raw = io::read_edge_list(fs::path(a.input));
  const CompositionalMultiplex net = to_compositional(raw, mode);
  if (const auto v = validate(net); !v.empty()) throw ValidationError(v.front().message);
  io::write_network(a.output, net);
  fmt::print(out, "wrote {} nodes x {} layers to {}\n", net.num_nodes(), net.num_layers(), a.output);
  return kSuccess;
}

struct SimulateArgs {
  std::string scenario, config, outdir;
  int replicates = 1;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  Scenario base = a.config.empty() ? preset(a.scenario) : scenario_from_json(io::read_text(a.config));
  if (a.seed) base.seed = *a.seed;
  base.validate();
  const fs::path dir(a.outdir);
  fs::create_directories(dir);

  json manifest;
  manifest["schema_version"] = io::kSchemaVersion;
  manifest["tool"] = "multidirsbm";
  manifest["version"] = MULTIDIRSBM_VERSION;
  manifest["command"] = "simulate";
  manifest["scenario"] = base.name;
  manifest["description"] = base.description;
  manifest["n"] = base.n;
  manifest["K"] = base.num_clusters();
  manifest["S"] = base.num_layers();
  manifest["seed"] = base.seed;
  manifest["presets_fnv1a64"] = fmt::format("{:016x}", fnv1a64(presets_document()));
  manifest["true_params"] = "true_params.json";
  io::write_text(dir / "true_params.json", io::params_to_string(base.params));

  json reps = json::array();
  for (int r = 1; r <= a.replicates; ++r) {
    Scenario sc = base;
    sc.seed = derive_seed(base.seed, static_cast<std::uint64_t>(r));
    const GeneratedNetwork g = generate(sc);
    const std::string stem = fmt::format("rep_{:03d}", r);
    io::write_edge_list(dir / (stem + "_raw.csv"), g.raw);
    io::write_network(dir / (stem + "_network.json"), g.network);
    io::write_labels(dir / (stem + "_truth.csv"), g.network.node_ids, g.labels);
    reps.push_back({{"index", r},
                    {"seed", sc.seed},
                    {"raw", stem + "_raw.csv"},
                    {"network", stem + "_network.json"},
                    {"truth", stem + "_truth.csv"}});
  }
  manifest["replicates"] = std::move(reps);
  io::write_text(dir / "manifest.json", manifest.dump(1) + "\n");
  fmt::print(out, "wrote {} replicate(s) of '{}' to {}\n", a.replicates, base.name, dir.string());
  return kSuccess;
}

struct FitArgs {
  std::string network, output;
  int k = 2;
  EngineOptions engine;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const CompositionalMultiplex net = io::read_network(a.network);
  const FitConfig config = a.engine.config(a.k);
  const FitResult r = fit(net, config);
  io::write_fit(a.output, r, net);
  fmt::print(out, "K={} hybrid_ll={:.6f} bic={:.6f} icl={:.6f} iterations={} converged={}\n", a.k, r.hybrid_ll(),
             bic(r, net), icl(r, net), r.iterations, r.converged);
  if (!r.converged) {
    spdlog::warn("best restart stopped at --max-iter {} without converging", config.max_iter);
    return kNotConverged;
  }
  return kSuccess;
}

struct SelectArgs {
  std::string network, output, fit_output, criterion = "bic";
  int kmin = 1, kmax = 7;
  EngineOptions engine;
};

int cmd_select(const SelectArgs& a, std::ostream& out) {
  if (a.kmin > a.kmax) throw CLI::ValidationError("--kmin", "must not exceed --kmax");
  const CompositionalMultiplex net = io::read_network(a.network);
  const SelectionReport report = select_k(net, a.kmin, a.kmax, a.engine.config(a.kmin));
  io::write_text(a.output, io::selection_to_string(report, net, a.criterion));

  fmt::print(out, "{:>3} {:>16} {:>16} {:>16}\n", "K", "hybrid_ll", "BIC", "ICL");
  for (const SelectionRow& row : report.rows) {
    if (row.ok())
      fmt::print(out, "{:>3} {:>16.4f} {:>16.4f} {:>16.4f}{}\n", row.K, row.hybrid_ll, row.bic, row.icl,
                 row.fit->converged ? "" : "  (not converged)");
    else
      fmt::print(out, "{:>3} failed: {}\n", row.K, row.error);
  }
  const int chosen = a.criterion == "icl" ? report.chosen_K_icl : report.chosen_K_bic;
  if (chosen == 0) {
    spdlog::error("no K in [{}, {}] could be fitted", a.kmin, a.kmax);
    return kUsageOrIo;
  }
  fmt::print(out, "chosen K ({}): {}\n", a.criterion, chosen);
  if (!a.fit_output.empty()) {
    const auto& row = *std::find_if(report.rows.begin(), report.rows.end(), [&](const auto& r) { return r.K == chosen; });
    io::write_fit(a.fit_output, *row.fit, net);
  }
  return kSuccess;
}

struct InterpretArgs {
  std::string fit, network, outdir;
};

int cmd_interpret(const InterpretArgs& a, std::ostream& out) {
  const io::FitDocument doc = io::read_fit(a.fit);
  const CompositionalMultiplex net = io::read_network(a.network);
  if (doc.node_ids != net.node_ids) throw ValidationError("fit and network have different node ids");
  if (doc.layer_names != net.layer_names) throw ValidationError("fit and network have different layers");
  const InterpretationSummary s = interpret(net, doc.result.partition.labels, doc.result.params.A);

  const fs::path dir(a.outdir);
  fs::create_directories(dir);
  std::vector<std::string> node_header{"node"};
  node_header.insert(node_header.end(), net.node_ids.begin(), net.node_ids.end());
  const int k = doc.result.params.num_clusters();
  std::vector<std::string> cluster_header{"cluster"};
  for (const auto& c : numbered(k)) cluster_header.push_back(c);
  for (int l = 0; l < net.num_layers(); ++l) {
    const std::string name = file_safe(net.layer_names[l]);
    io::write_matrix_csv(dir / ("W_" + name + ".csv"), s.W[l], node_header, net.node_ids);
    io::write_matrix_csv(dir / ("V_" + name + ".csv"), s.V[l], cluster_header, numbered(k));
  }
  io::write_chord_csv(dir / "chord.csv", chord_table(s, net.layer_names));
  for (const auto& [layer, cluster] : s.silent_clusters)
    fmt::print(out, "cluster {} sends nothing in layer '{}'\n", cluster + 1, net.layer_names[layer]);
  fmt::print(out, "wrote W, V and chord tables for {} layer(s) to {}\n", net.num_layers(), dir.string());
  return kSuccess;
}

struct EvalArgs {
  std::string fit, truth, true_params, output;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const io::FitDocument doc = io::read_fit(a.fit);
  const Labels truth = io::read_labels(a.truth, doc.node_ids);
  json m;
  m["schema_version"] = io::kSchemaVersion;
  m["ari"] = ari(truth, doc.result.partition.labels);
  if (!a.true_params.empty()) {
    const Alignment al = aligned_frobenius(io::read_params(a.true_params), doc.result.params);
    m["frobenius_P"] = al.frobenius_P;
    m["frobenius_A"] = al.frobenius_A;
    std::vector<int> perm;
    for (int p : al.permutation) perm.push_back(p + 1);
    m["permutation"] = perm;
  }
  const std::string text = m.dump(1) + "\n";
  const fs::path target = a.output.empty() ? fs::path(a.fit).replace_extension(".metrics.json") : fs::path(a.output);
  io::write_text(target, text);
  out << text;
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiplex Dirichlet stochastic block model for compositional networks", "multidirsbm"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", MULTIDIRSBM_VERSION);
  app.set_config("--defaults", "", "INI/TOML file with option defaults ([fit], [select], ... sections)");
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
      ->capture_default_str()
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  TransformArgs transform;
  auto* t = app.add_subcommand("transform", "Edge list -> compositional multiplex");
  t->add_option("--input", transform.input, "Edge list CSV (layer,source,target,weight)")->required();
  t->add_option("--zero-mode", transform.zero_mode, "absent | replace[=epsilon]")->capture_default_str();
  t->add_option("--output", transform.output, "Network JSON")->required();

  SimulateArgs simulate;
  std::uint64_t sim_seed = 1;
  auto* sim = app.add_subcommand("simulate", "Sample synthetic networks");
  auto* scen = sim->add_option("--scenario", simulate.scenario, "Preset name");
  auto* conf = sim->add_option("--config", simulate.config, "Scenario JSON {n, K, S, theta, P, A}");
  scen->excludes(conf);
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "Base seed");
  sim->add_option("--replicates", simulate.replicates, "Replicates")->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--outdir", simulate.outdir, "Output directory")->required();

  FitArgs fit_args;
  auto* f = app.add_subcommand("fit", "Fit multi-DirSBM for one K");
  f->add_option("--network", fit_args.network, "Network JSON")->required();
  f->add_option("--k", fit_args.k, "Number of clusters")->required()->check(CLI::PositiveNumber);
  f->add_option("--output", fit_args.output, "Fit JSON")->required();
  fit_args.engine.attach(f);

  SelectArgs select;
  auto* sel = app.add_subcommand("select", "Fit a range of K and compare BIC/ICL");
  sel->add_option("--network", select.network, "Network JSON")->required();
  sel->add_option("--kmin", select.kmin, "Smallest K")->capture_default_str()->check(CLI::PositiveNumber);
  sel->add_option("--kmax", select.kmax, "Largest K")->capture_default_str()->check(CLI::PositiveNumber);
  sel->add_option("--criterion", select.criterion, "bic | icl")
      ->capture_default_str()
      ->check(CLI::IsMember({"bic", "icl"}));
  sel->add_option("--output", select.output, "Selection report JSON")->required();
  sel->add_option("--fit-output", select.fit_output, "Also write the chosen fit here");
  select.engine.attach(sel);

  InterpretArgs interp;
  auto* in = app.add_subcommand("interpret", "Expected share matrices W and V");
  in->add_option("--fit", interp.fit, "Fit JSON")->required();
  in->add_option("--network", interp.network, "Network JSON")->required();
  in->add_option("--outdir", interp.outdir, "Output directory")->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "ARI and aligned parameter errors against truth");
  e->add_option("--fit", ev.fit, "Fit JSON")->required();
  e->add_option("--truth", ev.truth, "Truth labels CSV (node,cluster)")->required();
  e->add_option("--true-params", ev.true_params, "True parameter JSON");
  e->add_option("--output", ev.output, "Metrics JSON (default: <fit>.metrics.json)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (sim->parsed() && simulate.scenario.empty() && simulate.config.empty())
      throw CLI::RequiredError("--scenario or --config");
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kSuccess : kUsageOrIo;
  }

  // diagnostics go to stderr so that stdout carries only command output
  spdlog::set_default_logger(
      std::make_shared<spdlog::logger>("multidirsbm", std::make_shared<spdlog::sinks::stderr_color_sink_mt>()));
  spdlog::set_level(spdlog::level::from_str(log_level));
  try {
    if (t->parsed()) return cmd_transform(transform, out);
    if (sim->parsed()) {
      if (sim_seed_opt->count() > 0) simulate.seed = sim_seed;
      return cmd_simulate(simulate, out);
    }
    if (f->parsed()) return cmd_fit(fit_args, out);
    if (sel->parsed()) return cmd_select(select, out);
    if (in->parsed()) return cmd_interpret(interp, out);
    if (e->parsed()) return cmd_eval(ev, out);
  } catch (const CLI::ValidationError& ex) {
    fmt::print(err, "error: {}\n", ex.what());
    return kUsageOrIo;
  } catch (const ValidationError& ex) {
    fmt::print(err, "invalid data: {}\n", ex.what());
    return kInvalidData;
  } catch (const std::exception& ex) {
    fmt::print(err, "error: {}\n", ex.what());
    return kUsageOrIo;
  }
  return kUsageOrIo;
}

}  // namespace mdsbm::cli
