#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>

#include "arnn/checkpoint.hpp"
#include "arnn/csv.hpp"
#include "arnn/errors.hpp"
#include "arnn/inference.hpp"
#include "arnn/learning.hpp"
#include "arnn/metrics.hpp"
#include "arnn/mlp.hpp"
#include "arnn/report.hpp"
#include "arnn/synth.hpp"
#include "arnn/traffic.hpp"

namespace arnn::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "0.1.0";

// Everything a run records in its manifest.
struct Run {
  std::string command;
  fs::path out;
  Json parameters = Json::object();
  Json inputs = Json::object();
  Json results = Json::object();
  std::vector<fs::path> outputs;

  fs::path file(const std::string& name) {
    auto p = out / name;
    outputs.push_back(p);
    return p;
  }
};

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

Json digest_of(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return Json{{"bytes", bytes.size()}, {"crc32", hex32(crc32_of(bytes))}};
}

std::string input_path(Run& run, const std::string& key, const std::string& path) {
  if (!fs::is_regular_file(path)) {
    throw IoError("input " + path + " does not exist or is not a file");
  }
  const auto abs = fs::absolute(path).lexically_normal().string();
  auto d = digest_of(abs);
  run.inputs[key] = Json{{"path", abs}, {"bytes", d["bytes"]}, {"crc32", d["crc32"]}};
  run.parameters[key] = abs;
  return abs;
}

void write_manifest(Run& run) {
  std::sort(run.outputs.begin(), run.outputs.end());
  run.outputs.erase(std::unique(run.outputs.begin(), run.outputs.end()), run.outputs.end());
  Json outputs = Json::object();
  for (const auto& p : run.outputs) {
    outputs[fs::relative(p, run.out).generic_string()] = digest_of(p);
  }
  Json m;
  m["tool"] = "arnn";
  m["version"] = kToolVersion;
  m["command"] = run.command;
  m["parameters"] = run.parameters;
  m["inputs"] = run.inputs;
  m["outputs"] = outputs;
  m["results"] = run.results;
  std::ofstream f(run.out / "manifest.json", std::ios::trunc);
  f << m.dump(2) << '\n';
  if (!f) {
    throw IoError("cannot write manifest in " + run.out.string());
  }
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json aggregate_json(const AggregateMetrics& a) {
  return Json{{"median_accuracy", a.accuracy_box.median},
              {"q1_accuracy", a.accuracy_box.q1},
              {"macro_accuracy", a.macro_accuracy},
              {"macro_tnr", opt_json(a.macro_tnr)},
              {"macro_tpr", opt_json(a.macro_tpr)},
              {"macro_f1", opt_json(a.macro_f1)},
              {"median_tnr", a.tnr_box ? Json(a.tnr_box->median) : Json(nullptr)},
              {"median_tpr", a.tpr_box ? Json(a.tpr_box->median) : Json(nullptr)},
              {"pooled_accuracy", a.pooled_accuracy},
              {"pooled_f1", opt_json(a.pooled_f1)}};
}

std::string pct(const std::optional<double>& v) {
  if (!v) {
    return "n/a";
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * *v);
  return buf;
}

void print_summary(std::ostream& out, const std::string& model, const AggregateMetrics& a) {
  out << model << ": median accuracy " << pct(a.accuracy_box.median) << ", q1 " << pct(a.accuracy_box.q1)
      << ", macro TNR " << pct(a.macro_tnr) << ", macro TPR " << pct(a.macro_tpr) << ", pooled F1 "
      << pct(a.pooled_f1) << '\n';
}

// Doubles go through from_chars so that a value written to a manifest reads
// back bit for bit.
CLI::Option* add_real(CLI::App* app, const std::string& name, double& target, const std::string& desc) {
  return app
      ->add_option_function<std::string>(
          name,
          [&target, name](const std::string& s) {
            const auto v = csv::to_double(s);
            if (!v) {
              throw CLI::ValidationError(name, "'" + s + "' is not a finite number");
            }
            target = *v;
          },
          desc)
      ->default_str(csv::format(target));
}

CLI::Option* add_reals(CLI::App* app, const std::string& name, std::vector<double>& target,
                       const std::string& desc) {
  std::string shown;
  for (double g : target) {
    shown += (shown.empty() ? "" : ",") + csv::format(g);
  }
  return app
      ->add_option_function<std::vector<std::string>>(
          name,
          [&target, name](const std::vector<std::string>& items) {
            target.clear();
            for (const auto& s : items) {
              const auto v = csv::to_double(s);
              if (!v) {
                throw CLI::ValidationError(name, "'" + s + "' is not a finite number");
              }
              target.push_back(*v);
            }
          },
          desc)
      ->delimiter(',')
      ->default_str(shown);
}

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw InvalidParameterError(what);
  }
}

void check_theta(double theta) { require(theta >= 0.0 && theta <= 1.0, "--theta must lie in [0, 1]"); }
void check_gamma(double gamma) { require(gamma > 0.0, "--gamma must be positive"); }
void check_rate(double w) { require(w > 0.0, "--W must be positive"); }
void check_eta(double eta, const char* flag) { require(eta > 0.0, std::string(flag) + " must be positive"); }
void check_epochs(int epochs, const char* flag) { require(epochs >= 1, std::string(flag) + " must be at least 1"); }

FeatureTable load_features(const std::string& path, double theta) {
  auto table = read_features(fs::path(path));
  table.slots = ground_truth(std::move(table.slots), theta);
  return table;
}

BinaryMatrix truth_matrix(const std::vector<SlotFeatures>& slots, std::size_t n) {
  BinaryMatrix g(static_cast<Eigen::Index>(slots.size()), static_cast<Eigen::Index>(n));
  for (std::size_t l = 0; l < slots.size(); ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      g(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) = slots[l].ground_truth[i];
    }
  }
  return g;
}

DecisionTable empty_table(const std::vector<SlotFeatures>& slots, const NodeRegistry& registry,
                          const std::string& score_name) {
  DecisionTable t;
  t.score_name = score_name;
  t.registry = registry;
  for (const auto& s : slots) {
    t.slots.push_back(s.slot);
  }
  const auto rows = static_cast<Eigen::Index>(slots.size());
  const auto cols = static_cast<Eigen::Index>(registry.size());
  t.score = Matrix::Zero(rows, cols);
  t.decision = BinaryMatrix::Zero(rows, cols);
  t.truth = truth_matrix(slots, registry.size());
  return t;
}

DecisionTable arnn_table(const ArnnModel& model, const std::vector<SlotFeatures>& slots,
                         const NodeRegistry& registry, double gamma) {
  auto t = empty_table(slots, registry, "L");
  for (std::size_t l = 0; l < slots.size(); ++l) {
    const auto states = solve_fixed_point(model, ExternalInputs::from_attack_ratio(slots[l].attack_ratio));
    const auto d = classify(states, gamma);
    const auto row = static_cast<Eigen::Index>(l);
    t.score.row(row) = d.ratio.transpose();
    for (std::size_t i = 0; i < d.compromised.size(); ++i) {
      t.decision(row, static_cast<Eigen::Index>(i)) = d.compromised[i];
    }
  }
  return t;
}

DecisionTable mlp_table(const MlpModel& model, const std::vector<SlotFeatures>& slots,
                        const NodeRegistry& registry, double theta) {
  auto t = empty_table(slots, registry, "K_hat");
  for (std::size_t l = 0; l < slots.size(); ++l) {
    const auto pred = mlp_forward(model, slots[l].attack_ratio);
    const auto z = mlp_decide(pred, theta);
    const auto row = static_cast<Eigen::Index>(l);
    t.score.row(row) = pred.transpose();
    for (std::size_t i = 0; i < z.size(); ++i) {
      t.decision(row, static_cast<Eigen::Index>(i)) = z[i];
    }
  }
  return t;
}

TrainWindow window_with_tests(const std::vector<SlotFeatures>& slots, int half_width) {
  auto w = select_train_window(slots, half_width);
  if (w.test.empty()) {
    throw WindowError("every slot falls inside the training window; nothing is left to test on");
  }
  return w;
}

Json window_json(const TrainWindow& w) {
  return Json{{"first_compromised_slot", w.first_compromised_slot},
              {"train_first_slot", w.train.front().slot},
              {"train_last_slot", w.train.back().slot},
              {"train_slots", w.train.size()},
              {"test_slots", w.test.size()}};
}

void add_report(Run& run, const NodeRegistry& registry, const std::vector<EvaluationSet>& sets) {
  for (const auto& p : emit_report(run.out / "report", registry, sets)) {
    run.outputs.push_back(p);
  }
}

// ---------------------------------------------------------------- commands

struct IngestArgs {
  std::string packets;
  double tau = 10.0;
  double theta = 0.3;
};

void cmd_ingest(Run& run, const IngestArgs& a, std::ostream& out) {
  require(a.tau > 0.0, "--tau must be positive");
  check_theta(a.theta);
  const auto path = input_path(run, "packets", a.packets);
  run.parameters["tau"] = a.tau;
  run.parameters["theta"] = a.theta;

  auto trace = parse_packets(fs::path(path));
  if (trace.records.empty()) {
    throw ShapeError("packet file " + path + " holds no packets");
  }
  const auto buckets = bucketize(trace.records, a.tau);
  FeatureTable table{ground_truth(compute_ratios(buckets, trace.registry.size()), a.theta), trace.registry};
  write_features(run.file("features.csv"), table);
  write_registry(run.file("registry.csv"), table.registry);

  std::optional<long> first;
  for (const auto& s : table.slots) {
    if (std::any_of(s.ground_truth.begin(), s.ground_truth.end(), [](auto g) { return g != 0; })) {
      first = s.slot;
      break;
    }
  }
  run.results["packets"] = trace.records.size();
  run.results["nodes"] = table.registry.size();
  run.results["slots"] = table.slots.size();
  run.results["first_compromised_slot"] = first ? Json(*first) : Json(nullptr);
  out << "ingested " << trace.records.size() << " packets, " << table.registry.size() << " nodes, "
      << table.slots.size() << " slots";
  if (first) {
    out << ", first compromised slot " << *first;
  }
  out << '\n';
}

struct SynthArgs {
  SynthConfig cfg;
};

void cmd_synth(Run& run, const SynthArgs& a, std::ostream& out) {
  const auto& c = a.cfg;
  run.parameters["nodes"] = c.nodes;
  run.parameters["slots"] = c.slots;
  run.parameters["slot-seconds"] = c.slot_seconds;
  run.parameters["seed"] = c.seed;
  run.parameters["infected"] = c.initially_compromised;
  run.parameters["attack-start"] = c.attack_start_slot;
  run.parameters["rate"] = c.packets_per_slot;
  run.parameters["bot-multiplier"] = c.bot_rate_multiplier;
  run.parameters["infection-threshold"] = c.infection_threshold;
  run.parameters["attack-fraction"] = c.attack_fraction;

  const auto trace = synthesize_botnet_trace(c);
  write_packets(run.file("packets.csv"), trace.trace);
  write_schedule(run.file("schedule.csv"), trace);
  const auto compromised = std::count_if(trace.compromised_at.begin(), trace.compromised_at.end(),
                                         [](long s) { return s >= 0; });
  run.results["packets"] = trace.trace.records.size();
  run.results["compromised_nodes"] = compromised;
  run.results["compromised_at"] = trace.compromised_at;
  out << "synthesised " << trace.trace.records.size() << " packets; " << compromised << " of " << c.nodes
      << " nodes compromised by the end\n";
}

struct OfflineArgs {
  std::string features;
  double theta = 0.3;
  double gamma = 0.98;
  double total_rate = 1.0;
  double eta = 0.1;
  int epochs = 20;
  int half_width = 12;
};

void cmd_train_offline(Run& run, const OfflineArgs& a, std::ostream& out) {
  check_theta(a.theta);
  check_gamma(a.gamma);
  check_rate(a.total_rate);
  check_eta(a.eta, "--eta");
  check_epochs(a.epochs, "--epochs");
  require(a.half_width >= 0, "--half-width must be non-negative");
  const auto path = input_path(run, "features", a.features);
  run.parameters["theta"] = a.theta;
  run.parameters["gamma"] = a.gamma;
  run.parameters["W"] = a.total_rate;
  run.parameters["eta"] = a.eta;
  run.parameters["epochs"] = a.epochs;
  run.parameters["half-width"] = a.half_width;

  const auto table = load_features(path, a.theta);
  const auto w = window_with_tests(table.slots, a.half_width);
  TrainConfig cfg;
  cfg.eta = a.eta;
  cfg.epochs = a.epochs;
  cfg.gamma = a.gamma;
  const auto trained =
      train_offline(ArnnModel::neutral(table.registry.size(), a.total_rate), to_training_samples(w.train), cfg);
  save_checkpoint(run.file("model.ckpt"), trained.model);
  write_cost_trace(run.file("cost_trace.csv"), trained.trace);

  const auto decisions = arnn_table(trained.model, w.test, table.registry, a.gamma);
  write_decisions(run.file("decisions.csv"), decisions);
  const auto eval = evaluate("ARNN", decisions);
  add_report(run, table.registry, {eval});

  run.results["window"] = window_json(w);
  run.results["final_cost"] = trained.trace.back().cost;
  run.results["skipped_samples"] = trained.trace.back().skipped;
  run.results["ARNN"] = aggregate_json(eval.aggregate);
  out << "l* = " << w.first_compromised_slot << ", trained on slots " << w.train.front().slot << ".."
      << w.train.back().slot << ", tested on " << w.test.size() << " slots; final cost "
      << csv::format(trained.trace.back().cost) << '\n';
  print_summary(out, "ARNN", eval.aggregate);
}

struct OnlineArgs {
  std::string features;
  double theta = 0.3;
  double gamma = 0.98;
  double total_rate = 1.0;
  double eta = 0.1;
  int epochs = 3;
  int window = 6;
};

void cmd_train_online(Run& run, const OnlineArgs& a, std::ostream& out) {
  check_theta(a.theta);
  check_gamma(a.gamma);
  check_rate(a.total_rate);
  check_eta(a.eta, "--eta");
  check_epochs(a.epochs, "--epochs");
  require(a.window >= 1, "--window must be at least 1");
  const auto path = input_path(run, "features", a.features);
  run.parameters["theta"] = a.theta;
  run.parameters["gamma"] = a.gamma;
  run.parameters["W"] = a.total_rate;
  run.parameters["eta"] = a.eta;
  run.parameters["epochs"] = a.epochs;
  run.parameters["window"] = a.window;

  const auto table = load_features(path, a.theta);
  OnlineConfig cfg;
  cfg.window = static_cast<std::size_t>(a.window);
  cfg.epochs = a.epochs;
  cfg.eta = a.eta;
  cfg.gamma = a.gamma;

  std::ofstream events(run.file("events.csv"), std::ios::trunc);
  events << "slot,event\n";
  const auto result = train_online(ArnnModel::neutral(table.registry.size(), a.total_rate),
                                   to_training_samples(table.slots), cfg,
                                   [&events](long slot, bool trained, const ArnnModel&) {
                                     events << slot << ',' << (trained ? "train" : "predict") << '\n';
                                   });
  events.close();

  auto decisions = empty_table(table.slots, table.registry, "L");
  for (std::size_t l = 0; l < result.decisions.size(); ++l) {
    const auto& d = result.decisions[l].decision;
    const auto row = static_cast<Eigen::Index>(l);
    decisions.score.row(row) = d.ratio.transpose();
    for (std::size_t i = 0; i < d.compromised.size(); ++i) {
      decisions.decision(row, static_cast<Eigen::Index>(i)) = d.compromised[i];
    }
  }
  write_decisions(run.file("decisions.csv"), decisions);
  save_checkpoint(run.file("model.ckpt"), result.model);
  const auto eval = evaluate("ARNN", decisions);
  add_report(run, table.registry, {eval});

  run.results["training_slots"] = result.training_slots;
  run.results["skipped_samples"] = result.skipped;
  run.results["ARNN"] = aggregate_json(eval.aggregate);
  out << "streamed " << table.slots.size() << " slots with " << result.training_slots.size()
      << " training events\n";
  print_summary(out, "ARNN", eval.aggregate);
}

struct CompareArgs {
  std::string features;
  std::string protocol = "offline";
  double theta = 0.3;
  double gamma = 0.98;
  double total_rate = 1.0;
  double eta = 0.1;
  double mlp_eta = 0.1;
  int arnn_epochs = 0;  // 0 picks the protocol default
  int mlp_epochs = 0;
  int half_width = 12;
  int window = 6;
  std::uint64_t seed = 1;
};

void cmd_compare(Run& run, CompareArgs a, std::ostream& out) {
  require(a.protocol == "offline" || a.protocol == "online", "--protocol must be offline or online");
  const bool offline = a.protocol == "offline";
  if (a.arnn_epochs == 0) {
    a.arnn_epochs = offline ? 20 : 3;
  }
  if (a.mlp_epochs == 0) {
    a.mlp_epochs = offline ? 1000 : 100;
  }
  check_theta(a.theta);
  check_gamma(a.gamma);
  check_rate(a.total_rate);
  check_eta(a.eta, "--eta");
  check_eta(a.mlp_eta, "--mlp-eta");
  check_epochs(a.arnn_epochs, "--arnn-epochs");
  check_epochs(a.mlp_epochs, "--mlp-epochs");
  require(a.half_width >= 0, "--half-width must be non-negative");
  require(a.window >= 1, "--window must be at least 1");
  const auto path = input_path(run, "features", a.features);
  run.parameters["protocol"] = a.protocol;
  run.parameters["theta"] = a.theta;
  run.parameters["gamma"] = a.gamma;
  run.parameters["W"] = a.total_rate;
  run.parameters["eta"] = a.eta;
  run.parameters["mlp-eta"] = a.mlp_eta;
  run.parameters["arnn-epochs"] = a.arnn_epochs;
  run.parameters["mlp-epochs"] = a.mlp_epochs;
  run.parameters["half-width"] = a.half_width;
  run.parameters["window"] = a.window;
  run.parameters["seed"] = a.seed;

  const auto table = load_features(path, a.theta);
  const std::size_t n = table.registry.size();
  DecisionTable arnn_dec, mlp_dec;
  if (offline) {
    const auto w = window_with_tests(table.slots, a.half_width);
    const auto train = to_training_samples(w.train);
    TrainConfig cfg;
    cfg.eta = a.eta;
    cfg.epochs = a.arnn_epochs;
    cfg.gamma = a.gamma;
    const auto arnn = train_offline(ArnnModel::neutral(n, a.total_rate), train, cfg);
    const auto mlp = mlp_train(MlpModel::for_network(n, a.seed), train, a.mlp_eta, a.mlp_epochs);
    save_checkpoint(run.file("arnn.ckpt"), arnn.model);
    save_checkpoint(run.file("mlp.ckpt"), mlp.model);
    write_cost_trace(run.file("arnn_cost_trace.csv"), arnn.trace);
    write_cost_trace(run.file("mlp_cost_trace.csv"), mlp.trace);
    arnn_dec = arnn_table(arnn.model, w.test, table.registry, a.gamma);
    mlp_dec = mlp_table(mlp.model, w.test, table.registry, a.theta);
    run.results["window"] = window_json(w);
  } else {
    const auto stream = to_training_samples(table.slots);
    OnlineConfig cfg;
    cfg.window = static_cast<std::size_t>(a.window);
    cfg.epochs = a.arnn_epochs;
    cfg.eta = a.eta;
    cfg.gamma = a.gamma;
    const auto arnn = train_online(ArnnModel::neutral(n, a.total_rate), stream, cfg);
    const auto mlp = mlp_train_online(MlpModel::for_network(n, a.seed), stream, cfg.window, a.mlp_epochs,
                                      a.mlp_eta, a.theta);
    save_checkpoint(run.file("arnn.ckpt"), arnn.model);
    save_checkpoint(run.file("mlp.ckpt"), mlp.model);
    arnn_dec = empty_table(table.slots, table.registry, "L");
    mlp_dec = empty_table(table.slots, table.registry, "K_hat");
    for (std::size_t l = 0; l < table.slots.size(); ++l) {
      const auto row = static_cast<Eigen::Index>(l);
      const auto& d = arnn.decisions[l].decision;
      const auto& p = mlp.predictions[l];
      arnn_dec.score.row(row) = d.ratio.transpose();
      mlp_dec.score.row(row) = p.predicted.transpose();
      for (std::size_t i = 0; i < n; ++i) {
        arnn_dec.decision(row, static_cast<Eigen::Index>(i)) = d.compromised[i];
        mlp_dec.decision(row, static_cast<Eigen::Index>(i)) = p.compromised[i];
      }
    }
    run.results["training_slots"] = arnn.training_slots;
  }
  write_decisions(run.file("arnn_decisions.csv"), arnn_dec);
  write_decisions(run.file("mlp_decisions.csv"), mlp_dec);
  const auto arnn_eval = evaluate("ARNN", arnn_dec);
  const auto mlp_eval = evaluate("MLP", mlp_dec);
  add_report(run, table.registry, {arnn_eval, mlp_eval});
  run.results["ARNN"] = aggregate_json(arnn_eval.aggregate);
  run.results["MLP"] = aggregate_json(mlp_eval.aggregate);
  out << a.protocol << " comparison on " << arnn_dec.slots.size() << " evaluated slots\n";
  print_summary(out, "ARNN", arnn_eval.aggregate);
  print_summary(out, "MLP ", mlp_eval.aggregate);
}

struct SweepArgs {
  std::string decisions;
  std::vector<double> gammas{0.96, 0.97, 0.98, 0.99, 1.0};
};

void cmd_sweep_gamma(Run& run, const SweepArgs& a, std::ostream& out) {
  require(!a.gammas.empty(), "--gammas needs at least one value");
  for (double g : a.gammas) {
    check_gamma(g);
  }
  const auto path = input_path(run, "decisions", a.decisions);
  run.parameters["gammas"] = a.gammas;
  const auto table = read_decisions(path);
  if (table.score_name != "L") {
    throw ShapeError("gamma sweeps need ARNN decision ratios (column L), found " + table.score_name);
  }
  const auto rows = gamma_sweep(table.score, table.truth, a.gammas);
  write_gamma_sweep(run.file("gamma_sweep.csv"), rows);
  Json per = Json::array();
  for (const auto& r : rows) {
    per.push_back(Json{{"gamma", r.gamma}, {"median_accuracy", r.aggregate.accuracy_box.median},
                       {"macro_accuracy", r.aggregate.macro_accuracy}});
    out << "gamma " << csv::format(r.gamma) << ": median accuracy " << pct(r.aggregate.accuracy_box.median)
        << ", macro TNR " << pct(r.aggregate.macro_tnr) << ", macro TPR " << pct(r.aggregate.macro_tpr) << '\n';
  }
  run.results["sweep"] = per;
}

struct ReportArgs {
  std::vector<std::string> decisions;
  std::vector<std::string> names;
};

void cmd_report(Run& run, const ReportArgs& a, std::ostream& out) {
  require(!a.decisions.empty(), "--decisions needs at least one file");
  require(a.names.empty() || a.names.size() == a.decisions.size(),
          "--names must give one name per decisions file");
  std::vector<EvaluationSet> sets;
  std::optional<NodeRegistry> registry;
  std::vector<std::string> paths;
  for (std::size_t k = 0; k < a.decisions.size(); ++k) {
    const auto path = input_path(run, "decisions_" + std::to_string(k), a.decisions[k]);
    run.parameters.erase("decisions_" + std::to_string(k));
    paths.push_back(path);
    const auto table = read_decisions(path);
    if (registry && !(*registry == table.registry)) {
      throw ShapeError("decision files cover different node sets");
    }
    registry = table.registry;
    const auto name = a.names.empty() ? fs::path(path).stem().string() : a.names[k];
    sets.push_back(evaluate(name, table));
  }
  run.parameters["decisions"] = paths;
  if (!a.names.empty()) {
    run.parameters["names"] = a.names;
  }
  for (const auto& p : emit_report(run.out, *registry, sets)) {
    run.outputs.push_back(p);
  }
  for (const auto& s : sets) {
    run.results[s.model] = aggregate_json(s.aggregate);
    print_summary(out, s.model, s.aggregate);
  }
}

std::string arg_string(const Json& v) {
  if (v.is_string()) {
    return v.get<std::string>();
  }
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) {
      s += (s.empty() ? "" : ",") + arg_string(e);
    }
    return s;
  }
  return v.dump();
}

int cmd_replay(const std::string& manifest_path, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw IoError("cannot open manifest " + manifest_path);
  }
  const auto m = Json::parse(in);
  if (m.value("tool", "") != "arnn" || !m.contains("command") || !m.contains("parameters")) {
    throw ConfigError(manifest_path + " is not an arnn run manifest");
  }
  for (const auto& [key, rec] : m["inputs"].items()) {
    const auto path = rec.at("path").get<std::string>();
    if (!fs::is_regular_file(path) || digest_of(path)["crc32"] != rec.at("crc32")) {
      throw ConfigError("input " + key + " (" + path + ") differs from the recorded run");
    }
  }
  std::vector<std::string> args{m["command"].get<std::string>()};
  for (const auto& [key, value] : m["parameters"].items()) {
    args.push_back("--" + key);
    args.push_back(arg_string(value));
  }
  args.push_back("--out");
  args.push_back(out_dir.string());
  const int code = run(args, out, err);
  if (code != kOk) {
    return code;
  }

  const auto replayed = [&] {
    std::ifstream f(out_dir / "manifest.json");
    return Json::parse(f);
  }();
  std::size_t mismatches = 0;
  for (const auto& [name, rec] : m["outputs"].items()) {
    if (!replayed["outputs"].contains(name) || replayed["outputs"][name]["crc32"] != rec["crc32"]) {
      err << "replay: " << name << " differs from the recorded output\n";
      ++mismatches;
    }
  }
  if (mismatches != 0) {
    return kData;
  }
  out << "replay reproduced " << m["outputs"].size() << " outputs byte for byte\n";
  return kOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return kUsage;
    case ErrorKind::Data: return kData;
    case ErrorKind::Numeric: return kNumeric;
    case ErrorKind::Io: return kData;
  }
  return kUnexpected;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Associated random neural network botnet detector", "arnn"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string out_dir;
  auto add_out = [&out_dir](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory")->required();
  };

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Packet CSV to per-slot features");
  s_ingest->add_option("--packets", ingest.packets, "Packet CSV t,src,dst,label")->required();
  add_real(s_ingest, "--tau", ingest.tau, "Slot length in seconds");
  add_real(s_ingest, "--theta", ingest.theta, "Ground-truth threshold on K");
  add_out(s_ingest);

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Synthetic botnet packet trace");
  s_synth->add_option("--nodes", synth.cfg.nodes, "Number of nodes")->capture_default_str();
  s_synth->add_option("--slots", synth.cfg.slots, "Number of slots")->capture_default_str();
  add_real(s_synth, "--slot-seconds", synth.cfg.slot_seconds, "Slot length in seconds");
  s_synth->add_option("--seed", synth.cfg.seed, "Random seed")->capture_default_str();
  s_synth->add_option("--infected", synth.cfg.initially_compromised, "Initially compromised node indices")
      ->delimiter(',')
      ->capture_default_str();
  s_synth->add_option("--attack-start", synth.cfg.attack_start_slot, "Slot at whose end the seeds turn")
      ->capture_default_str();
  add_real(s_synth, "--rate", synth.cfg.packets_per_slot, "Mean packets per node and slot");
  add_real(s_synth, "--bot-multiplier", synth.cfg.bot_rate_multiplier, "Send-rate factor of compromised nodes");
  add_real(s_synth, "--infection-threshold", synth.cfg.infection_threshold,
           "Received attack ratio that compromises a node");
  add_real(s_synth, "--attack-fraction", synth.cfg.attack_fraction, "Share of bot packets that are attacks");
  add_out(s_synth);

  OfflineArgs offline;
  auto* s_offline = app.add_subcommand("train-offline", "Train around the first compromise, test elsewhere");
  s_offline->add_option("--features", offline.features, "Features CSV from ingest")->required();
  add_real(s_offline, "--theta", offline.theta, "Ground-truth threshold on K");
  add_real(s_offline, "--gamma", offline.gamma, "Decision threshold on L");
  add_real(s_offline, "--W", offline.total_rate, "Total rate between neuron pairs");
  add_real(s_offline, "--eta", offline.eta, "Learning rate");
  s_offline->add_option("--epochs", offline.epochs, "Training epochs")->capture_default_str();
  s_offline->add_option("--half-width", offline.half_width, "Training slots on each side of l*")
      ->capture_default_str();
  add_out(s_offline);

  OnlineArgs online;
  auto* s_online = app.add_subcommand("train-online", "Prequential streaming detection");
  s_online->add_option("--features", online.features, "Features CSV from ingest")->required();
  add_real(s_online, "--theta", online.theta, "Ground-truth threshold on K");
  add_real(s_online, "--gamma", online.gamma, "Decision threshold on L");
  add_real(s_online, "--W", online.total_rate, "Total rate between neuron pairs");
  add_real(s_online, "--eta", online.eta, "Learning rate");
  s_online->add_option("--epochs", online.epochs, "Epochs per training event")->capture_default_str();
  s_online->add_option("--window", online.window, "Train every this many slots on the last this many")
      ->capture_default_str();
  add_out(s_online);

  CompareArgs compare;
  auto* s_compare = app.add_subcommand("compare", "ARNN against the MLP baseline");
  s_compare->add_option("--features", compare.features, "Features CSV from ingest")->required();
  s_compare->add_option("--protocol", compare.protocol, "offline or online")->capture_default_str();
  add_real(s_compare, "--theta", compare.theta, "Ground-truth and MLP decision threshold");
  add_real(s_compare, "--gamma", compare.gamma, "ARNN decision threshold on L");
  add_real(s_compare, "--W", compare.total_rate, "Total rate between neuron pairs");
  add_real(s_compare, "--eta", compare.eta, "ARNN learning rate");
  add_real(s_compare, "--mlp-eta", compare.mlp_eta, "MLP learning rate");
  s_compare->add_option("--arnn-epochs", compare.arnn_epochs, "ARNN epochs (default 20 offline, 3 online)");
  s_compare->add_option("--mlp-epochs", compare.mlp_epochs, "MLP epochs (default 1000 offline, 100 online)");
  s_compare->add_option("--half-width", compare.half_width, "Offline training slots on each side of l*")
      ->capture_default_str();
  s_compare->add_option("--window", compare.window, "Online training period")->capture_default_str();
  s_compare->add_option("--seed", compare.seed, "MLP initialisation seed")->capture_default_str();
  add_out(s_compare);

  SweepArgs sweep;
  auto* s_sweep = app.add_subcommand("sweep-gamma", "Metrics over a range of decision thresholds");
  s_sweep->add_option("--decisions", sweep.decisions, "ARNN decisions CSV")->required();
  add_reals(s_sweep, "--gammas", sweep.gammas, "Comma-separated thresholds");
  add_out(s_sweep);

  ReportArgs report;
  auto* s_report = app.add_subcommand("report", "Tables and figures from decision files");
  s_report->add_option("--decisions", report.decisions, "Decision CSVs")->required()->delimiter(',');
  s_report->add_option("--names", report.names, "Model names, one per file")->delimiter(',');
  add_out(s_report);

  std::string manifest;
  auto* s_replay = app.add_subcommand("replay", "Re-run a recorded run and check its outputs");
  s_replay->add_option("--manifest", manifest, "manifest.json of the recorded run")->required();
  add_out(s_replay);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    auto* sub = app.get_subcommands().front();
    if (sub == s_replay) {
      return cmd_replay(manifest, out_dir, out, err);
    }
    Run r;
    r.command = sub->get_name();
    r.out = out_dir;
    fs::create_directories(r.out);
    if (sub == s_ingest) {
      cmd_ingest(r, ingest, out);
    } else if (sub == s_synth) {
      cmd_synth(r, synth, out);
    } else if (sub == s_offline) {
      cmd_train_offline(r, offline, out);
    } else if (sub == s_online) {
      cmd_train_online(r, online, out);
    } else if (sub == s_compare) {
      cmd_compare(r, compare, out);
    } else if (sub == s_sweep) {
      cmd_sweep_gamma(r, sweep, out);
    } else if (sub == s_report) {
      cmd_report(r, report, out);
    }
    write_manifest(r);
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed manifest: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUnexpected;
  }
}

}  // namespace arnn::cli
