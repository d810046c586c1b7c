#include "veritas/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "veritas/core.hpp"
#include "veritas/csv.hpp"
#include "veritas/data_pipeline.hpp"
#include "veritas/evaluation.hpp"
#include "veritas/grbm.hpp"
#include "veritas/model_io.hpp"
#include "veritas/rbm.hpp"
#include "veritas/reliability_net.hpp"
#include "veritas/synthgen.hpp"

namespace veritas::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public Error {
 public:
  using Error::Error;
};

void configure_logging() {
  static const bool done = [] {
    auto logger = std::make_shared<spdlog::logger>("veritas", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)done;
  const char* level = std::getenv("VERITAS_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::size_t> parse_hidden(const std::string& text) {
  std::vector<std::size_t> out;
  if (text.empty() || text == "none" || text == "0") return out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size() || v == 0) {
      throw UsageError("--hidden expects comma-separated positive widths, got '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

void require_file(const fs::path& p, const char* flag) {
  if (!fs::is_regular_file(p)) throw DataError(std::string(flag) + ": no such file '" + p.string() + "'");
}

void require_parent(const fs::path& p, const char* flag) {
  const auto parent = p.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw DataError(std::string(flag) + ": directory '" + parent.string() + "' does not exist");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write '" + path.string() + "'");
  f << text;
}

// Everything a run depends on. Flags override the config file, which
// overrides the defaults.
struct RunConfig {
  std::string method = "grbm";
  TrainingConfig training;
  NetworkSpec network;
  std::string policy = "implicit-negatives";
  std::optional<std::string> recipe;  // unset: "auto" for grbm, "none" for baseline
  unsigned threads = 1;
  bool lenient = false;

  RunConfig() { training.rng_seed = kDefaultSeed; }

  json to_json() const {
    json j = config_to_json(training);
    j["method"] = method;
    j["hidden"] = network.hidden_layers;
    j["activation"] = std::string(to_string(network.activation));
    j["policy"] = policy;
    j["recipe"] = recipe ? json(*recipe) : json(nullptr);
    return j;
  }
};

void apply_config_file(RunConfig& rc, const fs::path& path) {
  require_file(path, "--config");
  const json doc = read_json_file(path);
  if (!doc.is_object()) throw DataError(path.string() + ": config must be a JSON object");
  json merged = config_to_json(rc.training);
  for (const auto& [k, v] : doc.items()) merged[k] = v;
  if (!doc.contains("rng_seed") && doc.contains("seed")) merged["rng_seed"] = doc["seed"];
  rc.training = config_from_json(merged);
  try {
    if (doc.contains("hidden")) rc.network.hidden_layers = doc["hidden"].get<std::vector<std::size_t>>();
    if (doc.contains("activation")) rc.network.activation = parse_activation(doc["activation"].get<std::string>());
    if (doc.contains("policy")) rc.policy = doc["policy"].get<std::string>();
    if (doc.contains("recipe") && !doc["recipe"].is_null()) rc.recipe = doc["recipe"].get<std::string>();
    if (doc.contains("threads")) rc.threads = doc["threads"].get<unsigned>();
    if (doc.contains("lenient")) rc.lenient = doc["lenient"].get<bool>();
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

FeatureRecipe resolve_recipe(const std::string& spec) {
  if (spec == "none" || spec == "basic" || spec == "auto") return FeatureRecipe::named(spec);
  require_file(spec, "--recipe");
  return recipe_from_json(read_json_file(spec));
}

std::vector<RawClaimRow> load_claims(const fs::path& path, bool lenient) {
  require_file(path, "--claims");
  auto result = ingest(path, format_from_path(path), lenient);
  for (const auto& issue : result.issues) {
    spdlog::warn("{}: skipped line {}: {}", path.string(), issue.line, issue.message);
  }
  if (result.rows.empty()) throw DataError(path.string() + ": no claims");
  spdlog::info("read {} claims from {}", result.rows.size(), path.string());
  return std::move(result.rows);
}

// First claim (in input order) as a human-readable locator.
std::string describe_claim(const RawClaimRow& row) {
  return "line " + std::to_string(row.line) + " (" + row.entity_id + ", " + row.attribute_id + ", " +
         row.claimed_value + ") from source '" + row.source_id.value_or("<anonymous>") + "'";
}

struct Prepared {
  Encoding encoding;
  FeatureResult features;
};

Prepared prepare(const std::vector<RawClaimRow>& rows, NegativeClaimPolicy policy, const FeatureRecipe& recipe) {
  Prepared p{one_hot_encode(rows, policy), {}};
  p.features = compute_features(p.encoding, recipe);
  p.encoding.manifest.recipe = p.features.recipe;
  spdlog::info("{} statements, {} sources, {} features", p.features.dataset.size(),
               p.features.dataset.source_count(), p.features.dataset.feature_dim());
  return p;
}

std::vector<TruthEstimate> infer_with(const ModelFile& model, const Dataset& dataset, unsigned threads) {
  if (model.kind == ModelKind::grbm) return infer_grbm(*model.grbm, dataset, threads);
  return infer_baseline(align_parameters(*model.baseline, dataset), dataset, threads);
}

json model_digest_input(const ModelFile& model) {
  const TrainingConfig& c = model.kind == ModelKind::grbm ? model.grbm->config : model.baseline->config;
  json j = config_to_json(c);
  j["method"] = model.kind == ModelKind::grbm ? "grbm" : "baseline";
  j["policy"] = std::string(to_string(model.policy));
  j["recipe"] = model.recipe.name;
  return j;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_synth(const fs::path& spec_path, const fs::path& out_dir, const std::string& format,
              std::optional<std::uint64_t> seed, std::ostream& out) {
  require_file(spec_path, "--spec");
  ScenarioSpec spec = scenario_from_json(read_json_file(spec_path));
  if (seed) spec.seed = *seed;
  spdlog::info("config digest {} seed {}", config_digest(to_json(spec)), spec.seed);
  const auto corpus = generate(spec);
  write_corpus(corpus, out_dir, format == "jsonl" ? ClaimFormat::jsonl : ClaimFormat::csv);
  out << "wrote " << corpus.dataset.claim_count() << " claims on " << corpus.dataset.size()
      << " statements from " << corpus.sources.size() << " sources to " << out_dir.string() << '\n';
  return kExitOk;
}

int cmd_train(const RunConfig& rc, const fs::path& claims, const fs::path& out_path,
              const std::optional<fs::path>& manifest_path, std::ostream& out) {
  require_parent(out_path, "--out");
  if (manifest_path) require_parent(*manifest_path, "--manifest");
  rc.training.validate();
  const bool grbm = rc.method == "grbm";
  const FeatureRecipe recipe = resolve_recipe(rc.recipe.value_or(grbm ? "auto" : "none"));
  const auto policy = parse_policy(rc.policy);

  spdlog::info("config digest {} seed {}", config_digest(rc.to_json()), rc.training.rng_seed);
  const auto rows = load_claims(claims, rc.lenient);
  const auto prepared = prepare(rows, policy, recipe);
  const Dataset& dataset = prepared.features.dataset;

  ModelFile model;
  model.policy = policy;
  model.recipe = prepared.features.recipe;
  auto log_epoch = [](const EpochStats& s) {
    spdlog::debug("epoch {} mean |change| {:.3g}", s.epoch, s.mean_abs_change);
  };
  if (grbm) {
    if (dataset.feature_dim() == 0) {
      throw DataError("claim at " + describe_claim(prepared.encoding.rows.front()) +
                      " has no features; grbm needs a feature recipe that yields at least one column");
    }
    NetworkSpec spec = rc.network;
    spec.input_dim = dataset.feature_dim();
    model.kind = ModelKind::grbm;
    model.grbm = train_grbm(dataset, spec, rc.training, {{}, log_epoch});
  } else {
    if (dataset.has_anonymous_claims()) {
      for (const auto& row : prepared.encoding.rows) {
        if (!row.source_id) throw DataError("claim at " + describe_claim(row) + " has no source; baseline needs source ids");
      }
    }
    model.kind = ModelKind::baseline;
    const auto names = dataset.source_names();
    model.baseline = BaselineModel{{names.begin(), names.end()}, train_baseline(dataset, rc.training, log_epoch), rc.training};
  }
  save_model(out_path, model);
  if (manifest_path) write_json_file(*manifest_path, to_json(prepared.encoding.manifest));
  out << "trained " << rc.method << " model on " << dataset.size() << " statements; wrote " << out_path.string() << '\n';
  return kExitOk;
}

int cmd_infer(const fs::path& model_path, const fs::path& claims, const std::optional<fs::path>& out_path,
              unsigned threads, bool lenient, std::ostream& out) {
  require_file(model_path, "--model");
  if (out_path) require_parent(*out_path, "--out");
  const ModelFile model = load_model(model_path);
  const TrainingConfig& c = model.kind == ModelKind::grbm ? model.grbm->config : model.baseline->config;
  spdlog::info("config digest {} seed {}", config_digest(model_digest_input(model)), c.rng_seed);
  const auto rows = load_claims(claims, lenient);
  const auto prepared = prepare(rows, model.policy, model.recipe);
  const auto estimates = infer_with(model, prepared.features.dataset, threads);

  std::ostringstream table;
  table << "entity,attribute,value,plausibility,decision\n";
  const auto& manifest = prepared.encoding.manifest;
  for (const auto& e : estimates) {
    const auto& key = manifest.key_of(e.statement_id);
    table << csv::join({key.entity, key.attribute, key.value, shortest(e.plausibility),
                        std::to_string(static_cast<int>(e.decision))})
          << '\n';
  }
  if (out_path) {
    write_text(*out_path, table.str());
    out << "wrote " << estimates.size() << " estimates to " << out_path->string() << '\n';
  } else {
    out << table.str();
  }
  return kExitOk;
}

int cmd_eval(const std::optional<fs::path>& model_path, const fs::path& claims, const fs::path& truth_path,
             const std::optional<fs::path>& out_dir, const std::string& policy_name, unsigned threads,
             bool lenient, std::ostream& out) {
  require_file(truth_path, "--truth");
  std::optional<ModelFile> model;
  if (model_path) {
    require_file(*model_path, "--model");
    model = load_model(*model_path);
  }
  const auto policy = model ? model->policy : parse_policy(policy_name);
  const FeatureRecipe recipe = model ? model->recipe : FeatureRecipe::named("none");
  const json digest_input = model ? model_digest_input(*model) : json{{"method", "majority"}, {"policy", policy_name}};
  const std::string digest = config_digest(digest_input);
  const std::uint64_t seed =
      model ? (model->kind == ModelKind::grbm ? model->grbm->config.rng_seed : model->baseline->config.rng_seed)
            : kDefaultSeed;
  spdlog::info("config digest {} seed {}", digest, seed);

  const auto rows = load_claims(claims, lenient);
  const auto prepared = prepare(rows, policy, recipe);
  const Dataset& dataset = prepared.features.dataset;
  const auto& manifest = prepared.encoding.manifest;
  const GroundTruth truth = load_ground_truth(truth_path, manifest);
  const auto strata = group_strata(dataset, manifest);

  std::vector<EvalReport> reports;
  const auto majority = majority_vote_all(dataset);
  reports.push_back(evaluate(per_attribute_decision(majority, manifest), truth, strata, "majority_vote"));
  reports.back().config_digest = config_digest({{"method", "majority"}, {"policy", std::string(to_string(policy))}});
  if (model) {
    const auto estimates = infer_with(*model, dataset, threads);
    const std::string method = model->kind == ModelKind::grbm ? "grbm" : "baseline";
    reports.push_back(evaluate(per_attribute_decision(estimates, manifest), truth, strata, method));
    reports.back().config_digest = digest;
  }

  const auto& primary = reports.back();
  out << "accuracy " << primary.method << ": " << shortest(primary.overall_accuracy) << " (" << primary.n_correct
      << '/' << primary.n_labeled << ")\n";
  out << to_text_table(reports);
  if (out_dir) {
    fs::create_directories(*out_dir);
    json all = json::array();
    for (const auto& r : reports) all.push_back(to_json(r));
    write_json_file(*out_dir / "report.json", all);
    write_text(*out_dir / "report.txt", to_text_table(reports));
    write_text(*out_dir / "report.csv", to_csv(reports));
  }
  return kExitOk;
}

int cmd_report(const fs::path& model_path, const fs::path& claims, const std::optional<fs::path>& out_path,
               bool lenient, std::ostream& out) {
  require_file(model_path, "--model");
  if (out_path) require_parent(*out_path, "--out");
  const ModelFile model = load_model(model_path);
  const auto rows = load_claims(claims, lenient);
  const auto prepared = prepare(rows, model.policy, model.recipe);
  const Dataset& dataset = prepared.features.dataset;

  // Per source: number of claims plus mean tpr/fpr over those claims.
  struct Acc {
    std::size_t n = 0;
    double tpr = 0.0;
    double fpr = 0.0;
  };
  std::map<std::string, Acc> acc;
  std::optional<RbmParameters> aligned;
  if (model.kind == ModelKind::baseline) aligned = align_parameters(*model.baseline, dataset);
  for (const auto& b : dataset.bundles()) {
    for (const auto& c : b.claims()) {
      if (!c.source_id) continue;
      const SourceReliability r = aligned ? source_reliability(*aligned, *dataset.source_index(*c.source_id))
                                          : reliability_at(*model.grbm, c.features);
      auto& a = acc[*c.source_id];
      ++a.n;
      a.tpr += r.tpr;
      a.fpr += r.fpr;
    }
  }
  std::ostringstream table;
  table << "source,claims,tpr,fpr\n";
  for (const auto& [source, a] : acc) {
    const double n = static_cast<double>(a.n);
    table << csv::join({source, std::to_string(a.n), shortest(a.tpr / n), shortest(a.fpr / n)}) << '\n';
  }
  if (out_path) {
    write_text(*out_path, table.str());
  } else {
    out << table.str();
  }
  return kExitOk;
}

void emit_error(std::ostream& err, const char* kind, int code, const std::string& message) {
  err << json{{"error", kind}, {"exit_code", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();

  CLI::App app{"Latent truth discovery with RBM and generalized RBM models", "veritas"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string claims, truth, model, out_path, config_path, spec_path, format = "csv", manifest;
  std::string hidden, activation, policy, recipe;
  std::uint64_t seed = 0;
  int epochs = 0, cd_steps = 0, pretrain_epochs = 0;
  double lr = 0.0;
  unsigned threads = 1;
  bool lenient = false;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted truth");
  synth->add_option("--spec", spec_path, "Scenario JSON")->required();
  synth->add_option("--out", out_path, "Output directory")->required();
  synth->add_option("--format", format, "Claims file format")->check(CLI::IsMember({"csv", "jsonl"}));
  auto* synth_seed = synth->add_option("--seed", seed, "Override the scenario seed");

  auto* train = app.add_subcommand("train", "Train a baseline or grbm model");
  train->add_option("method", rc.method, "baseline | grbm")->required()->check(CLI::IsMember({"baseline", "grbm"}));
  train->add_option("--claims", claims, "Claims file (csv or jsonl)")->required();
  train->add_option("--out", out_path, "Model output path")->required();
  train->add_option("--manifest", manifest, "Also write the encoding manifest here");
  train->add_option("--config", config_path, "JSON run config; explicit flags take precedence");
  auto* o_seed = train->add_option("--seed", seed, "RNG seed");
  auto* o_epochs = train->add_option("--epochs", epochs, "Training epochs");
  auto* o_lr = train->add_option("--lr", lr, "Learning rate");
  auto* o_cd = train->add_option("--cd-steps", cd_steps, "Gibbs steps per CD estimate");
  auto* o_pre = train->add_option("--pretrain-epochs", pretrain_epochs, "Pretraining epochs (grbm)");
  auto* o_hidden = train->add_option("--hidden", hidden, "Hidden layer widths, e.g. 16 or 8,8; none for linear");
  auto* o_act = train->add_option("--activation", activation, "tanh | relu");
  auto* o_policy = train->add_option("--policy", policy, "implicit-negatives | positives-only");
  auto* o_recipe = train->add_option("--recipe", recipe, "none | basic | auto | recipe JSON path");
  auto* o_threads = train->add_option("--threads", threads, "Worker threads");
  auto* o_lenient = train->add_flag("--lenient", lenient, "Skip malformed rows");

  auto* infer = app.add_subcommand("infer", "Score statements with a trained model");
  infer->add_option("--model", model, "Model file")->required();
  infer->add_option("--claims", claims, "Claims file")->required();
  infer->add_option("--out", out_path, "Output CSV (default stdout)");
  infer->add_option("--threads", threads, "Worker threads");
  infer->add_flag("--lenient", lenient, "Skip malformed rows");

  auto* eval = app.add_subcommand("eval", "Accuracy against ground truth, with majority vote for reference");
  eval->add_option("--model", model, "Model file (omit for majority vote only)");
  eval->add_option("--claims", claims, "Claims file")->required();
  eval->add_option("--truth", truth, "Ground-truth CSV")->required();
  eval->add_option("--out", out_path, "Directory for report.json, report.txt and report.csv");
  eval->add_option("--policy", policy, "Encoding policy when no model is given");
  eval->add_option("--threads", threads, "Worker threads");
  eval->add_flag("--lenient", lenient, "Skip malformed rows");

  auto* report = app.add_subcommand("report", "Per-source reliability under a trained model");
  report->add_option("--model", model, "Model file")->required();
  report->add_option("--claims", claims, "Claims file")->required();
  report->add_option("--out", out_path, "Output CSV (default stdout)");
  report->add_flag("--lenient", lenient, "Skip malformed rows");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n";
    const auto used = app.get_subcommands();
    err << (used.empty() ? app.help() : used.front()->help());
    emit_error(err, "usage", kExitUsage, e.what());
    return kExitUsage;
  }

  try {
    auto opt_path = [](const std::string& s) { return s.empty() ? std::optional<fs::path>{} : fs::path(s); };
    if (synth->parsed()) {
      return cmd_synth(spec_path, out_path, format, synth_seed->count() ? std::optional(seed) : std::nullopt, out);
    }
    if (train->parsed()) {
      if (rc.method == "grbm") {
        const auto seed_default = rc.training.rng_seed;
        rc.training = grbm_default_config();
        rc.training.rng_seed = seed_default;
      }
      if (!config_path.empty()) {
        const std::string method = rc.method;
        apply_config_file(rc, config_path);
        rc.method = method;
      }
      if (o_seed->count()) rc.training.rng_seed = seed;
      if (o_epochs->count()) rc.training.epochs = epochs;
      if (o_lr->count()) rc.training.learning_rate = lr;
      if (o_cd->count()) rc.training.cd_steps = cd_steps;
      if (o_pre->count()) rc.training.pretrain_epochs = pretrain_epochs;
      if (o_hidden->count()) rc.network.hidden_layers = parse_hidden(hidden);
      if (o_act->count()) rc.network.activation = parse_activation(activation);
      if (o_policy->count()) rc.policy = policy;
      if (o_recipe->count()) rc.recipe = recipe;
      if (o_threads->count()) rc.threads = threads;
      if (o_lenient->count()) rc.lenient = lenient;
      parse_policy(rc.policy);
      return cmd_train(rc, claims, out_path, opt_path(manifest), out);
    }
    if (infer->parsed()) return cmd_infer(model, claims, opt_path(out_path), threads, lenient, out);
    if (eval->parsed()) {
      return cmd_eval(opt_path(model), claims, truth, opt_path(out_path),
                      policy.empty() ? "implicit-negatives" : policy, threads, lenient, out);
    }
    if (report->parsed()) return cmd_report(model, claims, opt_path(out_path), lenient, out);
  } catch (const UsageError& e) {
    emit_error(err, "usage", kExitUsage, e.what());
    return kExitUsage;
  } catch (const NumericError& e) {
    emit_error(err, "numeric", kExitNumeric, e.what());
    return kExitNumeric;
  } catch (const DataError& e) {
    emit_error(err, "data", kExitData, e.what());
    return kExitData;
  } catch (const DomainError& e) {
    emit_error(err, "data", kExitData, e.what());
    return kExitData;
  } catch (const std::exception& e) {
    emit_error(err, "internal", kExitFailure, e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace veritas::cli
