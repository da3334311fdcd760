#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "iris/pipeline.hpp"
#include "iris/report.hpp"

namespace fs = std::filesystem;
using iris::i64;

namespace {

// exit codes are a stable contract for scripting
constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kIoError = 2;
constexpr int kDivergenceError = 3;

int exit_code_for(const iris::Error& e) {
  switch (e.kind()) {
    case iris::ErrorKind::Io: return kIoError;
    case iris::ErrorKind::Divergence: return kDivergenceError;
    default: return kValidationError;
  }
}

struct RunConfig {
  // generate
  std::string out_dir;
  i64 n_records = 150;
  iris::SyntheticConfig synth;
  // train / evaluate / report
  std::string data_dir;
  std::string model_path;
  std::string log_path;
  std::string csv_path;
  std::string out_path;
  std::string record_id;
  std::string variant = "full";
  std::string format = "text";
  iris::TrainConfig train;
  i64 train_count = 0;      // 0: use the whole dataset
  std::uint64_t split_seed = 1;
  std::uint64_t seed = 7;
  int threads = 0;
};

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  iris::require(out.is_open(), iris::ErrorKind::Io, "cannot open for writing: " + path.string());
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  iris::require(out.good(), iris::ErrorKind::Io, "write failed: " + path.string());
}

void emit(const std::string& out_path, const std::string& body) {
  if (out_path.empty() || out_path == "-") {
    std::fwrite(body.data(), 1, body.size(), stdout);
  } else {
    write_file(out_path, body);
  }
}

iris::ModelVariant parse_variant(const std::string& name) {
  const auto v = iris::variant_from_name(name);
  iris::require(v.has_value(), iris::ErrorKind::Validation,
                "unknown variant '" + name + "' (score-only, tes-pcs, subscores, "
                "subscores-segments, delta-subscores, full)");
  return *v;
}

// train and evaluate share the split flags so the held-out set is reproducible
std::pair<std::vector<iris::PerformanceRecord>, std::vector<iris::PerformanceRecord>>
load_and_split(const RunConfig& cfg) {
  std::vector<iris::PerformanceRecord> records = iris::load_dataset(cfg.data_dir);
  iris::require(!records.empty(), iris::ErrorKind::Validation,
                "dataset " + cfg.data_dir + " is empty");
  if (cfg.train_count <= 0) return {std::move(records), {}};
  return iris::split(std::move(records), cfg.train_count, cfg.split_seed);
}

int cmd_generate(const RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  iris::require(!ec && fs::is_directory(dir), iris::ErrorKind::Io,
                "cannot create output directory: " + dir.string());

  iris::SyntheticConfig synth = cfg.synth;
  synth.n_records = cfg.n_records;
  const auto records = iris::generate_synthetic(synth, cfg.seed);
  nlohmann::ordered_json manifest;
  manifest["seed"] = cfg.seed;
  manifest["n_records"] = synth.n_records;
  manifest["dim"] = synth.dim;
  manifest["noise"] = synth.noise;
  auto ids = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    iris::save_record(dir, r.sheet.performance_id, r);
    ids.push_back(r.sheet.performance_id);
  }
  manifest["ids"] = std::move(ids);
  // manifest last: an interrupted run leaves no manifest behind
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << records.size() << " records to " << dir.string() << "\n";
  return kOk;
}

int cmd_train(const RunConfig& cfg) {
  auto [train_records, test_records] = load_and_split(cfg);
  iris::TrainConfig tc = cfg.train;
  tc.variant = parse_variant(cfg.variant);
  tc.seed = cfg.seed;

  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path, std::ios::binary);
    iris::require(log.is_open(), iris::ErrorKind::Io,
                  "cannot open log for writing: " + cfg.log_path);
    log << iris::training_log_header();
    log.flush();
  }
  const auto on_epoch = [&](const iris::TrainingLog::Epoch& e) {
    if (log.is_open()) {
      log << iris::training_log_row(e);
      log.flush();
    }
  };

  auto [model, tlog] = iris::train(train_records, tc, on_epoch);
  iris::save_model(model, cfg.model_path);
  std::cout << "trained " << iris::variant_name(tc.variant) << " for " << tlog.epochs.size()
            << " epoch(s)" << (tlog.early_stopped ? " (early stop)" : "") << ", model written to "
            << cfg.model_path << "\n";
  return kOk;
}

int cmd_evaluate(const RunConfig& cfg) {
  auto [train_records, test_records] = load_and_split(cfg);
  const auto& eval_set = cfg.train_count > 0 ? test_records : train_records;
  iris::ModelParams model = iris::load_model(cfg.model_path);
  const iris::EvaluationReport report = iris::evaluate(model, eval_set);
  if (!cfg.csv_path.empty()) write_file(cfg.csv_path, iris::render_evaluation_csv(report));
  emit(cfg.out_path, iris::render_evaluation_text(report));
  return kOk;
}

int cmd_report(const RunConfig& cfg) {
  iris::ModelParams model = iris::load_model(cfg.model_path);
  const fs::path record(cfg.record_id);
  const iris::PerformanceRecord rec =
      iris::load_record(record.parent_path(), record.filename().string(),
                        /*require_labels=*/false);
  const iris::Judgment judgment = iris::predict(model, rec.embeddings, rec.sheet);
  const std::string body = cfg.format == "html"
                               ? iris::render_judgment_html(judgment, rec.embeddings.valid_count)
                               : iris::render_judgment_text(judgment, rec.embeddings.valid_count);
  emit(cfg.out_path, body);
  return kOk;
}

int cmd_ablation(const RunConfig& cfg) {
  auto [train_records, test_records] = load_and_split(cfg);
  iris::require(!test_records.empty(), iris::ErrorKind::Validation,
                "ablation needs --train-count to hold out a test set");
  iris::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  const auto rows = iris::run_ablation(train_records, test_records, tc);
  if (!cfg.csv_path.empty()) write_file(cfg.csv_path, iris::render_ablation_csv(rows));
  emit(cfg.out_path, iris::render_ablation_text(rows));
  return kOk;
}

// --config FILE provides defaults in the same key space as the flags;
// explicit flags win.
void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  iris::require(in.is_open(), iris::ErrorKind::Io, "cannot open config file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    iris::fail(iris::ErrorKind::Validation, std::string("config file: ") + e.what());
  }
  const auto get = [&](const char* key, auto& field) {
    if (auto it = doc.find(key); it != doc.end()) field = it->get<std::decay_t<decltype(field)>>();
  };
  get("n", cfg.n_records);
  get("seed", cfg.seed);
  get("dim", cfg.synth.dim);
  get("noise", cfg.synth.noise);
  get("t_min", cfg.synth.t_min);
  get("t_max", cfg.synth.t_max);
  get("variant", cfg.variant);
  get("epochs", cfg.train.max_epochs);
  get("lr", cfg.train.learning_rate);
  get("batch", cfg.train.batch_size);
  get("train_count", cfg.train_count);
  get("split_seed", cfg.split_seed);
  get("threads", cfg.threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rubric-informed action quality assessment pipeline"};
  app.require_subcommand(1);
  RunConfig cfg;

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file with flag defaults");
  app.add_option("--threads", cfg.threads, "OpenMP thread count (0 = library default)");

  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  gen->add_option("--out", cfg.out_dir, "output directory")->required();
  gen->add_option("--n", cfg.n_records, "number of records")->capture_default_str();
  gen->add_option("--seed", cfg.seed, "generator seed")->capture_default_str();
  gen->add_option("--dim", cfg.synth.dim, "embedding dimension")->capture_default_str();
  gen->add_option("--noise", cfg.synth.noise, "noise level")->capture_default_str();
  gen->add_option("--t-min", cfg.synth.t_min, "minimum valid windows")->capture_default_str();
  gen->add_option("--t-max", cfg.synth.t_max, "maximum valid windows")->capture_default_str();

  auto* train = app.add_subcommand("train", "Train a model on a dataset");
  train->add_option("--data", cfg.data_dir, "dataset directory")->required();
  train->add_option("--out", cfg.model_path, "model output path")->required();
  train->add_option("--variant", cfg.variant, "model variant")->capture_default_str();
  train->add_option("--epochs", cfg.train.max_epochs, "epoch budget")->capture_default_str();
  train->add_option("--lr", cfg.train.learning_rate, "learning rate")->capture_default_str();
  train->add_option("--batch", cfg.train.batch_size, "batch size")->capture_default_str();
  train->add_option("--seed", cfg.seed, "training seed")->capture_default_str();
  train->add_option("--log", cfg.log_path, "training log CSV path");
  train->add_option("--train-count", cfg.train_count,
                    "train on a seeded split of this size (0 = all records)")
      ->capture_default_str();
  train->add_option("--split-seed", cfg.split_seed, "split seed")->capture_default_str();

  auto* eval = app.add_subcommand("evaluate", "Evaluate a model");
  eval->add_option("--model", cfg.model_path, "model path")->required();
  eval->add_option("--data", cfg.data_dir, "dataset directory")->required();
  eval->add_option("--train-count", cfg.train_count,
                   "evaluate on the held-out part of this seeded split")
      ->capture_default_str();
  eval->add_option("--split-seed", cfg.split_seed, "split seed")->capture_default_str();
  eval->add_option("--csv", cfg.csv_path, "metrics CSV output path");
  eval->add_option("--out", cfg.out_path, "report output path ('-' = stdout)");

  auto* report = app.add_subcommand("report", "Render a judged score sheet for one record");
  report->add_option("--model", cfg.model_path, "model path (full variant)")->required();
  report->add_option("--record", cfg.record_id, "record path prefix, e.g. data/rec_0003")
      ->required();
  report->add_option("--format", cfg.format, "text | html")->capture_default_str()
      ->check(CLI::IsMember({"text", "html"}));
  report->add_option("--out", cfg.out_path, "output path ('-' = stdout)");

  auto* ablation = app.add_subcommand("ablation", "Train and evaluate all model variants");
  ablation->add_option("--data", cfg.data_dir, "dataset directory")->required();
  ablation->add_option("--epochs", cfg.train.max_epochs, "epoch budget per variant")->capture_default_str();
  ablation->add_option("--seed", cfg.seed, "training seed")->capture_default_str();
  ablation->add_option("--train-count", cfg.train_count, "split size")->capture_default_str();
  ablation->add_option("--split-seed", cfg.split_seed, "split seed")->capture_default_str();
  ablation->add_option("--csv", cfg.csv_path, "table CSV output path");
  ablation->add_option("--out", cfg.out_path, "table output path ('-' = stdout)");

  // pre-scan for --config so file values act as defaults under the flags
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string_view(argv[i]) == "--config") {
      try {
        apply_config_file(cfg, argv[i + 1]);
      } catch (const iris::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
      }
      break;
    }
  }

  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif

  try {
    if (gen->parsed()) return cmd_generate(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (eval->parsed()) return cmd_evaluate(cfg);
    if (report->parsed()) return cmd_report(cfg);
    if (ablation->parsed()) return cmd_ablation(cfg);
  } catch (const iris::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  }
  return kValidationError;
}
