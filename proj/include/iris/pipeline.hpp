#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "iris/heads.hpp"
#include "iris/segmentation.hpp"

namespace iris {

// Ablation ladder mirroring the modeling study: from a single total-score
// regressor up to the full pipeline with segmentation, conditional GOE and
// multi-task PCS heads.
enum class ModelVariant : int {
  ScoreOnly = 0,
  TesPcs = 1,
  Subscores = 2,
  SubscoresWithSegments = 3,
  DeltaSubscores = 4,
  DeltaSubscoresWithSegments = 5,  // full pipeline
};

inline constexpr ModelVariant kFullVariant = ModelVariant::DeltaSubscoresWithSegments;
inline constexpr int kNumVariants = 6;

std::string variant_name(ModelVariant v);
std::optional<ModelVariant> variant_from_name(std::string_view name);
bool variant_has_segmentation(ModelVariant v);

struct ModelGeometry {
  i64 embed_dim = 0;
  i64 channels = 32;
  i64 stages = 2;
  i64 layers = 6;
  i64 hidden = 32;
  i64 max_segment_windows = 64;
  i64 max_elements = 0;  // resolved from the training data when 0
};

// The trainable networks of one variant. Components not used by the variant
// stay null.
struct ModelParams {
  ModelVariant variant = kFullVariant;
  ModelGeometry geom;
  std::unique_ptr<MsTcn> mstcn;            // segmentation variants
  std::unique_ptr<SegmentHead> elem_head;  // per-segment GOE or absolute subscore
  std::unique_ptr<PcsHead> pcs_head;       // component-predicting variants
  std::unique_ptr<PooledRegressor> reg;    // whole-sequence regressors

  static ModelParams build(ModelVariant variant, const ModelGeometry& geom, std::uint64_t seed);
  std::vector<nn::ParamTensor*> params();
};

// Versioned binary model file: magic "IRIS", format version, variant tag,
// geometry, then shape-prefixed little-endian doubles per tensor.
void save_model(const ModelParams& model, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

struct TrainConfig {
  double learning_rate = 5e-4;
  i64 batch_size = 60;
  i64 max_epochs = 300;
  double w_segmentation = 1.0;
  double w_element = 1.0;  // GOE / subscore branch
  double w_pcs = 1.0;
  double w_score = 1.0;
  double lambda_smooth = 0.15;
  double epsilon_smooth = 4.0;
  ModelVariant variant = kFullVariant;
  std::uint64_t seed = 1;
  ModelGeometry geometry;  // embed_dim / max_elements resolved from data when 0
};

struct TrainingLog {
  struct Epoch {
    i64 epoch = 0;
    double seg = 0.0;
    double element = 0.0;
    double pcs = 0.0;
    double score = 0.0;
    double total = 0.0;
  };
  std::vector<Epoch> epochs;
  bool early_stopped = false;
};

using EpochCallback = std::function<void(const TrainingLog::Epoch&)>;

// Seeded mini-batch Adam on the weighted sum of the variant's losses.
// Per-segment heads train on ground-truth segments (teacher forcing);
// inference uses predicted, corrected segments. Deterministic given
// (records, config). Throws Divergence if any batch loss turns non-finite.
std::pair<ModelParams, TrainingLog> train(const std::vector<PerformanceRecord>& records,
                                          const TrainConfig& config,
                                          const EpochCallback& on_epoch = {});

// Full-variant inference: segmentation -> decode -> count correction ->
// per-element slicing -> conditional GOE -> PCS -> exact composition.
// Planned elements with no detected run are flagged missing with GOE 0.
Judgment predict(ModelParams& model, const EmbeddingSequence& embeddings,
                 const ScoreSheet& sheet);

// Same composition from an externally supplied labeling (test hook and the
// tail of predict()).
Judgment predict_with_labels(ModelParams& model, const EmbeddingSequence& embeddings,
                             const ScoreSheet& sheet, const SegmentLabeling& labels);

// Variant-dispatched score prediction used by evaluation; the full variant
// routes through predict().
struct ScorePrediction {
  double tes = 0.0;
  double pcs_total = 0.0;
  double total = 0.0;
  std::optional<SegmentLabeling> labels;
  bool deficit = false;
};
ScorePrediction predict_scores(ModelParams& model, const EmbeddingSequence& embeddings,
                               const ScoreSheet& sheet);

struct TertileStat {
  i64 count = 0;
  double mean_abs_tes_error = 0.0;
  double standard_error = 0.0;
};

struct EvaluationReport {
  i64 n_records = 0;
  double spearman_tes = 0.0, spearman_pcs = 0.0, spearman_total = 0.0;
  double pearson_tes = 0.0, pearson_pcs = 0.0, pearson_total = 0.0;
  std::optional<double> mean_dice;
  std::optional<double> mean_iou;
  // TES error by IoU tertile: Low (0-33%), Med (33-66%), High (66-100%)
  std::optional<std::array<TertileStat, 3>> tertiles;
  i64 deficit_records = 0;
};

// Correlations against ground truth, plus segmentation metrics and the
// IoU-tertile TES-error breakdown for segmentation variants. Requires at
// least 3 records.
EvaluationReport evaluate(ModelParams& model, const std::vector<PerformanceRecord>& records);

struct AblationRow {
  ModelVariant variant;
  EvaluationReport report;
};

// Trains every variant on the same split and evaluates on the same test set.
std::vector<AblationRow> run_ablation(const std::vector<PerformanceRecord>& train_records,
                                      const std::vector<PerformanceRecord>& test_records,
                                      const TrainConfig& base_config);

}  // namespace iris
