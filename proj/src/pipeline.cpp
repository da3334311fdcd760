#include "iris/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "iris/adam.hpp"
#include "iris/metrics.hpp"

namespace iris {

namespace fs = std::filesystem;

std::string variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::ScoreOnly: return "score-only";
    case ModelVariant::TesPcs: return "tes-pcs";
    case ModelVariant::Subscores: return "subscores";
    case ModelVariant::SubscoresWithSegments: return "subscores-segments";
    case ModelVariant::DeltaSubscores: return "delta-subscores";
    case ModelVariant::DeltaSubscoresWithSegments: return "full";
  }
  fail(ErrorKind::Validation, "unknown variant");
}

std::optional<ModelVariant> variant_from_name(std::string_view name) {
  for (int i = 0; i < kNumVariants; ++i) {
    const auto v = static_cast<ModelVariant>(i);
    if (variant_name(v) == name) return v;
  }
  if (name == "delta-subscores-segments") return kFullVariant;
  return std::nullopt;
}

bool variant_has_segmentation(ModelVariant v) {
  return v == ModelVariant::SubscoresWithSegments || v == kFullVariant;
}

ModelParams ModelParams::build(ModelVariant variant, const ModelGeometry& geom,
                               std::uint64_t seed) {
  require(geom.embed_dim > 0, ErrorKind::Validation, "model geometry: embed_dim not set");
  ModelParams m;
  m.variant = variant;
  m.geom = geom;
  Rng rng(seed);

  if (variant_has_segmentation(variant)) {
    MsTcnConfig tcn;
    tcn.in_dim = geom.embed_dim;
    tcn.channels = geom.channels;
    tcn.stages = geom.stages;
    tcn.layers = geom.layers;
    m.mstcn = std::make_unique<MsTcn>(tcn, rng);

    SegmentHead::Config head;
    head.in_dim = geom.embed_dim;
    head.channels = geom.channels;
    head.hidden = geom.hidden;
    head.clamp = (variant == kFullVariant);  // GOE is clamped, absolute subscores are not
    m.elem_head = std::make_unique<SegmentHead>(head, rng);
  }

  switch (variant) {
    case ModelVariant::ScoreOnly:
    case ModelVariant::TesPcs: {
      PooledRegressor::Config reg;
      reg.in_dim = geom.embed_dim;
      reg.hidden = geom.hidden;
      reg.outputs = variant == ModelVariant::ScoreOnly ? 1 : 2;
      m.reg = std::make_unique<PooledRegressor>(reg, rng);
      break;
    }
    case ModelVariant::Subscores:
    case ModelVariant::DeltaSubscores: {
      require(geom.max_elements > 0, ErrorKind::Validation,
              "model geometry: max_elements not set");
      PooledRegressor::Config reg;
      reg.in_dim = geom.embed_dim;
      reg.hidden = geom.hidden;
      reg.outputs = geom.max_elements;
      if (variant == ModelVariant::DeltaSubscores) {
        reg.clamp = true;
        reg.lo = kGoeMin;
        reg.hi = kGoeMax;
      }
      m.reg = std::make_unique<PooledRegressor>(reg, rng);
      break;
    }
    default:
      break;
  }

  if (variant != ModelVariant::ScoreOnly && variant != ModelVariant::TesPcs) {
    PcsHead::Config pcs;
    pcs.in_dim = geom.embed_dim;
    pcs.channels = geom.channels;
    pcs.hidden = geom.hidden;
    m.pcs_head = std::make_unique<PcsHead>(pcs, rng);
  }
  return m;
}

std::vector<nn::ParamTensor*> ModelParams::params() {
  std::vector<nn::ParamTensor*> out;
  if (mstcn) {
    auto p = mstcn->params();
    out.insert(out.end(), p.begin(), p.end());
  }
  if (elem_head) elem_head->collect_params(out);
  if (pcs_head) pcs_head->collect_params(out);
  if (reg) reg->collect_params(out);
  return out;
}

namespace {

constexpr char kMagic[4] = {'I', 'R', 'I', 'S'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void read_pod(std::ifstream& in, T& v, const fs::path& path) {
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  require(in.good(), ErrorKind::Io, "truncated model file: " + path.string());
}

}  // namespace

void save_model(const ModelParams& model, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.is_open(), ErrorKind::Io, "cannot open for writing: " + path.string());
  out.write(kMagic, 4);
  write_pod(out, kFormatVersion);
  write_pod(out, static_cast<std::uint32_t>(model.variant));
  const i64 geom[7] = {model.geom.embed_dim,  model.geom.channels,
                       model.geom.stages,     model.geom.layers,
                       model.geom.hidden,     model.geom.max_segment_windows,
                       model.geom.max_elements};
  out.write(reinterpret_cast<const char*>(geom), sizeof geom);
  auto& mutable_model = const_cast<ModelParams&>(model);
  const auto params = mutable_model.params();
  write_pod(out, static_cast<std::uint64_t>(params.size()));
  for (const nn::ParamTensor* p : params) {
    write_pod(out, static_cast<std::uint64_t>(p->shape.size()));
    for (i64 d : p->shape) write_pod(out, static_cast<std::uint64_t>(d));
    out.write(reinterpret_cast<const char*>(p->w.data()),
              static_cast<std::streamsize>(p->w.size() * sizeof(double)));
  }
  require(out.good(), ErrorKind::Io, "write failed: " + path.string());
}

ModelParams load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.is_open(), ErrorKind::Validation, "cannot open model file: " + path.string());
  char magic[4];
  in.read(magic, 4);
  require(in.good() && std::memcmp(magic, kMagic, 4) == 0, ErrorKind::Validation,
          "not a model file (bad magic): " + path.string());
  std::uint32_t version = 0, variant_tag = 0;
  read_pod(in, version, path);
  require(version == kFormatVersion, ErrorKind::Validation,
          "unsupported model format version " + std::to_string(version));
  read_pod(in, variant_tag, path);
  require(variant_tag < kNumVariants, ErrorKind::Validation, "bad variant tag in model file");
  i64 geom[7];
  in.read(reinterpret_cast<char*>(geom), sizeof geom);
  require(in.good(), ErrorKind::Io, "truncated model file: " + path.string());
  ModelGeometry g;
  g.embed_dim = geom[0];
  g.channels = geom[1];
  g.stages = geom[2];
  g.layers = geom[3];
  g.hidden = geom[4];
  g.max_segment_windows = geom[5];
  g.max_elements = geom[6];

  ModelParams model = ModelParams::build(static_cast<ModelVariant>(variant_tag), g, 0);
  const auto params = model.params();
  std::uint64_t n_tensors = 0;
  read_pod(in, n_tensors, path);
  require(n_tensors == params.size(), ErrorKind::Validation,
          "model file tensor count does not match the declared variant");
  for (nn::ParamTensor* p : params) {
    std::uint64_t rank = 0;
    read_pod(in, rank, path);
    require(rank == p->shape.size(), ErrorKind::Validation,
            "model file tensor rank mismatch for " + p->name);
    for (i64 d : p->shape) {
      std::uint64_t dim = 0;
      read_pod(in, dim, path);
      require(dim == static_cast<std::uint64_t>(d), ErrorKind::Validation,
              "model file tensor shape mismatch for " + p->name);
    }
    in.read(reinterpret_cast<char*>(p->w.data()),
            static_cast<std::streamsize>(p->w.size() * sizeof(double)));
    require(in.good(), ErrorKind::Io, "truncated model file: " + path.string());
  }
  return model;
}

namespace {

// Per-type temporal matching of detected runs to planned elements: the k-th
// planned element of a type gets the k-th detected run of that type.
struct ElementAssignment {
  std::vector<std::optional<Segment>> segments;  // sheet element order
  bool any_missing = false;
};

ElementAssignment assign_runs(const ScoreSheet& sheet, const SegmentLabeling& labels) {
  std::array<std::vector<Segment>, kNumActions> runs_by_type;
  for (const Segment& s : labels.segments())
    if (s.action != ActionType::Transition)
      runs_by_type[static_cast<size_t>(s.action)].push_back(s);

  ElementAssignment out;
  std::array<size_t, kNumActions> next{};
  for (const PlannedElement& e : sheet.elements) {
    auto& runs = runs_by_type[static_cast<size_t>(e.action)];
    auto& cursor = next[static_cast<size_t>(e.action)];
    if (cursor < runs.size()) {
      out.segments.emplace_back(runs[cursor++]);
    } else {
      out.segments.emplace_back(std::nullopt);
      out.any_missing = true;
    }
  }
  return out;
}

struct RecordBatchState {
  const PerformanceRecord* record = nullptr;
  Matrix valid_embeddings;                  // T_valid x D
  std::vector<int> label_ints;              // seg variants
  nn::Mask mask;                            // all-valid
  std::vector<SegmentBlock> teacher_blocks; // seg variants, sheet order
  TrainingTargets targets;
  TruthTotals totals;
};

double sq(double x) { return x * x; }

}  // namespace

std::pair<ModelParams, TrainingLog> train(const std::vector<PerformanceRecord>& records,
                                          const TrainConfig& config,
                                          const EpochCallback& on_epoch) {
  require(!records.empty(), ErrorKind::Validation, "training set is empty");
  require(config.learning_rate > 0 && config.batch_size > 0 && config.max_epochs > 0,
          ErrorKind::Validation, "train config: hyperparameters must be positive");
  require(config.w_segmentation >= 0 && config.w_element >= 0 && config.w_pcs >= 0 &&
              config.w_score >= 0,
          ErrorKind::Validation, "train config: loss weights must be >= 0");

  ModelGeometry geom = config.geometry;
  geom.embed_dim = records.front().embeddings.dim();
  if (geom.max_elements == 0) {
    for (const PerformanceRecord& r : records)
      geom.max_elements =
          std::max(geom.max_elements, static_cast<i64>(r.sheet.elements.size()));
  }

  const ModelVariant variant = config.variant;
  const bool with_seg = variant_has_segmentation(variant);
  const bool with_pcs =
      variant != ModelVariant::ScoreOnly && variant != ModelVariant::TesPcs;
  const bool with_reg_elements =
      variant == ModelVariant::Subscores || variant == ModelVariant::DeltaSubscores;

  Rng root(config.seed);
  ModelParams model = ModelParams::build(variant, geom, root.fork(0).next_u64());
  const std::vector<nn::ParamTensor*> params = model.params();
  nn::AdamConfig adam_cfg;
  adam_cfg.lr = config.learning_rate;
  nn::AdamState adam(params, adam_cfg);

  // per-record constants: slices, targets, teacher-forced blocks
  std::vector<RecordBatchState> states;
  states.reserve(records.size());
  for (const PerformanceRecord& r : records) {
    validate_record(r);
    RecordBatchState st;
    st.record = &r;
    st.valid_embeddings = r.embeddings.valid_view();
    st.targets = training_targets(r);
    st.totals = truth_totals(r.sheet);
    require(static_cast<i64>(r.sheet.elements.size()) <= geom.max_elements,
            ErrorKind::Validation,
            r.sheet.performance_id + ": more elements than the model supports");
    if (with_seg) {
      require(r.truth_labels.has_value(), ErrorKind::Validation,
              r.sheet.performance_id + ": segmentation training needs truth labels");
      st.label_ints = labels_as_ints(*r.truth_labels);
      st.mask.assign(st.label_ints.size(), 1);
      st.teacher_blocks =
          pad_and_slice(r.embeddings, r.truth_labels->segments(), geom.max_segment_windows);
      require(st.teacher_blocks.size() == r.sheet.elements.size(), ErrorKind::Validation,
              r.sheet.performance_id + ": teacher block count mismatch");
    }
    states.push_back(std::move(st));
  }

  Rng shuffle_rng = root.fork(1);
  std::vector<i64> order(records.size());
  std::iota(order.begin(), order.end(), i64{0});

  TrainingLog log;
  double best_total = std::numeric_limits<double>::infinity();
  i64 stall = 0;

  for (i64 epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    TrainingLog::Epoch stats;
    stats.epoch = epoch;

    for (size_t batch_start = 0; batch_start < order.size();
         batch_start += static_cast<size_t>(config.batch_size)) {
      const size_t batch_end =
          std::min(order.size(), batch_start + static_cast<size_t>(config.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(batch_end - batch_start);
      for (nn::ParamTensor* p : params) p->zero_grad();
      double batch_loss = 0.0;

      for (size_t bi = batch_start; bi < batch_end; ++bi) {
        RecordBatchState& st = states[static_cast<size_t>(order[bi])];
        const i64 n_elems = static_cast<i64>(st.record->sheet.elements.size());
        double rec_loss = 0.0;

        if (with_seg) {
          const std::vector<Matrix> logits = model.mstcn->forward(st.valid_embeddings);
          std::vector<Matrix> glogits;
          const SegLossParts seg =
              segmentation_loss(logits, st.label_ints, st.mask, config.lambda_smooth,
                                config.epsilon_smooth, &glogits);
          for (Matrix& g : glogits)
            for (double& x : g.v) x *= config.w_segmentation * inv_batch;
          model.mstcn->backward(glogits);
          stats.seg += seg.total;
          rec_loss += config.w_segmentation * seg.total;

          // teacher forcing: per-element head on ground-truth segments
          double elem_loss = 0.0;
          for (i64 e = 0; e < n_elems; ++e) {
            const SegmentBlock& block = st.teacher_blocks[static_cast<size_t>(e)];
            const double target =
                variant == kFullVariant
                    ? st.targets.goe[static_cast<size_t>(e)]
                    : st.record->sheet.elements[static_cast<size_t>(e)].base_value +
                          st.targets.goe[static_cast<size_t>(e)];
            const double pred = model.elem_head->forward(block);
            elem_loss += sq(pred - target);
            const double seed = 2.0 * (pred - target) / static_cast<double>(n_elems);
            model.elem_head->backward(config.w_element * seed * inv_batch);
          }
          elem_loss /= static_cast<double>(n_elems);
          stats.element += elem_loss;
          rec_loss += config.w_element * elem_loss;
        }

        if (with_reg_elements) {
          const std::vector<double> preds = model.reg->forward(st.record->embeddings);
          double elem_loss = 0.0;
          std::vector<double> seeds(preds.size(), 0.0);
          for (i64 e = 0; e < n_elems; ++e) {
            const double target =
                variant == ModelVariant::DeltaSubscores
                    ? st.targets.goe[static_cast<size_t>(e)]
                    : st.record->sheet.elements[static_cast<size_t>(e)].base_value +
                          st.targets.goe[static_cast<size_t>(e)];
            const double d = preds[static_cast<size_t>(e)] - target;
            elem_loss += sq(d);
            seeds[static_cast<size_t>(e)] =
                config.w_element * 2.0 * d / static_cast<double>(n_elems) * inv_batch;
          }
          elem_loss /= static_cast<double>(n_elems);
          model.reg->backward(seeds);
          stats.element += elem_loss;
          rec_loss += config.w_element * elem_loss;
        }

        if (with_pcs) {
          const auto preds = model.pcs_head->forward(st.record->embeddings);
          double pcs_loss = 0.0;
          std::array<double, kNumPcsComponents> seeds{};
          for (size_t c = 0; c < kNumPcsComponents; ++c) {
            const double d = preds[c] - st.targets.pcs[c];
            pcs_loss += sq(d);
            seeds[c] = config.w_pcs * 2.0 * d / kNumPcsComponents * inv_batch;
          }
          pcs_loss /= kNumPcsComponents;
          model.pcs_head->backward(seeds);
          stats.pcs += pcs_loss;
          rec_loss += config.w_pcs * pcs_loss;
        }

        if (variant == ModelVariant::ScoreOnly || variant == ModelVariant::TesPcs) {
          const std::vector<double> preds = model.reg->forward(st.record->embeddings);
          std::vector<double> seeds(preds.size(), 0.0);
          double score_loss = 0.0;
          if (variant == ModelVariant::ScoreOnly) {
            const double d = preds[0] - st.totals.total;
            score_loss = sq(d);
            seeds[0] = config.w_score * 2.0 * d * inv_batch;
          } else {
            const double dt = preds[0] - st.totals.tes;
            const double dp = preds[1] - st.totals.pcs;
            score_loss = (sq(dt) + sq(dp)) / 2.0;
            seeds[0] = config.w_score * dt * inv_batch;
            seeds[1] = config.w_score * dp * inv_batch;
          }
          model.reg->backward(seeds);
          stats.score += score_loss;
          rec_loss += config.w_score * score_loss;
        }

        batch_loss += rec_loss;
      }

      require(std::isfinite(batch_loss), ErrorKind::Divergence,
              "training diverged: non-finite loss in epoch " + std::to_string(epoch));
      adam.step(params);
    }

    const double n = static_cast<double>(records.size());
    stats.seg /= n;
    stats.element /= n;
    stats.pcs /= n;
    stats.score /= n;
    stats.total = config.w_segmentation * stats.seg + config.w_element * stats.element +
                  config.w_pcs * stats.pcs + config.w_score * stats.score;
    log.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);

    if (stats.total < best_total - 1e-6) {
      best_total = stats.total;
      stall = 0;
    } else if (++stall >= 20) {
      log.early_stopped = true;
      break;
    }
  }

  return {std::move(model), std::move(log)};
}

Judgment predict_with_labels(ModelParams& model, const EmbeddingSequence& embeddings,
                             const ScoreSheet& sheet, const SegmentLabeling& labels) {
  require(model.variant == kFullVariant, ErrorKind::Validation,
          "judgment prediction requires the full variant, model is " +
              variant_name(model.variant));
  require(static_cast<i64>(sheet.elements.size()) > 0, ErrorKind::Validation,
          "sheet has no elements");

  const ElementAssignment assigned = assign_runs(sheet, labels);
  std::vector<double> goe(sheet.elements.size(), 0.0);
  std::vector<bool> missing(sheet.elements.size(), false);
  for (size_t e = 0; e < sheet.elements.size(); ++e) {
    if (!assigned.segments[e]) {
      missing[e] = true;  // GOE stays at the clamp midpoint 0.0
      continue;
    }
    const auto blocks =
        pad_and_slice(embeddings, {*assigned.segments[e]}, model.geom.max_segment_windows);
    goe[e] = model.elem_head->forward(blocks.front());
  }
  if (assigned.any_missing)
    diag::warn(sheet.performance_id + ": planned element(s) not found in the segmentation");

  const auto pcs = model.pcs_head->forward(embeddings);
  return compose_judgment(sheet, goe, pcs, labels.segments(), missing);
}

Judgment predict(ModelParams& model, const EmbeddingSequence& embeddings,
                 const ScoreSheet& sheet) {
  require(model.variant == kFullVariant, ErrorKind::Validation,
          "judgment prediction requires the full variant, model is " +
              variant_name(model.variant));
  const std::vector<Matrix> logits = mstcn_forward(embeddings, *model.mstcn);
  const SegmentLabeling decoded = decode_labels(logits.back(), embeddings.valid_count);
  const CorrectionResult corrected = correct_segments(decoded, element_counts(sheet));
  return predict_with_labels(model, embeddings, sheet, corrected.labels);
}

ScorePrediction predict_scores(ModelParams& model, const EmbeddingSequence& embeddings,
                               const ScoreSheet& sheet) {
  ScorePrediction out;
  const i64 n_elems = static_cast<i64>(sheet.elements.size());
  switch (model.variant) {
    case ModelVariant::ScoreOnly: {
      const double y = model.reg->forward(embeddings)[0];
      out.tes = out.pcs_total = out.total = y;
      return out;
    }
    case ModelVariant::TesPcs: {
      const std::vector<double> y = model.reg->forward(embeddings);
      out.tes = y[0];
      out.pcs_total = y[1];
      out.total = y[0] + y[1];
      return out;
    }
    case ModelVariant::Subscores:
    case ModelVariant::DeltaSubscores: {
      require(n_elems <= model.geom.max_elements, ErrorKind::Validation,
              sheet.performance_id + ": more elements than the model supports");
      const std::vector<double> y = model.reg->forward(embeddings);
      double tes = 0.0;
      for (i64 e = 0; e < n_elems; ++e) {
        tes += y[static_cast<size_t>(e)];
        if (model.variant == ModelVariant::DeltaSubscores)
          tes += sheet.elements[static_cast<size_t>(e)].base_value;
      }
      const auto pcs = model.pcs_head->forward(embeddings);
      double pcs_sum = 0.0;
      for (double c : pcs) pcs_sum += c;
      out.tes = tes;
      out.pcs_total = sheet.pcs_factor * pcs_sum;
      out.total = out.tes + out.pcs_total;
      return out;
    }
    case ModelVariant::SubscoresWithSegments: {
      const std::vector<Matrix> logits = mstcn_forward(embeddings, *model.mstcn);
      const SegmentLabeling decoded = decode_labels(logits.back(), embeddings.valid_count);
      const CorrectionResult corrected = correct_segments(decoded, element_counts(sheet));
      const ElementAssignment assigned = assign_runs(sheet, corrected.labels);
      double tes = 0.0;
      for (size_t e = 0; e < sheet.elements.size(); ++e) {
        if (!assigned.segments[e]) {
          // undetected element: fall back to its base value (neutral GOE)
          tes += sheet.elements[e].base_value;
          out.deficit = true;
          continue;
        }
        const auto blocks = pad_and_slice(embeddings, {*assigned.segments[e]},
                                          model.geom.max_segment_windows);
        tes += model.elem_head->forward(blocks.front());
      }
      const auto pcs = model.pcs_head->forward(embeddings);
      double pcs_sum = 0.0;
      for (double c : pcs) pcs_sum += c;
      out.tes = tes;
      out.pcs_total = sheet.pcs_factor * pcs_sum;
      out.total = out.tes + out.pcs_total;
      out.labels = corrected.labels;
      return out;
    }
    case ModelVariant::DeltaSubscoresWithSegments: {
      const Judgment j = predict(model, embeddings, sheet);
      out.tes = j.tes_total;
      out.pcs_total = j.pcs_total;
      out.total = j.total_score;
      out.labels = SegmentLabeling::from_segments(j.segments);
      for (const auto& e : j.elements) out.deficit = out.deficit || e.missing;
      return out;
    }
  }
  fail(ErrorKind::Validation, "unknown variant");
}

EvaluationReport evaluate(ModelParams& model, const std::vector<PerformanceRecord>& records) {
  require(records.size() >= 3, ErrorKind::Validation,
          "evaluation needs at least 3 records (correlation undefined), got " +
              std::to_string(records.size()));
  const i64 n = static_cast<i64>(records.size());

  std::vector<double> pred_tes, pred_pcs, pred_total;
  std::vector<double> true_tes, true_pcs, true_total;
  std::vector<double> dices, ious, tes_abs_err;
  EvaluationReport report;
  report.n_records = n;

  for (const PerformanceRecord& r : records) {
    const TruthTotals truth = truth_totals(r.sheet);
    const ScorePrediction pred = predict_scores(model, r.embeddings, r.sheet);
    pred_tes.push_back(pred.tes);
    pred_pcs.push_back(pred.pcs_total);
    pred_total.push_back(pred.total);
    true_tes.push_back(truth.tes);
    true_pcs.push_back(truth.pcs);
    true_total.push_back(truth.total);
    if (pred.deficit) ++report.deficit_records;
    if (pred.labels && r.truth_labels) {
      dices.push_back(dice(*pred.labels, *r.truth_labels));
      ious.push_back(iou(*pred.labels, *r.truth_labels));
      tes_abs_err.push_back(std::fabs(pred.tes - truth.tes));
    }
  }

  report.spearman_tes = metrics::spearman(pred_tes, true_tes);
  report.spearman_pcs = metrics::spearman(pred_pcs, true_pcs);
  report.spearman_total = metrics::spearman(pred_total, true_total);
  report.pearson_tes = metrics::pearson(pred_tes, true_tes);
  report.pearson_pcs = metrics::pearson(pred_pcs, true_pcs);
  report.pearson_total = metrics::pearson(pred_total, true_total);

  if (!dices.empty()) {
    report.mean_dice = std::accumulate(dices.begin(), dices.end(), 0.0) /
                       static_cast<double>(dices.size());
    report.mean_iou =
        std::accumulate(ious.begin(), ious.end(), 0.0) / static_cast<double>(ious.size());

    // tertiles by IoU rank; group sizes differ by at most 1
    const i64 m = static_cast<i64>(ious.size());
    std::vector<i64> idx(static_cast<size_t>(m));
    std::iota(idx.begin(), idx.end(), i64{0});
    std::stable_sort(idx.begin(), idx.end(), [&](i64 a, i64 b) {
      return ious[static_cast<size_t>(a)] < ious[static_cast<size_t>(b)];
    });
    const i64 base = m / 3, rem = m % 3;
    const i64 sizes[3] = {base + (rem > 0 ? 1 : 0), base + (rem > 1 ? 1 : 0), base};
    std::array<TertileStat, 3> tert{};
    size_t cursor = 0;
    for (int g = 0; g < 3; ++g) {
      std::vector<double> errs;
      for (i64 k = 0; k < sizes[g]; ++k)
        errs.push_back(tes_abs_err[static_cast<size_t>(idx[cursor++])]);
      TertileStat& ts = tert[static_cast<size_t>(g)];
      ts.count = static_cast<i64>(errs.size());
      if (!errs.empty()) {
        ts.mean_abs_tes_error = std::accumulate(errs.begin(), errs.end(), 0.0) /
                                static_cast<double>(errs.size());
        if (errs.size() > 1) {
          double ss = 0.0;
          for (double e : errs) ss += sq(e - ts.mean_abs_tes_error);
          ts.standard_error = std::sqrt(ss / static_cast<double>(errs.size() - 1)) /
                              std::sqrt(static_cast<double>(errs.size()));
        }
      }
    }
    report.tertiles = tert;
  }
  return report;
}

std::vector<AblationRow> run_ablation(const std::vector<PerformanceRecord>& train_records,
                                      const std::vector<PerformanceRecord>& test_records,
                                      const TrainConfig& base_config) {
  std::vector<AblationRow> rows;
  for (int v = 0; v < kNumVariants; ++v) {
    TrainConfig cfg = base_config;
    cfg.variant = static_cast<ModelVariant>(v);
    auto [model, log] = train(train_records, cfg);
    rows.push_back({cfg.variant, evaluate(model, test_records)});
  }
  return rows;
}

}  // namespace iris
