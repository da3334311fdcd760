#include "iris/data.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <set>

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are unsupported");

namespace iris {

namespace fs = std::filesystem;

EmbeddingSequence EmbeddingSequence::padded_to(i64 total_windows) const {
  require(total_windows >= valid_count, ErrorKind::Dimension,
          "padded_to: target shorter than valid region");
  EmbeddingSequence out;
  out.valid_count = valid_count;
  out.windows = Matrix(total_windows, windows.cols);
  std::copy(windows.v.begin(), windows.v.begin() + static_cast<size_t>(valid_count * windows.cols),
            out.windows.v.begin());
  return out;
}

void EmbeddingSequence::validate(i64 max_windows) const {
  require(windows.rows > 0 && windows.cols > 0, ErrorKind::Validation,
          "embedding sequence is empty");
  require(valid_count > 0 && valid_count <= windows.rows, ErrorKind::Validation,
          "embedding valid_count out of range");
  require(windows.rows <= max_windows, ErrorKind::Validation,
          "embedding sequence has " + std::to_string(windows.rows) + " windows, maximum is " +
              std::to_string(max_windows));
  for (i64 t = valid_count; t < windows.rows; ++t)
    for (i64 c = 0; c < windows.cols; ++c)
      require(windows.at(t, c) == 0.0, ErrorKind::Validation,
              "padded window " + std::to_string(t) + " is not zero");
  require(windows.all_finite(), ErrorKind::Validation, "embedding contains non-finite values");
}

std::vector<Segment> SegmentLabeling::segments() const {
  std::vector<Segment> out;
  const i64 n = length();
  i64 start = 0;
  for (i64 t = 1; t <= n; ++t) {
    if (t == n || labels[static_cast<size_t>(t)] != labels[static_cast<size_t>(start)]) {
      out.push_back({labels[static_cast<size_t>(start)], start, t});
      start = t;
    }
  }
  return out;
}

SegmentLabeling SegmentLabeling::from_segments(const std::vector<Segment>& segs) {
  require(!segs.empty(), ErrorKind::Validation, "segment list is empty");
  SegmentLabeling out;
  i64 expect = 0;
  for (size_t i = 0; i < segs.size(); ++i) {
    const Segment& s = segs[i];
    require(s.start == expect && s.end > s.start, ErrorKind::Validation,
            "segments must partition [0, T) contiguously");
    if (i > 0)
      require(s.action != segs[i - 1].action, ErrorKind::Validation,
              "adjacent segments must have different actions");
    for (i64 t = s.start; t < s.end; ++t) out.labels.push_back(s.action);
    expect = s.end;
  }
  return out;
}

void validate_record(const PerformanceRecord& record) {
  record.embeddings.validate();
  const std::string& id = record.sheet.performance_id;
  if (!record.truth_labels) return;
  const SegmentLabeling& lab = *record.truth_labels;
  require(lab.length() == record.embeddings.valid_count, ErrorKind::Validation,
          id + ": labels cover " + std::to_string(lab.length()) + " windows but embeddings have " +
              std::to_string(record.embeddings.valid_count) + " valid windows");

  // non-Transition runs must match the sheet's elements in count and order
  std::vector<ActionType> run_actions;
  for (const Segment& s : lab.segments())
    if (s.action != ActionType::Transition) run_actions.push_back(s.action);
  require(run_actions.size() == record.sheet.elements.size(), ErrorKind::Validation,
          id + ": labels contain " + std::to_string(run_actions.size()) +
              " element runs but the sheet plans " + std::to_string(record.sheet.elements.size()));
  for (size_t i = 0; i < run_actions.size(); ++i)
    require(run_actions[i] == record.sheet.elements[i].action, ErrorKind::Validation,
            id + ": element run " + std::to_string(i + 1) + " is " +
                std::string(action_name(run_actions[i])) + " but the sheet plans " +
                std::string(action_name(record.sheet.elements[i].action)));
}

namespace {

void write_exact(std::ofstream& out, const void* data, size_t bytes, const fs::path& path) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  require(out.good(), ErrorKind::Io, "write failed: " + path.string());
}

std::uint64_t read_u64(std::ifstream& in, const fs::path& path) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  require(in.good(), ErrorKind::Io, "truncated file: " + path.string());
  return v;
}

}  // namespace

void save_record(const fs::path& dir, const std::string& id, const PerformanceRecord& record) {
  {
    const fs::path p = dir / (id + ".sheet.json");
    std::ofstream out(p, std::ios::binary);
    require(out.is_open(), ErrorKind::Io, "cannot open for writing: " + p.string());
    const std::string doc = serialize_score_sheet(record.sheet);
    write_exact(out, doc.data(), doc.size(), p);
  }
  {
    const fs::path p = dir / (id + ".emb.f64");
    std::ofstream out(p, std::ios::binary);
    require(out.is_open(), ErrorKind::Io, "cannot open for writing: " + p.string());
    const std::uint64_t t = static_cast<std::uint64_t>(record.embeddings.valid_count);
    const std::uint64_t d = static_cast<std::uint64_t>(record.embeddings.dim());
    write_exact(out, &t, sizeof t, p);
    write_exact(out, &d, sizeof d, p);
    write_exact(out, record.embeddings.windows.v.data(), sizeof(double) * t * d, p);
  }
  if (record.truth_labels) {
    const fs::path p = dir / (id + ".labels.txt");
    std::ofstream out(p, std::ios::binary);
    require(out.is_open(), ErrorKind::Io, "cannot open for writing: " + p.string());
    std::string body;
    for (ActionType a : record.truth_labels->labels) {
      body += action_name(a);
      body += '\n';
    }
    write_exact(out, body.data(), body.size(), p);
  }
}

PerformanceRecord load_record(const fs::path& dir, const std::string& id, bool require_labels) {
  PerformanceRecord record;
  const fs::path sheet_path = dir / (id + ".sheet.json");
  {
    std::ifstream in(sheet_path, std::ios::binary);
    require(in.is_open(), ErrorKind::Validation, "missing file: " + sheet_path.string());
    std::string doc((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    record.sheet = parse_score_sheet(doc);
  }
  const fs::path emb_path = dir / (id + ".emb.f64");
  {
    std::ifstream in(emb_path, std::ios::binary);
    require(in.is_open(), ErrorKind::Validation, "missing file: " + emb_path.string());
    const std::uint64_t t = read_u64(in, emb_path);
    const std::uint64_t d = read_u64(in, emb_path);
    require(t > 0 && d > 0 && t <= static_cast<std::uint64_t>(EmbeddingSequence::kMaxWindows),
            ErrorKind::Validation, "bad embedding header in " + emb_path.string());
    record.embeddings.windows = Matrix(static_cast<i64>(t), static_cast<i64>(d));
    record.embeddings.valid_count = static_cast<i64>(t);
    in.read(reinterpret_cast<char*>(record.embeddings.windows.v.data()),
            static_cast<std::streamsize>(sizeof(double) * t * d));
    require(in.good(), ErrorKind::Io, "truncated file: " + emb_path.string());
  }
  const fs::path label_path = dir / (id + ".labels.txt");
  if (fs::exists(label_path)) {
    std::ifstream in(label_path, std::ios::binary);
    require(in.is_open(), ErrorKind::Io, "cannot open: " + label_path.string());
    SegmentLabeling lab;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto a = action_from_name(line);
      require(a.has_value(), ErrorKind::Validation,
              label_path.string() + ": unknown action '" + line + "'");
      lab.labels.push_back(*a);
    }
    record.truth_labels = std::move(lab);
  } else if (require_labels) {
    fail(ErrorKind::Validation, "missing file: " + label_path.string());
  }
  validate_record(record);
  return record;
}

std::vector<PerformanceRecord> load_dataset(const fs::path& dir) {
  require(fs::exists(dir) && fs::is_directory(dir), ErrorKind::Validation,
          "dataset directory does not exist: " + dir.string());
  std::vector<std::string> ids;
  const std::string suffix = ".sheet.json";
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix))
      ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) {
    diag::warn("dataset directory " + dir.string() + " contains no records");
    return {};
  }
  std::vector<PerformanceRecord> records;
  records.reserve(ids.size());
  for (const std::string& id : ids) records.push_back(load_record(dir, id));
  const i64 d = records.front().embeddings.dim();
  for (const PerformanceRecord& r : records)
    require(r.embeddings.dim() == d, ErrorKind::Validation,
            r.sheet.performance_id + ": embedding dimension " + std::to_string(r.embeddings.dim()) +
                " differs from dataset dimension " + std::to_string(d));
  return records;
}

std::pair<std::vector<PerformanceRecord>, std::vector<PerformanceRecord>> split(
    std::vector<PerformanceRecord> records, i64 train_count, std::uint64_t seed) {
  require(train_count > 0 && train_count < static_cast<i64>(records.size()),
          ErrorKind::Validation,
          "split: train_count " + std::to_string(train_count) + " must be in (0, " +
              std::to_string(records.size()) + ")");
  std::vector<i64> order(records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<i64>(i);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<PerformanceRecord> train, test;
  for (size_t i = 0; i < order.size(); ++i) {
    auto& dst = (static_cast<i64>(i) < train_count) ? train : test;
    dst.push_back(std::move(records[static_cast<size_t>(order[i])]));
  }
  return {std::move(train), std::move(test)};
}

namespace {

struct SyntheticDirections {
  std::vector<Matrix> rows;  // signatures (4), quality dirs (indexed by action), perf dir
  Matrix signatures;         // 4 x D
  Matrix quality;            // 4 x D (Transition row unused)
  std::vector<double> perf;  // D
  std::array<double, kNumPcsComponents> pcs_gain{};
};

SyntheticDirections draw_directions(i64 dim, Rng& rng) {
  SyntheticDirections d;
  d.signatures = Matrix(kNumActions, dim);
  d.quality = Matrix(kNumActions, dim);
  for (i64 a = 0; a < kNumActions; ++a)
    for (i64 c = 0; c < dim; ++c) d.signatures.at(a, c) = rng.normal();
  for (i64 a = 1; a < kNumActions; ++a)
    for (i64 c = 0; c < dim; ++c) d.quality.at(a, c) = rng.normal();
  d.perf.resize(static_cast<size_t>(dim));
  for (double& x : d.perf) x = rng.normal();
  for (double& g : d.pcs_gain) g = rng.uniform(0.8, 1.2);
  return d;
}

struct ElementSpec {
  ActionType action;
  const char* const* names;
  i64 n_names;
  double base_lo, base_hi;
  i64 dur_lo, dur_hi;
};

const char* kJumpNames[] = {"2A", "3T", "3S", "3Lo", "3F", "3Lz", "3T+3T", "3Lz+2T"};
const char* kSpinNames[] = {"CCoSp3", "FSSp4", "CSSp3", "LSp4"};
const char* kStepNames[] = {"StSq3", "StSq4", "CiSt3"};

const ElementSpec kSpecs[] = {
    {ActionType::Jump, kJumpNames, 8, 1.0, 11.0, 4, 7},
    {ActionType::Spin, kSpinNames, 4, 1.5, 4.0, 8, 14},
    {ActionType::StepSequence, kStepNames, 3, 1.5, 4.5, 10, 18},
};

constexpr i64 kTransMin = 3;
constexpr i64 kTransMax = 16;

const std::array<std::string, kNumPcsComponents> kComponentNames = {
    "Skating Skills", "Transitions", "Performance", "Choreography", "Interpretation"};

}  // namespace

std::vector<PerformanceRecord> generate_synthetic(const SyntheticConfig& cfg,
                                                  std::uint64_t seed) {
  require(cfg.dim >= 8, ErrorKind::Validation, "synthetic config: dim must be >= 8");
  require(cfg.n_records > 0, ErrorKind::Validation, "synthetic config: n_records must be positive");
  require(cfg.t_min > 0 && cfg.t_min <= cfg.t_max &&
              cfg.t_max <= EmbeddingSequence::kMaxWindows,
          ErrorKind::Validation, "synthetic config: bad T_valid range");
  require(cfg.jumps_min >= 0 && cfg.jumps_min <= cfg.jumps_max && cfg.spins_min >= 0 &&
              cfg.spins_min <= cfg.spins_max && cfg.steps_min >= 0 &&
              cfg.steps_min <= cfg.steps_max && cfg.jumps_min + cfg.spins_min + cfg.steps_min > 0,
          ErrorKind::Validation, "synthetic config: bad element count ranges");
  require(cfg.noise >= 0.0, ErrorKind::Validation, "synthetic config: noise must be >= 0");

  // every drawable plan must fit T_max at minimum durations
  const i64 max_elems = cfg.max_elements();
  const i64 tightest = cfg.jumps_max * kSpecs[0].dur_lo + cfg.spins_max * kSpecs[1].dur_lo +
                       cfg.steps_max * kSpecs[2].dur_lo + (max_elems + 1) * kTransMin;
  require(tightest <= cfg.t_max, ErrorKind::Validation,
          "synthetic config infeasible: a maximal plan needs at least " + std::to_string(tightest) +
              " windows but t_max is " + std::to_string(cfg.t_max));

  Rng root(seed);
  Rng dir_rng = root.fork(0);
  const SyntheticDirections dirs = draw_directions(cfg.dim, dir_rng);

  std::vector<PerformanceRecord> records;
  records.reserve(static_cast<size_t>(cfg.n_records));
  for (i64 idx = 0; idx < cfg.n_records; ++idx) {
    Rng rng = root.fork(1000 + static_cast<std::uint64_t>(idx));
    PerformanceRecord rec;
    char id[32];
    std::snprintf(id, sizeof id, "rec_%04lld", static_cast<long long>(idx));
    rec.sheet.performance_id = id;
    rec.sheet.pcs_factor = rng.uniform01() < 0.5 ? 1.0 : 0.8;
    rec.sheet.pcs_component_names = kComponentNames;

    // element plan: counts per type, then a shuffled order
    const i64 n_by_type[3] = {rng.uniform_int(cfg.jumps_min, cfg.jumps_max),
                              rng.uniform_int(cfg.spins_min, cfg.spins_max),
                              rng.uniform_int(cfg.steps_min, cfg.steps_max)};
    std::vector<int> order;
    for (int s = 0; s < 3; ++s)
      for (i64 k = 0; k < n_by_type[s]; ++k) order.push_back(s);
    rng.shuffle(order);

    struct PlannedRun {
      i64 duration;
      i64 dur_lo;
      double quality;  // q in [-1, 1]
    };
    std::vector<PlannedRun> runs;
    std::vector<double> qualities;
    int seq = 1;
    for (int s : order) {
      const ElementSpec& spec = kSpecs[s];
      PlannedElement pe;
      pe.seq = seq++;
      pe.name = spec.names[rng.uniform_int(0, spec.n_names - 1)];
      pe.action = spec.action;
      pe.base_value = std::round(rng.uniform(spec.base_lo, spec.base_hi) * 10.0) / 10.0;
      rec.sheet.elements.push_back(std::move(pe));
      const double q = rng.uniform(-1.0, 1.0);
      qualities.push_back(q);
      runs.push_back({rng.uniform_int(spec.dur_lo, spec.dur_hi), spec.dur_lo, q});
    }
    const i64 n_elems = static_cast<i64>(runs.size());
    const i64 gaps = n_elems + 1;

    // shrink element durations round-robin if the draw overshoots T_max
    i64 elem_total = 0;
    for (const PlannedRun& r : runs) elem_total += r.duration;
    while (elem_total + gaps * kTransMin > cfg.t_max) {
      bool shrunk = false;
      for (PlannedRun& r : runs) {
        if (elem_total + gaps * kTransMin <= cfg.t_max) break;
        if (r.duration > r.dur_lo) {
          --r.duration;
          --elem_total;
          shrunk = true;
        }
      }
      require(shrunk, ErrorKind::Validation, "synthetic config infeasible: plan cannot fit t_max");
    }
    const i64 t_low = std::max(cfg.t_min, elem_total + gaps * kTransMin);
    const i64 t_high = std::min(cfg.t_max, elem_total + gaps * kTransMax);
    require(t_low <= t_high, ErrorKind::Validation, "synthetic config infeasible: gap budget");
    const i64 t_valid = rng.uniform_int(t_low, t_high);
    std::vector<i64> gap(static_cast<size_t>(gaps), kTransMin);
    i64 spare = t_valid - elem_total - gaps * kTransMin;
    while (spare > 0) {
      const i64 g = rng.uniform_int(0, gaps - 1);
      if (gap[static_cast<size_t>(g)] < kTransMax) {
        gap[static_cast<size_t>(g)] += 1;
        --spare;
      }
    }

    // labels and embeddings
    double q_mean = 0.0;
    for (double q : qualities) q_mean += q;
    q_mean /= static_cast<double>(n_elems);

    SegmentLabeling lab;
    rec.embeddings.windows = Matrix(t_valid, cfg.dim);
    rec.embeddings.valid_count = t_valid;
    i64 t = 0;
    const auto emit = [&](ActionType a, double q, i64 len) {
      const i64 ai = static_cast<i64>(a);
      for (i64 w = 0; w < len; ++w, ++t) {
        lab.labels.push_back(a);
        double* row = rec.embeddings.windows.row(t);
        for (i64 c = 0; c < cfg.dim; ++c) {
          double x = dirs.signatures.at(ai, c) + q_mean * dirs.perf[static_cast<size_t>(c)];
          if (a != ActionType::Transition) x += q * dirs.quality.at(ai, c);
          row[c] = x + cfg.noise * rng.normal();
        }
      }
    };
    for (i64 e = 0; e < n_elems; ++e) {
      emit(ActionType::Transition, 0.0, gap[static_cast<size_t>(e)]);
      emit(rec.sheet.elements[static_cast<size_t>(e)].action, runs[static_cast<size_t>(e)].quality,
           runs[static_cast<size_t>(e)].duration);
    }
    emit(ActionType::Transition, 0.0, gap.back());
    rec.truth_labels = std::move(lab);

    // synthetic truths: GOE = 5q, PCS smooth in mean quality
    SheetTruth truth;
    for (double q : qualities) truth.goe.push_back(5.0 * q);
    for (size_t c = 0; c < kNumPcsComponents; ++c) {
      const double v = 5.0 + 3.0 * dirs.pcs_gain[c] * q_mean + cfg.noise * rng.normal();
      truth.pcs[c] = std::min(10.0, std::max(0.0, v));
    }
    rec.sheet.truth = std::move(truth);
    const TruthTotals totals = truth_totals(rec.sheet);
    rec.sheet.truth->tes_total = totals.tes;
    rec.sheet.truth->pcs_total = totals.pcs;
    rec.sheet.truth->total = totals.total;

    validate_record(rec);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<SegmentBlock> pad_and_slice(const EmbeddingSequence& embeddings,
                                        const std::vector<Segment>& segments,
                                        i64 max_segment_windows) {
  require(max_segment_windows > 0, ErrorKind::Validation, "max_segment_windows must be positive");
  std::vector<SegmentBlock> blocks;
  for (const Segment& s : segments) {
    if (s.action == ActionType::Transition) continue;
    require(s.start >= 0 && s.start < s.end && s.end <= embeddings.valid_count,
            ErrorKind::Validation,
            "segment [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                ") outside the valid region");
    SegmentBlock block;
    block.action = s.action;
    block.data = Matrix(max_segment_windows, embeddings.dim());
    const i64 len = s.end - s.start;
    // centre-crop over-long segments, zero-pad short ones at the tail
    const i64 take = std::min(len, max_segment_windows);
    const i64 from = s.start + (len - take) / 2;
    for (i64 r = 0; r < take; ++r)
      std::copy(embeddings.windows.row(from + r), embeddings.windows.row(from + r) + embeddings.dim(),
                block.data.row(r));
    block.valid = take;
    blocks.push_back(std::move(block));
  }
  return blocks;
}

}  // namespace iris
