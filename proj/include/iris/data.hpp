#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "iris/rng.hpp"
#include "iris/rubric.hpp"
#include "iris/tensor.hpp"

namespace iris {

// T x D per-window feature vectors. Rows at index >= valid_count are padding
// and must be exactly zero. One window covers 0.534 s (16 frames at
// 29.97 fps).
struct EmbeddingSequence {
  Matrix windows;
  i64 valid_count = 0;

  static constexpr double kWindowSeconds = 0.534;
  static constexpr i64 kMaxWindows = 356;

  i64 dim() const { return windows.cols; }
  Matrix valid_view() const { return windows.top_rows(valid_count); }
  EmbeddingSequence padded_to(i64 total_windows) const;
  void validate(i64 max_windows = kMaxWindows) const;
};

// Per-window labels over the valid region plus the derived maximal runs.
struct SegmentLabeling {
  std::vector<ActionType> labels;

  i64 length() const { return static_cast<i64>(labels.size()); }
  std::vector<Segment> segments() const;
  static SegmentLabeling from_segments(const std::vector<Segment>& segs);

  bool operator==(const SegmentLabeling&) const = default;
};

struct PerformanceRecord {
  ScoreSheet sheet;
  EmbeddingSequence embeddings;
  std::optional<SegmentLabeling> truth_labels;
};

// Checks the cross-field invariants: label length equals the valid window
// count, non-Transition run counts and their order match the sheet's plan.
void validate_record(const PerformanceRecord& record);

// Dataset directory layout: <id>.sheet.json, <id>.emb.f64, <id>.labels.txt.
// The embedding file holds T and D as little-endian 64-bit counts followed
// by row-major doubles.
void save_record(const std::filesystem::path& dir, const std::string& id,
                 const PerformanceRecord& record);
PerformanceRecord load_record(const std::filesystem::path& dir, const std::string& id,
                              bool require_labels = true);
std::vector<PerformanceRecord> load_dataset(const std::filesystem::path& dir);

// Seeded disjoint partition into train_count / rest.
std::pair<std::vector<PerformanceRecord>, std::vector<PerformanceRecord>> split(
    std::vector<PerformanceRecord> records, i64 train_count, std::uint64_t seed);

struct SyntheticConfig {
  i64 n_records = 150;
  i64 dim = 32;
  i64 t_min = 80;
  i64 t_max = 120;
  i64 jumps_min = 2, jumps_max = 4;
  i64 spins_min = 1, spins_max = 3;
  i64 steps_min = 1, steps_max = 2;
  double noise = 0.25;

  i64 max_elements() const { return jumps_max + spins_max + steps_max; }
};

// Desk-scale stand-in for the video corpus. Each record gets a random
// element plan, labels laying the elements out in plan order between
// Transition runs, embeddings built from per-class signature vectors plus a
// per-element quality offset (quality q in [-1,1] maps to GOE = 5q) and a
// whole-performance quality direction, and PCS truths that are smooth
// functions of the mean quality plus noise. Sheet totals are composed
// exactly from the synthetic truths.
std::vector<PerformanceRecord> generate_synthetic(const SyntheticConfig& config,
                                                  std::uint64_t seed);

// One fixed-length per-element slice of the embedding sequence.
struct SegmentBlock {
  Matrix data;      // max_segment_windows x D, tail zero-padded
  i64 valid = 0;    // rows actually taken from the sequence
  ActionType action = ActionType::Jump;
};

// One block per non-Transition segment, in the order given. Segments longer
// than max_segment_windows are centre-cropped, shorter ones zero-padded at
// the tail.
std::vector<SegmentBlock> pad_and_slice(const EmbeddingSequence& embeddings,
                                        const std::vector<Segment>& segments,
                                        i64 max_segment_windows);

}  // namespace iris
