#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iris/common.hpp"

namespace iris {

// Jump / Spin / StepSequence are the scored element classes; Transition is
// the filler between them.
enum class ActionType : int { Transition = 0, Jump = 1, Spin = 2, StepSequence = 3 };

inline constexpr int kNumActions = 4;
inline constexpr int kNumPcsComponents = 5;
inline constexpr double kGoeMin = -5.0;
inline constexpr double kGoeMax = 5.0;

std::string_view action_name(ActionType a);
std::optional<ActionType> action_from_name(std::string_view name);
char action_char(ActionType a);  // timeline letters T/J/S/Q

struct PlannedElement {
  int seq = 0;            // 1-based position on the sheet
  std::string name;       // free text, e.g. "3T+3T"
  ActionType action = ActionType::Jump;  // never Transition
  double base_value = 0.0;
};

struct SheetTruth {
  std::vector<double> goe;                     // one per element, in [-5, 5]
  std::array<double, kNumPcsComponents> pcs{}; // unfactored, 0-10 scale
  std::optional<double> tes_total;
  std::optional<double> pcs_total;
  std::optional<double> total;
};

struct ScoreSheet {
  std::string performance_id;
  double pcs_factor = 1.0;  // 1.00 or 0.80
  std::vector<PlannedElement> elements;
  std::array<std::string, kNumPcsComponents> pcs_component_names;
  std::optional<SheetTruth> truth;
};

struct Segment {
  ActionType action = ActionType::Transition;
  i64 start = 0;
  i64 end = 0;  // exclusive

  bool operator==(const Segment&) const = default;
};

// Per-element judged scores plus the predicted segments: the explainable
// output of the pipeline. All totals are exact sums of their parts.
struct Judgment {
  struct Element {
    int seq = 0;
    std::string name;
    ActionType action = ActionType::Jump;
    double base = 0.0;
    double goe = 0.0;
    double tes = 0.0;      // base + goe
    bool missing = false;  // element not found in the predicted segmentation
  };

  std::string performance_id;
  std::vector<Element> elements;
  std::array<double, kNumPcsComponents> pcs_components{};
  std::array<std::string, kNumPcsComponents> pcs_component_names;
  double pcs_factor = 1.0;
  double tes_total = 0.0;
  double pcs_total = 0.0;   // factor * sum(components)
  double total_score = 0.0; // tes_total + pcs_total
  std::vector<Segment> segments;
};

// Distinct classes of score-sheet rejection, one per violated invariant.
enum class SheetErrorKind {
  Syntax,          // not valid JSON / wrong value type
  MissingField,
  ComponentCount,  // pcs_components must have exactly 5 names
  GoeRange,        // ground-truth GOE outside [-5, +5]
  Factor,          // pcs_factor not in {1.00, 0.80}
  DuplicateSeq,    // repeated or non-contiguous sequence index
  BadValue,        // other invariant violations (negative base, bad action, ...)
  TotalMismatch,   // recorded totals disagree with recomposition
};

class SheetError : public Error {
 public:
  SheetError(SheetErrorKind kind, const std::string& msg)
      : Error(ErrorKind::Validation, msg), sheet_kind_(kind) {}
  SheetErrorKind sheet_kind() const { return sheet_kind_; }

 private:
  SheetErrorKind sheet_kind_;
};

// Parses and fully validates a score-sheet document (JSON, UTF-8). Every
// violation is rejected with a SheetError naming the offending field.
ScoreSheet parse_score_sheet(const std::string& document);
std::string serialize_score_sheet(const ScoreSheet& sheet);

// Planned occurrences per action type; Transition carries no constraint and
// its slot is always 0.
std::array<i64, kNumActions> element_counts(const ScoreSheet& sheet);

// Exact additive composition: per-element TES = base + GOE, tes_total is
// their sum, pcs_total = factor * sum(components), total = TES + PCS.
// `missing` flags elements that were not detected (their GOE must be 0).
Judgment compose_judgment(const ScoreSheet& sheet, const std::vector<double>& goe,
                          const std::array<double, kNumPcsComponents>& pcs,
                          std::vector<Segment> segments,
                          const std::vector<bool>& missing = {});

// Truth subtotals recomputed from per-element GOE and PCS components.
struct TruthTotals {
  double tes = 0.0;
  double pcs = 0.0;
  double total = 0.0;
};
TruthTotals truth_totals(const ScoreSheet& sheet);

}  // namespace iris
