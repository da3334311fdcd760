#pragma once

#include <string>
#include <vector>

#include "iris/pipeline.hpp"

namespace iris {

// Score-sheet style report for one judged performance. The timeline strip
// uses one character per valid window (T/J/S/Q); undetected elements are
// marked NOT DETECTED. Displayed values are rounded to 2 decimals; the
// displayed Total is the exact sum of the displayed subtotals.
std::string render_judgment_text(const Judgment& judgment, i64 valid_windows);
std::string render_judgment_html(const Judgment& judgment, i64 valid_windows);

std::string render_evaluation_text(const EvaluationReport& report);
std::string render_evaluation_csv(const EvaluationReport& report);

std::string render_ablation_text(const std::vector<AblationRow>& rows);
std::string render_ablation_csv(const std::vector<AblationRow>& rows);

std::string training_log_header();
std::string training_log_row(const TrainingLog::Epoch& epoch);

}  // namespace iris
