#include "iris/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace iris {

namespace {

// cents-exact rounding so displayed sums stay consistent
long long cents(double x) { return std::llround(x * 100.0); }

std::string money(long long c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", static_cast<double>(c) / 100.0);
  return buf;
}

std::string fixed2(double x) { return money(cents(x)); }

std::string fmt(const char* format, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

const char* kTimelineColors[kNumActions] = {"#d9d9d9", "#e4572e", "#4c9f70", "#3d7dd8"};

}  // namespace

std::string render_judgment_text(const Judgment& j, i64 valid_windows) {
  std::ostringstream out;
  const long long tes_c = cents(j.tes_total);
  const long long pcs_c = cents(j.pcs_total);

  out << "Performance: " << j.performance_id << "\n";
  out << "Total Score: " << money(tes_c + pcs_c) << "\n\n";

  out << "Technical Elements\n";
  out << "  #  Element         Type          Base     GOE   Score\n";
  bool any_missing = false;
  for (const auto& e : j.elements) {
    char line[128];
    std::snprintf(line, sizeof line, " %2d  %-15s %-13s %5s  %+6.2f  %6s%s\n", e.seq,
                  e.name.c_str(), std::string(action_name(e.action)).c_str(),
                  fixed2(e.base).c_str(), std::llround(e.goe * 100.0) / 100.0,
                  fixed2(e.tes).c_str(), e.missing ? "  NOT DETECTED" : "");
    out << line;
    any_missing = any_missing || e.missing;
  }
  out << "                                          TES subtotal  " << money(tes_c) << "\n";
  if (any_missing)
    out << "  NOT DETECTED: element missing from the segmentation, GOE defaulted to 0.00\n";

  out << "\nProgram Components (factor " << fmt("%.2f", j.pcs_factor) << ")\n";
  for (size_t c = 0; c < kNumPcsComponents; ++c) {
    char line[96];
    std::snprintf(line, sizeof line, "  %-20s  %6s\n", j.pcs_component_names[c].c_str(),
                  fixed2(j.pcs_components[c]).c_str());
    out << line;
  }
  out << "                                          PCS subtotal  " << money(pcs_c) << "\n";

  if (valid_windows > 0) {
    const SegmentLabeling lab = SegmentLabeling::from_segments(j.segments);
    out << "\nSegments (" << valid_windows << " windows of "
        << fmt("%.3f", EmbeddingSequence::kWindowSeconds)
        << " s; T=Transition J=Jump S=Spin Q=StepSequence)\n  ";
    for (ActionType a : lab.labels) out << action_char(a);
    out << "\n";
  }
  return out.str();
}

std::string render_judgment_html(const Judgment& j, i64 valid_windows) {
  std::ostringstream out;
  const long long tes_c = cents(j.tes_total);
  const long long pcs_c = cents(j.pcs_total);

  out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">\n<title>" << j.performance_id
      << "</title>\n<style>\n"
      << "body{font-family:sans-serif;max-width:760px;margin:2em auto;}\n"
      << "table{border-collapse:collapse;width:100%;margin:1em 0;}\n"
      << "td,th{border:1px solid #ccc;padding:4px 8px;text-align:right;}\n"
      << "td:nth-child(2),th:nth-child(2),td:first-child{text-align:left;}\n"
      << ".total{font-size:1.4em;font-weight:bold;}\n"
      << ".timeline{display:flex;height:22px;border:1px solid #999;}\n"
      << ".missing{color:#b00;font-weight:bold;}\n"
      << "</style></head><body>\n";
  out << "<h1>" << j.performance_id << "</h1>\n";
  out << "<p class=\"total\">Total Score: " << money(tes_c + pcs_c) << "</p>\n";

  out << "<h2>Technical Elements</h2>\n<table>\n<tr><th>#</th><th>Element</th><th>Type</th>"
      << "<th>Base</th><th>GOE</th><th>Score</th></tr>\n";
  for (const auto& e : j.elements) {
    out << "<tr><td>" << e.seq << "</td><td>" << e.name
        << (e.missing ? " <span class=\"missing\">NOT DETECTED</span>" : "") << "</td><td>"
        << action_name(e.action) << "</td><td>" << fixed2(e.base) << "</td><td>"
        << fixed2(e.goe) << "</td><td>" << fixed2(e.tes) << "</td></tr>\n";
  }
  out << "<tr><td colspan=\"5\"><b>TES subtotal</b></td><td><b>" << money(tes_c)
      << "</b></td></tr>\n</table>\n";

  out << "<h2>Program Components (factor " << fmt("%.2f", j.pcs_factor)
      << ")</h2>\n<table>\n";
  for (size_t c = 0; c < kNumPcsComponents; ++c)
    out << "<tr><td>" << j.pcs_component_names[c] << "</td><td>" << fixed2(j.pcs_components[c])
        << "</td></tr>\n";
  out << "<tr><td><b>PCS subtotal</b></td><td><b>" << money(pcs_c) << "</b></td></tr>\n</table>\n";

  if (valid_windows > 0) {
    out << "<h2>Segments</h2>\n<div class=\"timeline\">\n";
    for (const Segment& s : j.segments) {
      const double pct = 100.0 * static_cast<double>(s.end - s.start) /
                         static_cast<double>(valid_windows);
      out << "<div style=\"width:" << fmt("%.3f", pct) << "%;background:"
          << kTimelineColors[static_cast<size_t>(s.action)] << ";\" title=\""
          << action_name(s.action) << " [" << s.start << "," << s.end << ")\"></div>\n";
    }
    out << "</div>\n<p>";
    for (int a = 0; a < kNumActions; ++a)
      out << "<span style=\"background:" << kTimelineColors[static_cast<size_t>(a)]
          << ";padding:0 8px;margin-right:6px;\"></span>"
          << action_name(static_cast<ActionType>(a)) << " ";
    out << "</p>\n";
  }
  out << "</body></html>\n";
  return out.str();
}

std::string render_evaluation_text(const EvaluationReport& r) {
  std::ostringstream out;
  out << "Evaluation over " << r.n_records << " records\n\n";
  out << "              TES      PCS    Total\n";
  out << "  Spearman  " << fmt("%6.3f", r.spearman_tes) << "   " << fmt("%6.3f", r.spearman_pcs)
      << "   " << fmt("%6.3f", r.spearman_total) << "\n";
  out << "  Pearson   " << fmt("%6.3f", r.pearson_tes) << "   " << fmt("%6.3f", r.pearson_pcs)
      << "   " << fmt("%6.3f", r.pearson_total) << "\n";
  if (r.mean_dice) {
    out << "\n  Dice " << fmt("%.3f", *r.mean_dice) << "   IoU " << fmt("%.3f", *r.mean_iou)
        << "\n";
  }
  if (r.tertiles) {
    static const char* names[3] = {"Low  (0-33%)", "Med  (33-66%)", "High (66-100%)"};
    out << "\n  TES absolute error by IoU tertile\n";
    for (int g = 0; g < 3; ++g) {
      const TertileStat& t = (*r.tertiles)[static_cast<size_t>(g)];
      out << "    " << names[g] << "  n=" << t.count << "  mean "
          << fmt("%.3f", t.mean_abs_tes_error) << "  se " << fmt("%.3f", t.standard_error)
          << "\n";
    }
  }
  if (r.deficit_records > 0)
    out << "\n  " << r.deficit_records << " record(s) had undetected planned elements\n";
  return out.str();
}

std::string render_evaluation_csv(const EvaluationReport& r) {
  std::ostringstream out;
  out << "metric,value\n";
  out << "n_records," << r.n_records << "\n";
  out << "spearman_tes," << fmt("%.10g", r.spearman_tes) << "\n";
  out << "spearman_pcs," << fmt("%.10g", r.spearman_pcs) << "\n";
  out << "spearman_total," << fmt("%.10g", r.spearman_total) << "\n";
  out << "pearson_tes," << fmt("%.10g", r.pearson_tes) << "\n";
  out << "pearson_pcs," << fmt("%.10g", r.pearson_pcs) << "\n";
  out << "pearson_total," << fmt("%.10g", r.pearson_total) << "\n";
  if (r.mean_dice) {
    out << "dice_mean," << fmt("%.10g", *r.mean_dice) << "\n";
    out << "iou_mean," << fmt("%.10g", *r.mean_iou) << "\n";
  }
  if (r.tertiles) {
    static const char* names[3] = {"low", "med", "high"};
    for (int g = 0; g < 3; ++g) {
      const TertileStat& t = (*r.tertiles)[static_cast<size_t>(g)];
      out << "tertile_" << names[g] << "_count," << t.count << "\n";
      out << "tertile_" << names[g] << "_mean_abs_tes_error," << fmt("%.10g", t.mean_abs_tes_error)
          << "\n";
      out << "tertile_" << names[g] << "_standard_error," << fmt("%.10g", t.standard_error)
          << "\n";
    }
  }
  out << "deficit_records," << r.deficit_records << "\n";
  return out.str();
}

std::string render_ablation_text(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "                         Spearman                 Pearson\n";
  out << "  Variant                TES     PCS    Total     TES     PCS    Total    Dice\n";
  for (const AblationRow& row : rows) {
    char line[160];
    const EvaluationReport& r = row.report;
    std::snprintf(line, sizeof line, "  %-20s %6.3f  %6.3f  %6.3f   %6.3f  %6.3f  %6.3f  %6s\n",
                  variant_name(row.variant).c_str(), r.spearman_tes, r.spearman_pcs,
                  r.spearman_total, r.pearson_tes, r.pearson_pcs, r.pearson_total,
                  r.mean_dice ? fmt("%.3f", *r.mean_dice).c_str() : "-");
    out << line;
  }
  return out.str();
}

std::string render_ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "variant,spearman_tes,spearman_pcs,spearman_total,pearson_tes,pearson_pcs,"
         "pearson_total,dice,iou\n";
  for (const AblationRow& row : rows) {
    const EvaluationReport& r = row.report;
    out << variant_name(row.variant) << "," << fmt("%.10g", r.spearman_tes) << ","
        << fmt("%.10g", r.spearman_pcs) << "," << fmt("%.10g", r.spearman_total) << ","
        << fmt("%.10g", r.pearson_tes) << "," << fmt("%.10g", r.pearson_pcs) << ","
        << fmt("%.10g", r.pearson_total) << ",";
    if (r.mean_dice)
      out << fmt("%.10g", *r.mean_dice) << "," << fmt("%.10g", *r.mean_iou);
    else
      out << ",";
    out << "\n";
  }
  return out.str();
}

std::string training_log_header() {
  return "epoch,seg_loss,element_loss,pcs_loss,score_loss,total_loss\n";
}

std::string training_log_row(const TrainingLog::Epoch& e) {
  std::ostringstream out;
  out << e.epoch << "," << fmt("%.12g", e.seg) << "," << fmt("%.12g", e.element) << ","
      << fmt("%.12g", e.pcs) << "," << fmt("%.12g", e.score) << "," << fmt("%.12g", e.total)
      << "\n";
  return out.str();
}

}  // namespace iris
