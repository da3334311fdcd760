#include "iris/rubric.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace iris {

using json = nlohmann::ordered_json;

std::string_view action_name(ActionType a) {
  switch (a) {
    case ActionType::Transition: return "Transition";
    case ActionType::Jump: return "Jump";
    case ActionType::Spin: return "Spin";
    case ActionType::StepSequence: return "StepSequence";
  }
  fail(ErrorKind::Validation, "unknown action type");
}

std::optional<ActionType> action_from_name(std::string_view name) {
  if (name == "Transition") return ActionType::Transition;
  if (name == "Jump") return ActionType::Jump;
  if (name == "Spin") return ActionType::Spin;
  if (name == "StepSequence") return ActionType::StepSequence;
  return std::nullopt;
}

char action_char(ActionType a) {
  switch (a) {
    case ActionType::Transition: return 'T';
    case ActionType::Jump: return 'J';
    case ActionType::Spin: return 'S';
    case ActionType::StepSequence: return 'Q';
  }
  return '?';
}

namespace {

[[noreturn]] void reject(SheetErrorKind kind, const std::string& msg) {
  throw SheetError(kind, "score sheet: " + msg);
}

const json& field(const json& obj, const char* name, const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end()) reject(SheetErrorKind::MissingField, where + ": missing field '" + name + "'");
  return *it;
}

double number_field(const json& obj, const char* name, const std::string& where) {
  const json& f = field(obj, name, where);
  if (!f.is_number()) reject(SheetErrorKind::BadValue, where + ": field '" + name + "' must be a number");
  return f.get<double>();
}

std::string string_field(const json& obj, const char* name, const std::string& where) {
  const json& f = field(obj, name, where);
  if (!f.is_string()) reject(SheetErrorKind::BadValue, where + ": field '" + name + "' must be a string");
  return f.get<std::string>();
}

}  // namespace

ScoreSheet parse_score_sheet(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    reject(SheetErrorKind::Syntax, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) reject(SheetErrorKind::Syntax, "document root must be an object");

  ScoreSheet sheet;
  sheet.performance_id = string_field(doc, "performance_id", "root");

  sheet.pcs_factor = number_field(doc, "pcs_factor", "root");
  if (sheet.pcs_factor != 1.0 && sheet.pcs_factor != 0.8)
    reject(SheetErrorKind::Factor,
           "pcs_factor must be 1.00 or 0.80, got " + std::to_string(sheet.pcs_factor));

  const json& elems = field(doc, "elements", "root");
  if (!elems.is_array() || elems.empty())
    reject(SheetErrorKind::BadValue, "elements must be a non-empty array");
  int expected_seq = 1;
  for (const json& e : elems) {
    const std::string where = "elements[" + std::to_string(expected_seq - 1) + "]";
    if (!e.is_object()) reject(SheetErrorKind::BadValue, where + " must be an object");
    PlannedElement pe;
    const json& seq = field(e, "seq", where);
    if (!seq.is_number_integer()) reject(SheetErrorKind::BadValue, where + ": seq must be an integer");
    pe.seq = seq.get<int>();
    if (pe.seq < expected_seq)
      reject(SheetErrorKind::DuplicateSeq, where + ": duplicate sequence index " + std::to_string(pe.seq));
    if (pe.seq != expected_seq)
      reject(SheetErrorKind::DuplicateSeq,
             where + ": sequence index " + std::to_string(pe.seq) + " breaks contiguity (expected " +
                 std::to_string(expected_seq) + ")");
    pe.name = string_field(e, "name", where);
    const std::string action = string_field(e, "action", where);
    const auto a = action_from_name(action);
    if (!a || *a == ActionType::Transition)
      reject(SheetErrorKind::BadValue,
             where + ": action must be Jump, Spin or StepSequence, got '" + action + "'");
    pe.action = *a;
    pe.base_value = number_field(e, "base", where);
    if (!(pe.base_value >= 0.0) || !std::isfinite(pe.base_value))
      reject(SheetErrorKind::BadValue, where + ": base value must be >= 0");
    sheet.elements.push_back(std::move(pe));
    ++expected_seq;
  }

  const json& comps = field(doc, "pcs_components", "root");
  if (!comps.is_array() || comps.size() != kNumPcsComponents)
    reject(SheetErrorKind::ComponentCount,
           "pcs_components must list exactly 5 names, got " + std::to_string(comps.size()));
  for (size_t i = 0; i < kNumPcsComponents; ++i) {
    if (!comps[i].is_string())
      reject(SheetErrorKind::BadValue, "pcs_components[" + std::to_string(i) + "] must be a string");
    sheet.pcs_component_names[i] = comps[i].get<std::string>();
  }

  if (auto it = doc.find("truth"); it != doc.end() && !it->is_null()) {
    const json& truth = *it;
    if (!truth.is_object()) reject(SheetErrorKind::BadValue, "truth must be an object");
    SheetTruth st;
    const json& goe = field(truth, "goe", "truth");
    if (!goe.is_array() || goe.size() != sheet.elements.size())
      reject(SheetErrorKind::BadValue, "truth.goe must list one value per element");
    for (size_t i = 0; i < goe.size(); ++i) {
      if (!goe[i].is_number()) reject(SheetErrorKind::BadValue, "truth.goe values must be numbers");
      const double g = goe[i].get<double>();
      if (g < kGoeMin || g > kGoeMax)
        reject(SheetErrorKind::GoeRange, "truth.goe[" + std::to_string(i) + "] = " +
                                             std::to_string(g) + " outside [-5, 5]");
      st.goe.push_back(g);
    }
    const json& pcs = field(truth, "pcs", "truth");
    if (!pcs.is_array() || pcs.size() != kNumPcsComponents)
      reject(SheetErrorKind::BadValue, "truth.pcs must list exactly 5 values");
    for (size_t i = 0; i < kNumPcsComponents; ++i) {
      if (!pcs[i].is_number()) reject(SheetErrorKind::BadValue, "truth.pcs values must be numbers");
      st.pcs[i] = pcs[i].get<double>();
    }
    if (auto f = truth.find("tes_total"); f != truth.end()) st.tes_total = f->get<double>();
    if (auto f = truth.find("pcs_total"); f != truth.end()) st.pcs_total = f->get<double>();
    if (auto f = truth.find("total"); f != truth.end()) st.total = f->get<double>();
    sheet.truth = std::move(st);

    // recorded totals must match recomposition
    double tes = 0.0;
    for (size_t i = 0; i < sheet.elements.size(); ++i)
      tes += sheet.elements[i].base_value + sheet.truth->goe[i];
    double pcs_sum = 0.0;
    for (double c : sheet.truth->pcs) pcs_sum += c;
    const double pcs_total = sheet.pcs_factor * pcs_sum;
    const auto check_total = [&](const std::optional<double>& rec, double computed, const char* what) {
      if (rec && std::fabs(*rec - computed) > 1e-6)
        reject(SheetErrorKind::TotalMismatch,
               std::string("recorded ") + what + " " + std::to_string(*rec) +
                   " does not match recomposition " + std::to_string(computed));
    };
    check_total(sheet.truth->tes_total, tes, "tes_total");
    check_total(sheet.truth->pcs_total, pcs_total, "pcs_total");
    check_total(sheet.truth->total, tes + pcs_total, "total");
  }

  return sheet;
}

std::string serialize_score_sheet(const ScoreSheet& sheet) {
  json doc;
  doc["performance_id"] = sheet.performance_id;
  doc["pcs_factor"] = sheet.pcs_factor;
  json elems = json::array();
  for (const PlannedElement& e : sheet.elements) {
    json je;
    je["seq"] = e.seq;
    je["name"] = e.name;
    je["action"] = std::string(action_name(e.action));
    je["base"] = e.base_value;
    elems.push_back(std::move(je));
  }
  doc["elements"] = std::move(elems);
  doc["pcs_components"] = sheet.pcs_component_names;
  if (sheet.truth) {
    json truth;
    truth["goe"] = sheet.truth->goe;
    truth["pcs"] = sheet.truth->pcs;
    if (sheet.truth->tes_total) truth["tes_total"] = *sheet.truth->tes_total;
    if (sheet.truth->pcs_total) truth["pcs_total"] = *sheet.truth->pcs_total;
    if (sheet.truth->total) truth["total"] = *sheet.truth->total;
    doc["truth"] = std::move(truth);
  }
  return doc.dump(2) + "\n";
}

std::array<i64, kNumActions> element_counts(const ScoreSheet& sheet) {
  std::array<i64, kNumActions> counts{};
  for (const PlannedElement& e : sheet.elements) counts[static_cast<size_t>(e.action)] += 1;
  return counts;
}

Judgment compose_judgment(const ScoreSheet& sheet, const std::vector<double>& goe,
                          const std::array<double, kNumPcsComponents>& pcs,
                          std::vector<Segment> segments, const std::vector<bool>& missing) {
  require(goe.size() == sheet.elements.size(), ErrorKind::Dimension,
          "compose_judgment: expected " + std::to_string(sheet.elements.size()) +
              " GOE values, got " + std::to_string(goe.size()));
  require(missing.empty() || missing.size() == goe.size(), ErrorKind::Dimension,
          "compose_judgment: missing-flag length mismatch");

  Judgment j;
  j.performance_id = sheet.performance_id;
  j.pcs_factor = sheet.pcs_factor;
  j.pcs_components = pcs;
  j.pcs_component_names = sheet.pcs_component_names;
  j.segments = std::move(segments);
  double tes = 0.0;
  for (size_t i = 0; i < goe.size(); ++i) {
    const PlannedElement& pe = sheet.elements[i];
    Judgment::Element e;
    e.seq = pe.seq;
    e.name = pe.name;
    e.action = pe.action;
    e.base = pe.base_value;
    e.goe = goe[i];
    e.tes = pe.base_value + goe[i];
    e.missing = !missing.empty() && missing[i];
    tes += e.tes;
    j.elements.push_back(std::move(e));
  }
  double pcs_sum = 0.0;
  for (double c : pcs) pcs_sum += c;
  j.tes_total = tes;
  j.pcs_total = sheet.pcs_factor * pcs_sum;
  j.total_score = j.tes_total + j.pcs_total;
  return j;
}

TruthTotals truth_totals(const ScoreSheet& sheet) {
  require(sheet.truth.has_value(), ErrorKind::Validation,
          "sheet " + sheet.performance_id + " carries no ground truth");
  TruthTotals t;
  for (size_t i = 0; i < sheet.elements.size(); ++i)
    t.tes += sheet.elements[i].base_value + sheet.truth->goe[i];
  double pcs_sum = 0.0;
  for (double c : sheet.truth->pcs) pcs_sum += c;
  t.pcs = sheet.pcs_factor * pcs_sum;
  t.total = t.tes + t.pcs;
  return t;
}

}  // namespace iris
