#include "ami/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <tuple>
#include <variant>

#include "ami/core/format.hpp"

namespace ami {
namespace {

using Cell = std::variant<std::string, double, std::uint64_t, bool>;
using Table = std::vector<std::pair<std::string, Cell>>;

Table game_cells(const ReportRow& r) {
  const Metrics& m = r.metrics;
  return {{"run_id", r.run_id},
          {"source", r.source},
          {"attack", r.attack},
          {"variant", r.variant},
          {"dp_mechanism", r.dp_mechanism},
          {"epsilon", r.epsilon},
          {"n", std::uint64_t{r.n}},
          {"l_X", std::uint64_t{r.l}},
          {"d_X", std::uint64_t{r.d}},
          {"beta", r.beta},
          {"gamma", r.gamma},
          {"tau", r.tau},
          {"score_kind", r.score_kind},
          {"trials", std::uint64_t{r.trials}},
          {"acc", m.acc},
          {"f1", m.f1},
          {"auc", m.auc},
          {"tpr", m.tpr},
          {"tnr", m.tnr},
          {"advantage", m.advantage},
          {"condition_ratio", r.condition_ratio},
          {"seed", r.seed},
          {"wall_ms", r.wall_ms}};
}

Table bound_cells(const BoundEstimate& e) {
  return {{"source", to_string(e.source)},
          {"d_X", std::uint64_t{e.d}},
          {"l_X", std::uint64_t{e.l}},
          {"n", std::uint64_t{e.n}},
          {"beta", e.beta},
          {"delta", e.delta},
          {"M", e.M},
          {"p_proj", e.p_proj},
          {"p_proj_iid", e.p_proj_iid},
          {"p_box", e.p_box},
          {"bar_delta", e.bar_delta},
          {"lower_bound", e.lower_bound},
          {"condition_ratio", e.condition_ratio},
          {"condition_holds", e.condition_holds},
          {"samples", std::uint64_t{e.samples}},
          {"p_proj_sigma3", e.p_proj_sigma3},
          {"p_box_sigma3", e.p_box_sigma3}};
}

std::string csv_text(const Cell& c) {
  if (auto s = std::get_if<std::string>(&c)) return *s;
  if (auto d = std::get_if<double>(&c)) return format_double(*d);
  if (auto u = std::get_if<std::uint64_t>(&c)) return std::to_string(*u);
  return std::get<bool>(c) ? "true" : "false";
}

nlohmann::ordered_json json_value(const Cell& c) {
  if (auto s = std::get_if<std::string>(&c)) return *s;
  if (auto d = std::get_if<double>(&c)) {
    // JSON has no NaN or infinity; null marks them.
    if (!std::isfinite(*d)) return nullptr;
    return *d;
  }
  if (auto u = std::get_if<std::uint64_t>(&c)) return *u;
  return std::get<bool>(c);
}

std::string render(const std::string& kind, const std::vector<Table>& rows, const Table& header_shape,
                   const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json doc;
    doc["format_version"] = kReportVersion;
    doc["kind"] = kind;
    auto& arr = doc["rows"] = nlohmann::ordered_json::array();
    for (const Table& t : rows) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (const auto& [k, v] : t) obj[k] = json_value(v);
      arr.push_back(std::move(obj));
    }
    return doc.dump(2) + "\n";
  }
  std::string out = "# ami-sim " + kind + " report v" + std::to_string(kReportVersion) + "\n";
  for (std::size_t i = 0; i < header_shape.size(); ++i) out += (i ? "," : "") + header_shape[i].first;
  out += '\n';
  for (const Table& t : rows) {
    for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + csv_text(t[i].second);
    out += '\n';
  }
  return out;
}

}  // namespace

ReportRow make_row(const RunConfig& cfg, const AttackSpec& attack, const GameResult& r) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ReportRow row;
  row.run_id = make_run_id(cfg);
  row.source = to_string(cfg.game.data.source);
  row.attack = to_string(attack.kind);
  row.variant = attack.kind == AttackKind::Attn ? "none" : (attack.variant == FcVariant::Full ? "full" : "token");
  row.dp_mechanism = to_string(r.dp.mechanism);
  row.epsilon = r.dp.mechanism == Mechanism::None ? nan : r.dp.epsilon;
  row.n = cfg.game.n;
  row.l = r.l;
  row.d = r.d;
  row.beta = r.beta;
  row.gamma = r.gamma;
  row.tau = r.tau;
  row.score_kind = attack.kind == AttackKind::Attn ? "max_abs_grad_W_O" : "abs_grad_b2_1";
  row.trials = r.outcomes.size();
  row.metrics = r.metrics;
  row.condition_ratio = r.condition_ratio;
  row.seed = cfg.seed;
  row.wall_ms = nan;
  if (cfg.report.timing && !r.outcomes.empty()) {
    double total = 0.0;
    for (const GameOutcome& o : r.outcomes) total += static_cast<double>(o.wall_ns);
    row.wall_ms = total / static_cast<double>(r.outcomes.size()) / 1e6;
  }
  return row;
}

void sort_rows(std::vector<ReportRow>& rows) {
  auto key = [](const ReportRow& r) {
    // NaN epsilon (no mechanism) sorts first.
    const double eps = std::isnan(r.epsilon) ? -1.0 : r.epsilon;
    return std::make_tuple(r.attack, r.variant, r.dp_mechanism, eps);
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const ReportRow& a, const ReportRow& b) { return key(a) < key(b); });
}

std::string render_game_report(const std::vector<ReportRow>& rows, const std::string& format) {
  std::vector<Table> t;
  for (const ReportRow& r : rows) t.push_back(game_cells(r));
  return render("game", t, game_cells(ReportRow{}), format);
}

std::string render_bounds_report(const std::vector<BoundEstimate>& rows, const std::string& format) {
  std::vector<Table> t;
  for (const BoundEstimate& e : rows) t.push_back(bound_cells(e));
  return render("bounds", t, bound_cells(BoundEstimate{}), format);
}

}  // namespace ami
