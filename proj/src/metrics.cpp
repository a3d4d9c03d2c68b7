#include "sail/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace sail {

double mean_relative_improvement(std::span<const double> scores_x,
                                 std::span<const double> scores_base, double eps) {
  if (scores_x.size() != scores_base.size()) {
    throw std::invalid_argument("mean_relative_improvement: curve lengths differ");
  }
  if (scores_x.empty()) {
    throw std::invalid_argument("mean_relative_improvement: empty curves");
  }
  double mean_x = 0.0, mean_base = 0.0;
  for (std::size_t i = 0; i < scores_x.size(); ++i) {
    mean_x += scores_x[i];
    mean_base += scores_base[i];
  }
  mean_x /= static_cast<double>(scores_x.size());
  mean_base /= static_cast<double>(scores_base.size());
  return (mean_x - mean_base) / (std::abs(mean_base) + eps);
}

double normalized_median(const std::map<std::string, double>& per_env_scores,
                         const std::map<std::string, BaselineAnchors>& anchors) {
  if (per_env_scores.empty()) {
    throw std::invalid_argument("normalized_median: no scores");
  }
  std::vector<double> normalized;
  normalized.reserve(per_env_scores.size());
  for (const auto& [env, score] : per_env_scores) {
    const auto anchor = anchors.find(env);
    if (anchor == anchors.end()) {
      throw std::invalid_argument("normalized_median: missing anchor for env '" + env + "'");
    }
    const auto& [s_random, s_reference] = anchor->second;
    if (s_reference == s_random) {
      throw std::invalid_argument("normalized_median: degenerate anchors for env '" + env + "'");
    }
    normalized.push_back((score - s_random) / std::abs(s_reference - s_random));
  }
  return median(std::move(normalized));
}

double median(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("median: empty input");
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

double mean_action_gap(const QFunction& qf, std::span<const int> states) {
  if (states.empty()) {
    throw std::invalid_argument("mean_action_gap: empty state sample");
  }
  if (qf.n_actions() < 2) return 0.0;
  double total = 0.0;
  for (int s : states) {
    std::vector<double> row = qf.q_values(s);
    double best = row[0], second = row[1];
    if (second > best) std::swap(best, second);
    for (std::size_t a = 2; a < row.size(); ++a) {
      if (row[a] > best) {
        second = best;
        best = row[a];
      } else if (row[a] > second) {
        second = row[a];
      }
    }
    total += best - second;
  }
  return total / static_cast<double>(states.size());
}

double stale_fraction(std::span<const TransitionRecord> batch, const QFunction& target_qf) {
  if (batch.empty()) {
    throw std::invalid_argument("stale_fraction: empty batch");
  }
  std::size_t stale = 0;
  for (const TransitionRecord& rec : batch) {
    if (!rec.mc_return.has_value()) {
      throw std::logic_error("stale_fraction: batch contains a record with the return placeholder");
    }
    if (*rec.mc_return > target_qf.q_value(rec.state, rec.action)) ++stale;
  }
  return static_cast<double>(stale) / static_cast<double>(batch.size());
}

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw std::invalid_argument("parse_double: bad number '" + text + "'");
  }
  return value;
}

namespace {

constexpr const char* kCsvHeader =
    "method,env,seed,step,eval_return,mean_action_gap,stale_fraction,loss";

void check_csv_field(const std::string& field, const char* what) {
  if (field.find(',') != std::string::npos || field.find('\n') != std::string::npos) {
    throw std::invalid_argument(std::string("emit_csv: ") + what + " may not contain ',' or newline");
  }
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void emit_csv(std::span<const RunRecord> records, const std::string& path) {
  std::vector<const RunRecord*> ordered;
  ordered.reserve(records.size());
  for (const RunRecord& rec : records) {
    check_csv_field(rec.method, "method");
    check_csv_field(rec.env, "env");
    ordered.push_back(&rec);
  }
  std::sort(ordered.begin(), ordered.end(), [](const RunRecord* a, const RunRecord* b) {
    return std::tie(a->method, a->env, a->seed) < std::tie(b->method, b->env, b->seed);
  });

  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open metrics CSV for writing");
  }
  out << kCsvHeader << '\n';
  for (const RunRecord* rec : ordered) {
    for (const EvalPoint& pt : rec->points) {
      out << rec->method << ',' << rec->env << ',' << rec->seed << ',' << pt.step << ','
          << format_double(pt.eval_return) << ',' << format_double(pt.mean_action_gap) << ','
          << format_double(pt.stale_fraction) << ',' << format_double(pt.loss) << '\n';
    }
  }
  if (!out.good()) {
    throw std::runtime_error(path + ": metrics CSV write failed");
  }
}

std::vector<RunRecord> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open metrics CSV");
  }
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error(path + ": unexpected metrics CSV header");
  }
  std::map<std::tuple<std::string, std::string, std::uint64_t>, RunRecord> grouped;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 8) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 8 fields");
    }
    RunRecord& rec = grouped[{fields[0], fields[1], std::stoull(fields[2])}];
    rec.method = fields[0];
    rec.env = fields[1];
    rec.seed = std::stoull(fields[2]);
    EvalPoint pt;
    pt.step = std::stoll(fields[3]);
    pt.eval_return = parse_double(fields[4]);
    pt.mean_action_gap = parse_double(fields[5]);
    pt.stale_fraction = parse_double(fields[6]);
    pt.loss = parse_double(fields[7]);
    rec.points.push_back(pt);
  }
  std::vector<RunRecord> records;
  records.reserve(grouped.size());
  for (auto& [key, rec] : grouped) records.push_back(std::move(rec));
  return records;
}

void emit_summary_csv(std::span<const SummaryRow> rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open summary CSV for writing");
  }
  out << "method,env,rel_improvement_vs_baseline,final_score_mean,final_score_median\n";
  for (const SummaryRow& row : rows) {
    out << row.method << ',' << row.env << ',' << format_double(row.rel_improvement_vs_baseline)
        << ',' << format_double(row.final_score_mean) << ','
        << format_double(row.final_score_median) << '\n';
  }
  if (!out.good()) {
    throw std::runtime_error(path + ": summary CSV write failed");
  }
}

std::vector<double> mean_curve(std::span<const RunRecord> runs) {
  if (runs.empty()) {
    throw std::invalid_argument("mean_curve: no runs");
  }
  const std::size_t n_points = runs.front().points.size();
  std::vector<double> curve(n_points, 0.0);
  for (const RunRecord& run : runs) {
    if (run.points.size() != n_points) {
      throw std::invalid_argument("mean_curve: runs use different eval step grids");
    }
    for (std::size_t i = 0; i < n_points; ++i) {
      if (run.points[i].step != runs.front().points[i].step) {
        throw std::invalid_argument("mean_curve: runs use different eval step grids");
      }
      curve[i] += run.points[i].eval_return;
    }
  }
  for (double& v : curve) v /= static_cast<double>(runs.size());
  return curve;
}

std::vector<SummaryRow> compare_methods(std::span<const RunRecord> method_runs,
                                        std::span<const RunRecord> baseline_runs, double eps) {
  if (method_runs.empty() || baseline_runs.empty()) {
    throw std::invalid_argument("compare_methods: need runs on both sides");
  }
  std::map<std::string, std::vector<RunRecord>> by_env, base_by_env;
  for (const RunRecord& run : method_runs) by_env[run.env].push_back(run);
  for (const RunRecord& run : baseline_runs) base_by_env[run.env].push_back(run);

  std::vector<SummaryRow> rows;
  for (const auto& [env, runs] : by_env) {
    const auto base = base_by_env.find(env);
    if (base == base_by_env.end()) {
      throw std::invalid_argument("compare_methods: baseline has no runs for env '" + env + "'");
    }
    SummaryRow row;
    row.method = runs.front().method;
    row.env = env;
    row.rel_improvement_vs_baseline =
        mean_relative_improvement(mean_curve(runs), mean_curve(base->second), eps);
    std::vector<double> finals;
    for (const RunRecord& run : runs) {
      if (run.points.empty()) {
        throw std::invalid_argument("compare_methods: run without eval points");
      }
      finals.push_back(run.points.back().eval_return);
    }
    double total = 0.0;
    for (double v : finals) total += v;
    row.final_score_mean = total / static_cast<double>(finals.size());
    row.final_score_median = median(finals);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sail
