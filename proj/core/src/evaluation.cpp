#include "fspca/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fspca/errors.hpp"
#include "fspca/matrix_io.hpp"

namespace fspca {

double frobenius_error(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw ValidationError("frobenius_error: shape mismatch");
  return (A - B).norm();
}

std::pair<double, double> support_metrics(const std::vector<int>& estimated,
                                          const std::vector<int>& truth, int p) {
  std::set<int> est(estimated.begin(), estimated.end());
  std::set<int> tru(truth.begin(), truth.end());
  for (int i : est)
    if (i < 0 || i >= p) throw ValidationError("support_metrics: index out of range");
  for (int i : tru)
    if (i < 0 || i >= p) throw ValidationError("support_metrics: index out of range");

  std::size_t hits = 0, false_pos = 0;
  for (int i : est)
    tru.count(i) ? ++hits : ++false_pos;

  const double tpr = tru.empty()
                         ? 1.0
                         : static_cast<double>(hits) / static_cast<double>(tru.size());
  const std::size_t off = static_cast<std::size_t>(p) - tru.size();
  const double fpr = off == 0 ? 0.0
                              : static_cast<double>(false_pos) / static_cast<double>(off);
  return {tpr, fpr};
}

SummaryStat summarize(const std::vector<double>& xs) {
  if (xs.empty()) throw ValidationError("summarize: empty sample");
  SummaryStat st;
  st.n = static_cast<int>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += x;
  st.mean = acc / st.n;
  if (st.n < 2) {
    st.degenerate = true;
    return st;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - st.mean) * (x - st.mean);
  st.sd = std::sqrt(ss / (st.n - 1));
  st.std_error = st.sd / std::sqrt(static_cast<double>(st.n));
  return st;
}

MetricsSummary aggregate(const std::vector<MetricsRecord>& records) {
  if (records.empty()) throw ValidationError("aggregate: empty record list");
  std::vector<double> fe, tp, fp, rk;
  fe.reserve(records.size());
  for (const auto& r : records) {
    fe.push_back(r.frob_error);
    tp.push_back(r.tpr);
    fp.push_back(r.fpr);
    rk.push_back(static_cast<double>(r.rank));
  }
  MetricsSummary s;
  s.frob_error = summarize(fe);
  s.tpr = summarize(tp);
  s.fpr = summarize(fp);
  s.rank = summarize(rk);
  s.n = static_cast<int>(records.size());
  return s;
}

std::string format_mean_sd(const SummaryStat& stat) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f±%.4f", stat.mean, stat.sd);
  return buf;
}

std::string metrics_to_csv(const std::vector<MetricsRecord>& records) {
  std::ostringstream out;
  out << kMetricsCsvHeader << "\n";
  for (const auto& r : records) {
    out << r.seed << ',' << format_g17(r.frob_error) << ',' << format_g17(r.tpr)
        << ',' << format_g17(r.fpr) << ',' << r.rank << "\n";
  }
  return out.str();
}

namespace {

nlohmann::json stat_json(const SummaryStat& s) {
  return nlohmann::json{{"mean", s.mean},
                        {"sd", s.sd},
                        {"std_error", s.std_error},
                        {"n", s.n},
                        {"degenerate", s.degenerate}};
}

}  // namespace

std::string to_json_string(const MetricsSummary& summary) {
  nlohmann::json j;
  j["frob_error"] = stat_json(summary.frob_error);
  j["tpr"] = stat_json(summary.tpr);
  j["fpr"] = stat_json(summary.fpr);
  j["rank"] = stat_json(summary.rank);
  j["n"] = summary.n;
  return j.dump();
}

}  // namespace fspca
