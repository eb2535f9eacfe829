#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fspca {

struct MetricsRecord {
  std::uint64_t seed = 0;
  double frob_error = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  int rank = 0;
};

// ||A - B||_F; shapes must agree.
double frobenius_error(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// (tpr, fpr) of an estimated support against the truth over {0..p-1}.
// Conventions: tpr = 1 when the true support is empty; fpr = 0 when the true
// support covers everything.
std::pair<double, double> support_metrics(const std::vector<int>& estimated,
                                          const std::vector<int>& truth, int p);

struct SummaryStat {
  double mean = 0.0;
  double sd = 0.0;       // sample standard deviation (n - 1 divisor)
  double std_error = 0.0;  // sd / sqrt(n)
  int n = 0;
  bool degenerate = false;  // fewer than two samples
};

SummaryStat summarize(const std::vector<double>& xs);

struct MetricsSummary {
  SummaryStat frob_error, tpr, fpr, rank;
  int n = 0;
};

// Per-metric mean and spread over a nonempty list of records.
MetricsSummary aggregate(const std::vector<MetricsRecord>& records);

// "mean±sd" with 4 decimal places, Table-style.
std::string format_mean_sd(const SummaryStat& stat);

inline constexpr const char* kMetricsCsvHeader = "seed,frob_error,tpr,fpr,rank";
std::string metrics_to_csv(const std::vector<MetricsRecord>& records);

std::string to_json_string(const MetricsSummary& summary);

}  // namespace fspca
