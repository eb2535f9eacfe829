#include "fspca/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fspca/errors.hpp"
#include "fspca/matrix_io.hpp"
#include "fspca/rng.hpp"
#include "fspca/synthdata.hpp"

namespace fspca {

void CvSpec::validate() const {
  if (lambda_grid.empty()) throw ValidationError("cv: lambda grid must be nonempty");
  for (double l : lambda_grid)
    if (!(l > 0.0) || !std::isfinite(l))
      throw ValidationError("cv: lambda grid values must be positive reals");
  if (folds < 2) throw ValidationError("cv: folds must be >= 2");
}

std::vector<int> fold_assignment(int n, int folds, std::uint64_t seed) {
  if (n < folds) throw ValidationError("fold_assignment: need n >= folds");
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng::Stream stream(rng::derive_seed(seed, rng::kTagCvFolds));
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(stream.uniform_below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[i], perm[j]);
  }
  std::vector<int> fold_of(n);
  for (int pos = 0; pos < n; ++pos) fold_of[perm[pos]] = pos % folds;
  return fold_of;
}

CvResult cv_select_lambda(const Eigen::MatrixXd& X, const FantopeSpec& spec,
                          const PenaltyConfig& pen_template, const SolverConfig& cfg,
                          const CvSpec& cv) {
  cv.validate();
  cfg.validate();
  const int n = static_cast<int>(X.rows());
  if (n < cv.folds) throw ValidationError("cv_select_lambda: need n >= folds");

  CvResult result;
  result.grid = cv.lambda_grid;
  std::sort(result.grid.begin(), result.grid.end());
  result.grid.erase(std::unique(result.grid.begin(), result.grid.end()),
                    result.grid.end());

  const std::vector<int> fold_of = fold_assignment(n, cv.folds, cv.seed);

  std::vector<double> score_sum(result.grid.size(), 0.0);
  std::vector<int> score_count(result.grid.size(), 0);

  for (int f = 0; f < cv.folds; ++f) {
    int n_val = 0;
    for (int i = 0; i < n; ++i) n_val += (fold_of[i] == f);
    const int n_train = n - n_val;
    Eigen::MatrixXd Xtr(n_train, X.cols()), Xva(n_val, X.cols());
    int a = 0, b = 0;
    for (int i = 0; i < n; ++i) {
      if (fold_of[i] == f)
        Xva.row(b++) = X.row(i);
      else
        Xtr.row(a++) = X.row(i);
    }
    const Eigen::MatrixXd Str = sample_covariance(Xtr);
    const Eigen::MatrixXd Sva = sample_covariance(Xva);

    for (std::size_t li = 0; li < result.grid.size(); ++li) {
      PenaltyConfig pen = pen_template;
      pen.lambda = result.grid[li];
      CvCell cell{result.grid[li], f, 0.0, false};
      try {
        const SolveResult sol = solve(Str, spec, pen, cfg);
        cell.score = (Sva.array() * sol.Phi.array()).sum();
        cell.ok = std::isfinite(cell.score);
      } catch (const std::exception&) {
        cell.ok = false;
      }
      if (cell.ok) {
        score_sum[li] += cell.score;
        score_count[li] += 1;
      }
      result.table.push_back(cell);
    }
  }

  result.mean_scores.assign(result.grid.size(),
                            std::numeric_limits<double>::quiet_NaN());
  bool any = false;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t li = 0; li < result.grid.size(); ++li) {
    if (score_count[li] == 0) continue;  // excluded: every fold failed
    result.mean_scores[li] = score_sum[li] / score_count[li];
    // Ascending scan with >= sends exact ties to the larger lambda.
    if (result.mean_scores[li] >= best) {
      best = result.mean_scores[li];
      result.lambda_star = result.grid[li];
      any = true;
    }
  }
  if (!any)
    throw NumericalError("cv_select_lambda: every lambda was excluded (all fits failed)");
  return result;
}

double default_lambda(const Eigen::MatrixXd& SigmaHat, int n, int p) {
  if (n < 1 || p < 1) throw ValidationError("default_lambda: need n, p >= 1");
  const Eigen::MatrixXd S = symmetrized_checked(SigmaHat);
  Eigen::VectorXd w;
  Eigen::MatrixXd V;
  eigh(S, w, V);
  return w(w.size() - 1) * std::sqrt(std::log(static_cast<double>(p)) /
                                     static_cast<double>(n));
}

std::vector<double> make_lambda_grid(double center, int points, double lo_factor,
                                     double hi_factor) {
  if (!(center > 0.0)) throw ValidationError("make_lambda_grid: center must be > 0");
  if (points < 1 || !(lo_factor > 0.0) || !(hi_factor >= lo_factor))
    throw ValidationError("make_lambda_grid: bad grid parameters");
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = center * std::sqrt(lo_factor * hi_factor);
    return grid;
  }
  const double lo = std::log(center * lo_factor);
  const double hi = std::log(center * hi_factor);
  for (int i = 0; i < points; ++i)
    grid[i] = std::exp(lo + (hi - lo) * i / (points - 1));
  return grid;
}

std::string to_json_string(const CvResult& result) {
  nlohmann::json j;
  j["lambda_star"] = result.lambda_star;
  j["grid"] = result.grid;
  nlohmann::json means = nlohmann::json::array();
  for (double m : result.mean_scores) {
    if (std::isnan(m))
      means.push_back(nullptr);
    else
      means.push_back(m);
  }
  j["mean_scores"] = means;
  return j.dump();
}

std::string cv_table_to_csv(const CvResult& result) {
  std::ostringstream out;
  out << "lambda,fold,score\n";
  for (const CvCell& c : result.table) {
    out << format_g17(c.lambda) << ',' << c.fold << ','
        << (c.ok ? format_g17(c.score) : "nan") << "\n";
  }
  return out.str();
}

}  // namespace fspca
