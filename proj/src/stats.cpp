#include "qvote/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qvote/common.hpp"
#include "qvote/rng.hpp"

namespace qvote::stats {

namespace {

// Regularized incomplete gamma functions via series / continued fraction.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw ContractViolation("gamma_q domain error");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

}  // namespace

double chi2_sf(double x, double df) {
  if (df <= 0.0) throw ContractViolation("chi2_sf needs df > 0");
  if (x <= 0.0) return 1.0;
  return gamma_q(df / 2.0, x / 2.0);
}

ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& observed,
                               const std::vector<double>& expected_probs) {
  if (observed.size() != expected_probs.size() || observed.empty()) {
    throw ContractViolation("observed/expected size mismatch");
  }
  std::uint64_t total = 0;
  for (auto c : observed) total += c;
  if (total == 0) throw ContractViolation("chi_square_gof needs at least one observation");
  ChiSquareResult r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = expected_probs[i] * static_cast<double>(total);
    if (e <= 0.0) throw ContractViolation("expected probability must be positive");
    const double diff = static_cast<double>(observed[i]) - e;
    r.statistic += diff * diff / e;
  }
  r.df = static_cast<int>(observed.size()) - 1;
  r.p_value = r.df > 0 ? chi2_sf(r.statistic, r.df) : 1.0;
  return r;
}

ChiSquareResult chi_square_homogeneity(const std::vector<std::vector<std::uint64_t>>& table) {
  if (table.empty() || table.front().empty()) throw ContractViolation("empty contingency table");
  const std::size_t cols = table.front().size();
  std::vector<double> row_tot(table.size(), 0.0), col_tot(cols, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table[r].size() != cols) throw ContractViolation("ragged contingency table");
    for (std::size_t c = 0; c < cols; ++c) {
      row_tot[r] += static_cast<double>(table[r][c]);
      col_tot[c] += static_cast<double>(table[r][c]);
      total += static_cast<double>(table[r][c]);
    }
  }
  if (total == 0.0) throw ContractViolation("contingency table has no observations");
  int live_rows = 0, live_cols = 0;
  for (double t : row_tot) live_rows += t > 0.0;
  for (double t : col_tot) live_cols += t > 0.0;
  ChiSquareResult r;
  r.df = std::max(0, (live_rows - 1) * (live_cols - 1));
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (row_tot[i] == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) {
      if (col_tot[c] == 0.0) continue;
      const double e = row_tot[i] * col_tot[c] / total;
      const double diff = static_cast<double>(table[i][c]) - e;
      r.statistic += diff * diff / e;
    }
  }
  r.p_value = r.df > 0 ? chi2_sf(r.statistic, r.df) : 1.0;
  return r;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z) {
  if (n == 0) throw ContractViolation("wilson_interval needs n > 0");
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double plugin_mutual_information(const std::vector<std::pair<int, int>>& samples) {
  if (samples.empty()) throw ContractViolation("MI estimate needs samples");
  std::map<int, double> px, py;
  std::map<std::pair<int, int>, double> pxy;
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) {
    px[s.first] += inv;
    py[s.second] += inv;
    pxy[s] += inv;
  }
  double mi = 0.0;
  for (const auto& [key, p] : pxy) {
    mi += p * std::log2(p / (px[key.first] * py[key.second]));
  }
  return std::max(0.0, mi);
}

MiEstimate mutual_information_bootstrap(const std::vector<std::pair<int, int>>& samples,
                                        int resamples, std::uint64_t seed, double ci_level) {
  MiEstimate est;
  est.mi_bits = plugin_mutual_information(samples);
  est.bootstrap_resamples = resamples;
  if (resamples <= 0) {
    est.ci_lo = est.ci_hi = est.mi_bits;
    return est;
  }
  Rng rng(seed);
  std::vector<double> boot(resamples);
  std::vector<std::pair<int, int>> draw(samples.size());
  for (int b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      draw[i] = samples[rng.uniform_int(samples.size())];
    }
    boot[b] = plugin_mutual_information(draw);
  }
  std::sort(boot.begin(), boot.end());
  const double alpha = (1.0 - ci_level) / 2.0;
  const auto idx = [&](double q) {
    const double pos = q * (resamples - 1);
    return boot[static_cast<std::size_t>(std::llround(pos))];
  };
  est.ci_lo = idx(alpha);
  est.ci_hi = idx(1.0 - alpha);
  return est;
}

double mutual_information_exact(const std::vector<std::vector<double>>& joint) {
  if (joint.empty() || joint.front().empty()) throw ContractViolation("empty joint distribution");
  const std::size_t cols = joint.front().size();
  std::vector<double> px(joint.size(), 0.0), py(cols, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < joint.size(); ++r) {
    if (joint[r].size() != cols) throw ContractViolation("ragged joint distribution");
    for (std::size_t c = 0; c < cols; ++c) {
      px[r] += joint[r][c];
      py[c] += joint[r][c];
      total += joint[r][c];
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractViolation("joint distribution must sum to 1");
  double mi = 0.0;
  for (std::size_t r = 0; r < joint.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double p = joint[r][c];
      if (p > 0.0) mi += p * std::log2(p / (px[r] * py[c]));
    }
  }
  return std::max(0.0, mi);
}

}  // namespace qvote::stats
