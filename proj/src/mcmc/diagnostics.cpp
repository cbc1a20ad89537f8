#include <qmc/mcmc/diagnostics.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qmc::mcmc {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct Segment {
  std::size_t chain;
  std::size_t begin;
  std::size_t length;
};

double segment_mean(const SampleView& s, const Segment& seg, std::size_t d) {
  double acc = 0.0;
  for (std::size_t n = 0; n < seg.length; ++n)
    acc += s.at(seg.chain, seg.begin + n, d);
  return acc / static_cast<double>(seg.length);
}

double segment_var(const SampleView& s, const Segment& seg, std::size_t d, double mean) {
  double acc = 0.0;
  for (std::size_t n = 0; n < seg.length; ++n) {
    const double x = s.at(seg.chain, seg.begin + n, d) - mean;
    acc += x * x;
  }
  return acc / static_cast<double>(seg.length - 1);
}

struct VarianceParts {
  double within = 0.0;   // W
  double between = 0.0;  // B
  double var_plus = 0.0; // (n-1)/n W + B/n
};

VarianceParts variance_parts(const SampleView& s, const std::vector<Segment>& segs,
                             std::size_t d, std::vector<double>& means) {
  const std::size_t m = segs.size();
  const double n = static_cast<double>(segs.front().length);
  means.resize(m);
  double grand = 0.0;
  double within = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = segment_mean(s, segs[j], d);
    within += segment_var(s, segs[j], d, means[j]);
    grand += means[j];
  }
  within /= static_cast<double>(m);
  grand /= static_cast<double>(m);
  double between = 0.0;
  for (double mu : means)
    between += (mu - grand) * (mu - grand);
  between *= n / static_cast<double>(m - 1);
  return {within, between, (n - 1.0) / n * within + between / n};
}

} // namespace

SampleView post_burn_in(const ChainOutput& out, double burn_in) {
  if (burn_in < 0.0 || burn_in >= 1.0)
    throw std::invalid_argument("burn-in fraction must be in [0, 1)");
  const std::size_t done = out.completed_iterations;
  const auto skip = static_cast<std::size_t>(burn_in * static_cast<double>(done));
  SampleView v;
  v.data = out.samples;
  v.chains = out.n_walkers;
  v.draws = done - skip;
  v.dim = out.dim;
  v.stride = out.n_iterations;
  v.offset = skip;
  return v;
}

std::vector<double> rhat(const SampleView& s) {
  if (s.chains < 2 || s.draws < 4)
    throw std::invalid_argument("split R-hat needs at least 2 chains of 4 draws");
  const std::size_t half = s.draws / 2;
  std::vector<Segment> segs;
  for (std::size_t c = 0; c < s.chains; ++c) {
    segs.push_back({c, 0, half});
    segs.push_back({c, s.draws - half, half});
  }
  std::vector<double> out(s.dim);
  std::vector<double> means;
  for (std::size_t d = 0; d < s.dim; ++d) {
    const VarianceParts v = variance_parts(s, segs, d, means);
    out[d] = v.within > 0.0 ? std::sqrt(v.var_plus / v.within) : nan;
  }
  return out;
}

std::vector<double> effective_sample_size(const SampleView& s) {
  if (s.chains < 2 || s.draws < 4)
    throw std::invalid_argument("effective sample size needs at least 2 chains of 4 draws");
  std::vector<Segment> segs;
  for (std::size_t c = 0; c < s.chains; ++c)
    segs.push_back({c, 0, s.draws});
  const std::size_t n = s.draws;
  const double total = static_cast<double>(s.chains * n);

  std::vector<double> out(s.dim);
  std::vector<double> means;
  for (std::size_t d = 0; d < s.dim; ++d) {
    const VarianceParts v = variance_parts(s, segs, d, means);
    if (!(v.within > 0.0)) {
      out[d] = nan;
      continue;
    }
    // Mean over chains of the biased autocovariance at `lag`.
    auto autocov = [&](std::size_t lag) {
      double acc = 0.0;
      for (std::size_t c = 0; c < s.chains; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i)
          sum += (s.at(c, i, d) - means[c]) * (s.at(c, i + lag, d) - means[c]);
        acc += sum / static_cast<double>(n);
      }
      return acc / static_cast<double>(s.chains);
    };
    auto rho = [&](std::size_t lag) { return 1.0 - (v.within - autocov(lag)) / v.var_plus; };

    // Geyer: positive pair sums, forced non-increasing.
    double tau = -1.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
      double pair = rho(2 * k) + rho(2 * k + 1);
      if (pair <= 0.0)
        break;
      pair = std::min(pair, prev_pair);
      prev_pair = pair;
      tau += 2.0 * pair;
    }
    // antithetic chains can push tau below 1; cap ESS at total·log10(total)
    out[d] = total / std::max(tau, 1.0 / std::log10(total));
  }
  return out;
}

Moments pooled_moments(const SampleView& s, std::size_t d) {
  const double count = static_cast<double>(s.chains * s.draws);
  double mean = 0.0;
  for (std::size_t c = 0; c < s.chains; ++c)
    for (std::size_t n = 0; n < s.draws; ++n)
      mean += s.at(c, n, d);
  mean /= count;
  double var = 0.0;
  for (std::size_t c = 0; c < s.chains; ++c)
    for (std::size_t n = 0; n < s.draws; ++n) {
      const double x = s.at(c, n, d) - mean;
      var += x * x;
    }
  return {mean, var / (count - 1.0)};
}

std::vector<double> acceptance_rates(const ChainOutput& out) {
  std::vector<double> rates(out.n_walkers, 0.0);
  if (out.completed_iterations < 2)
    return rates;
  for (std::size_t w = 0; w < out.n_walkers; ++w) {
    std::size_t acc = 0;
    for (std::size_t it = 1; it < out.completed_iterations; ++it)
      acc += out.accepted[w * out.n_iterations + it];
    rates[w] = static_cast<double>(acc) / static_cast<double>(out.completed_iterations - 1);
  }
  return rates;
}

} // namespace qmc::mcmc
