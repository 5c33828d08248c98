#include "robdet/sequential.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "robdet/errors.hpp"
#include "robdet/sampler.hpp"

namespace robdet {

namespace {

// Single-sample distribution folded onto the lattice x = j * step.
struct LatticeKernel {
  long j_lo = 0;
  std::vector<double> mass;  // index i <-> lattice point (j_lo + i)
  std::vector<double> cum;   // prefix sums, cum[i] = sum of mass[0..i]

  double cum_up_to(long j) const {
    if (mass.empty() || j < j_lo) return 0.0;
    const long i = std::min<long>(j - j_lo, static_cast<long>(mass.size()) - 1);
    return cum[static_cast<std::size_t>(i)];
  }
};

LatticeKernel fold_to_lattice(const MixedDensity& d, double step) {
  double x_min = 0.0, x_max = 0.0;
  if (!d.edges.empty()) {
    x_min = d.edges.front();
    x_max = d.edges.back();
  }
  for (const auto& a : d.atoms) {
    x_min = d.edges.empty() && &a == &d.atoms.front() ? a.x : std::min(x_min, a.x);
    x_max = std::max(x_max, a.x);
  }
  const long j_lo = static_cast<long>(std::floor(x_min / step + 0.5)) - 1;
  const long j_hi = static_cast<long>(std::floor(x_max / step + 0.5)) + 1;
  LatticeKernel k;
  k.j_lo = j_lo;
  k.mass.assign(static_cast<std::size_t>(j_hi - j_lo + 1), 0.0);

  // Continuous cells spread over the lattice cells they overlap.
  for (std::size_t i = 0; i < d.pdf.size(); ++i) {
    const double e0 = d.edges[i], e1 = d.edges[i + 1];
    if (!(e1 > e0) || d.pdf[i] == 0.0) continue;
    const long c0 = static_cast<long>(std::floor(e0 / step + 0.5));
    const long c1 = static_cast<long>(std::floor((e1 - 1e-15 * step) / step + 0.5));
    for (long c = c0; c <= c1; ++c) {
      const double cell_lo = (static_cast<double>(c) - 0.5) * step;
      const double cell_hi = cell_lo + step;
      const double overlap = std::min(e1, cell_hi) - std::max(e0, cell_lo);
      if (overlap > 0.0) k.mass[static_cast<std::size_t>(c - j_lo)] += d.pdf[i] * overlap;
    }
  }
  // Atoms: exact lattice point when aligned, otherwise a mean-preserving
  // split over the two neighbouring points.
  for (const auto& a : d.atoms) {
    const double pos = a.x / step;
    const long j_near = static_cast<long>(std::llround(pos));
    if (std::abs(pos - static_cast<double>(j_near)) < 1e-9) {
      k.mass[static_cast<std::size_t>(j_near - j_lo)] += a.mass;
    } else {
      const long jl = static_cast<long>(std::floor(pos));
      const double frac = pos - static_cast<double>(jl);
      k.mass[static_cast<std::size_t>(jl - j_lo)] += a.mass * (1.0 - frac);
      k.mass[static_cast<std::size_t>(jl + 1 - j_lo)] += a.mass * frac;
    }
  }

  double total = 0.0;
  for (double m : k.mass) total += m;
  if (!(total > 0.0)) throw InvalidRegion("sprt: empty single-sample distribution");
  for (double& m : k.mass) m /= total;  // absorb the truncated-support defect

  k.cum.resize(k.mass.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < k.mass.size(); ++i) {
    acc += k.mass[i];
    k.cum[i] = acc;
  }
  return k;
}

void finalize_run(SprtRun& run, const SprtConfig& cfg) {
  double stopped = 0.0, weighted_n = 0.0;
  for (std::size_t i = 0; i < run.stop_dist.size(); ++i) {
    stopped += run.stop_dist[i];
    weighted_n += static_cast<double>(i + 1) * run.stop_dist[i];
  }
  run.expected_n = stopped > 0.0 ? weighted_n / stopped : 0.0;
  if (run.truncated_mass >= cfg.truncation_tol)
    throw TruncationExceeded("sprt: in-band mass above tolerance at max_n");
}

}  // namespace

void SprtConfig::validate() const {
  if (!(log_t_l <= 0.0) || !(log_t_u >= 0.0))
    throw OutOfRange("sprt: thresholds must satisfy log_t_l <= 0 <= log_t_u");
  if (max_n < 1) throw OutOfRange("sprt: max_n must be >= 1");
  if (!(grid_step > 0.0)) throw OutOfRange("sprt: grid_step must be > 0");
  if (!(truncation_tol > 0.0)) throw OutOfRange("sprt: truncation_tol must be > 0");
}

SprtRun sprt_exact_run(const MixedDensity& llr_density, const SprtConfig& cfg) {
  cfg.validate();
  const double h = cfg.grid_step;
  const LatticeKernel kernel = fold_to_lattice(llr_density, h);

  // State index j <-> running sum j * h. Rejection wins when both threshold
  // conditions hold at once (degenerate bands).
  long i_acc = static_cast<long>(std::floor(cfg.log_t_l / h + 1e-9));
  const long i_rej = static_cast<long>(std::ceil(cfg.log_t_u / h - 1e-9));
  if (i_acc >= i_rej) i_acc = i_rej - 1;
  const long band_lo = i_acc + 1, band_hi = i_rej - 1;
  const long band_n = std::max<long>(band_hi - band_lo + 1, 0);

  SprtRun run;
  std::vector<double> state(static_cast<std::size_t>(band_n), 0.0);
  double acc1 = 0.0, rej1 = 0.0;
  for (std::size_t i = 0; i < kernel.mass.size(); ++i) {
    const long j = kernel.j_lo + static_cast<long>(i);
    if (j >= i_rej)
      rej1 += kernel.mass[i];
    else if (j <= i_acc)
      acc1 += kernel.mass[i];
    else
      state[static_cast<std::size_t>(j - band_lo)] = kernel.mass[i];
  }
  run.stop_dist.push_back(acc1 + rej1);
  run.p_accept = acc1;
  run.p_reject = rej1;

  double band_mass = 0.0;
  for (double s : state) band_mass += s;

  const long k_lo = kernel.j_lo;
  const long k_hi = kernel.j_lo + static_cast<long>(kernel.mass.size()) - 1;
  std::vector<double> next(state.size(), 0.0);
  for (int n = 2; n <= cfg.max_n && band_mass > 1e-12; ++n) {
    std::fill(next.begin(), next.end(), 0.0);
    double acc_n = 0.0, rej_n = 0.0;
    for (long j = band_lo; j <= band_hi; ++j) {
      const double s = state[static_cast<std::size_t>(j - band_lo)];
      if (s <= 0.0) continue;
      acc_n += s * kernel.cum_up_to(i_acc - j);
      rej_n += s * (1.0 - kernel.cum_up_to(i_rej - 1 - j));
    }
    // In-band convolution, restricted to kernel offsets that can land inside.
    const long d_min = std::max(k_lo, band_lo - band_hi);
    const long d_max = std::min(k_hi, band_hi - band_lo);
    for (long d = d_min; d <= d_max; ++d) {
      const double kd = kernel.mass[static_cast<std::size_t>(d - k_lo)];
      if (kd == 0.0) continue;
      const long j0 = std::max(band_lo, band_lo - d);
      const long j1 = std::min(band_hi, band_hi - d);
      const double* src = state.data() + (j0 - band_lo);
      double* dst = next.data() + (j0 + d - band_lo);
      const long len = j1 - j0 + 1;
      for (long i = 0; i < len; ++i) dst[i] += src[i] * kd;
    }
    state.swap(next);
    band_mass = 0.0;
    for (double s : state) band_mass += s;
    run.stop_dist.push_back(acc_n + rej_n);
    run.p_accept += acc_n;
    run.p_reject += rej_n;
  }
  run.truncated_mass = band_mass;
  finalize_run(run, cfg);
  return run;
}

SprtResult sprt_exact(const MixedDensity& d0, const MixedDensity& d1, const SprtConfig& cfg) {
  SprtResult out;
  out.run0 = sprt_exact_run(d0, cfg);
  out.run1 = sprt_exact_run(d1, cfg);
  out.alpha = out.run0.p_reject;
  out.beta = out.run1.p_accept;
  out.en0 = out.run0.expected_n;
  out.en1 = out.run1.expected_n;
  return out;
}

SprtRun sprt_monte_carlo_run(const NominalModel& model, const PiecewiseLLR& llr,
                             const Density& obs, const SprtConfig& cfg) {
  cfg.validate();
  if (cfg.mc_runs < 1) throw OutOfRange("sprt: mc_runs must be >= 1");
  const CdfSampler sampler(obs, model.y_min(), model.y_max());
  const int workers = std::clamp(cfg.workers, 1, 16);

  struct Tally {
    long rejects = 0, accepts = 0, truncated = 0;
    double sum_n = 0.0, sum_n2 = 0.0;
    std::vector<long> stop_counts;
  };
  std::vector<Tally> tallies(workers);

  auto work = [&](int w) {
    Tally& t = tallies[w];
    t.stop_counts.assign(64, 0);
    for (long r = w; r < cfg.mc_runs; r += workers) {
      CounterRng rng(cfg.seed, static_cast<std::uint64_t>(r));
      double s = 0.0;
      int n = 0;
      int exit_kind = 0;  // 0 truncated, 1 reject, -1 accept
      while (n < cfg.max_n) {
        ++n;
        s += llr.log_eval(model.log_lr(sampler.sample(rng)));
        if (s >= cfg.log_t_u) {
          exit_kind = 1;
          break;
        }
        if (s <= cfg.log_t_l) {
          exit_kind = -1;
          break;
        }
      }
      if (exit_kind == 0) {
        ++t.truncated;
        continue;
      }
      (exit_kind == 1 ? t.rejects : t.accepts)++;
      t.sum_n += n;
      t.sum_n2 += static_cast<double>(n) * n;
      if (static_cast<std::size_t>(n) > t.stop_counts.size())
        t.stop_counts.resize(static_cast<std::size_t>(n) * 2, 0);
      ++t.stop_counts[static_cast<std::size_t>(n - 1)];
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  Tally total;
  std::size_t longest = 0;
  for (const Tally& t : tallies) longest = std::max(longest, t.stop_counts.size());
  total.stop_counts.assign(longest, 0);
  for (const Tally& t : tallies) {
    total.rejects += t.rejects;
    total.accepts += t.accepts;
    total.truncated += t.truncated;
    total.sum_n += t.sum_n;
    total.sum_n2 += t.sum_n2;
    for (std::size_t i = 0; i < t.stop_counts.size(); ++i)
      total.stop_counts[i] += t.stop_counts[i];
  }

  const double runs = static_cast<double>(cfg.mc_runs);
  const long stopped = total.rejects + total.accepts;
  SprtRun run;
  run.runs = cfg.mc_runs;
  run.p_reject = total.rejects / runs;
  run.p_accept = total.accepts / runs;
  run.truncated_mass = total.truncated / runs;
  run.se_reject = std::sqrt(std::max(run.p_reject * (1.0 - run.p_reject), 1e-300) / runs);
  run.se_accept = std::sqrt(std::max(run.p_accept * (1.0 - run.p_accept), 1e-300) / runs);
  while (!total.stop_counts.empty() && total.stop_counts.back() == 0) total.stop_counts.pop_back();
  run.stop_dist.reserve(total.stop_counts.size());
  for (long c : total.stop_counts) run.stop_dist.push_back(c / runs);
  if (stopped > 0) {
    const double mean_n = total.sum_n / stopped;
    const double var_n = std::max(total.sum_n2 / stopped - mean_n * mean_n, 0.0);
    run.expected_n = mean_n;
    run.se_n = std::sqrt(var_n / static_cast<double>(stopped));
  }
  if (run.truncated_mass >= cfg.truncation_tol)
    throw TruncationExceeded("sprt: truncated Monte Carlo fraction above tolerance");
  return run;
}

SprtResult sprt_monte_carlo(const NominalModel& model, const PiecewiseLLR& llr,
                            const Density& obs0, const Density& obs1, const SprtConfig& cfg) {
  SprtResult out;
  out.run0 = sprt_monte_carlo_run(model, llr, obs0, cfg);
  SprtConfig cfg1 = cfg;
  cfg1.seed = cfg.seed + 0x51ull;
  out.run1 = sprt_monte_carlo_run(model, llr, obs1, cfg1);
  out.alpha = out.run0.p_reject;
  out.beta = out.run1.p_accept;
  out.en0 = out.run0.expected_n;
  out.en1 = out.run1.expected_n;
  return out;
}

std::vector<ScanPoint> minimax_scan(const NominalModel& model, TestFamily family,
                                    const EpsParams& eps, const std::vector<double>& log_tls,
                                    const std::vector<double>& log_tus, const SprtConfig& config,
                                    bool exact, int hypothesis_mask) {
  PiecewiseLLR llr = PiecewiseLLR::nominal();
  Density own0 = model.density(0), own1 = model.density(1);
  Density alt0 = model.density(0), alt1 = model.density(1);

  switch (family) {
    case TestFamily::m: {
      const MTestSolution m = solve_m_test(model, eps.eps0, eps.eps1);
      const ATestSolution a = solve_a_test(model, eps.eps0, eps.eps1);
      llr = robust_llr(model, m);
      own0 = lfd_density(model, m, 0);
      own1 = lfd_density(model, m, 1);
      alt0 = lfd_density(model, a, 0);
      alt1 = lfd_density(model, a, 1);
      break;
    }
    case TestFamily::a: {
      const ATestSolution a = solve_a_test(model, eps.eps0, eps.eps1);
      const MTestSolution m = solve_m_test(model, eps.eps0, eps.eps1);
      llr = robust_llr(model, a);
      own0 = lfd_density(model, a, 0);
      own1 = lfd_density(model, a, 1);
      alt0 = lfd_density(model, m, 0);
      alt1 = lfd_density(model, m, 1);
      break;
    }
    case TestFamily::h: {
      const HTestSolution hsol = solve_h_test(model, eps.eps0_c, eps.eps1_c);
      llr = robust_llr(model, hsol);
      own0 = lfd_density(model, hsol, 0);
      own1 = lfd_density(model, hsol, 1);
      break;  // alternative stays at the nominals, which belong to the class
    }
    case TestFamily::c: {
      const CompositeSolution c =
          solve_c_test(model, eps.eps0, eps.eps1, eps.eps0_c, eps.eps1_c);
      const ATestSolution a = solve_a_test(model, eps.eps0, eps.eps1);
      llr = robust_llr(model, c);
      own0 = lfd_density(model, c, 0);
      own1 = lfd_density(model, c, 1);
      alt0 = lfd_density(model, a, 0);
      alt1 = lfd_density(model, a, 1);
      break;
    }
  }

  MixedDensity k_own0, k_alt0, k_own1, k_alt1;
  if (exact) {
    if (hypothesis_mask & 1) {
      k_own0 = statistic_distribution(model, llr, own0, 0, {}, config.grid_step);
      k_alt0 = statistic_distribution(model, llr, alt0, 0, {}, config.grid_step);
    }
    if (hypothesis_mask & 2) {
      k_own1 = statistic_distribution(model, llr, own1, 0, {}, config.grid_step);
      k_alt1 = statistic_distribution(model, llr, alt1, 0, {}, config.grid_step);
    }
  }

  std::vector<ScanPoint> points;
  points.reserve(log_tls.size() * log_tus.size());
  for (double tl : log_tls) {
    for (double tu : log_tus) {
      SprtConfig cfg = config;
      cfg.log_t_l = tl;
      cfg.log_t_u = tu;
      ScanPoint pt;
      pt.log_tl = tl;
      pt.log_tu = tu;
      if (hypothesis_mask & 1) {
        pt.own0 = exact ? sprt_exact_run(k_own0, cfg) : sprt_monte_carlo_run(model, llr, own0, cfg);
        pt.alt0 = exact ? sprt_exact_run(k_alt0, cfg) : sprt_monte_carlo_run(model, llr, alt0, cfg);
      }
      if (hypothesis_mask & 2) {
        pt.own1 = exact ? sprt_exact_run(k_own1, cfg) : sprt_monte_carlo_run(model, llr, own1, cfg);
        pt.alt1 = exact ? sprt_exact_run(k_alt1, cfg) : sprt_monte_carlo_run(model, llr, alt1, cfg);
      }
      points.push_back(std::move(pt));
    }
  }
  return points;
}

}  // namespace robdet
