#include "colearn/wireless/success.hpp"

#include <cmath>
#include <numbers>

#include "colearn/error.hpp"
#include "colearn/scheduling/policies.hpp"

namespace colearn::wireless {

namespace {

struct SimpsonPanel {
  double a, b, fa, fm, fb, whole;
};

double simpson(double a, double b, double fa, double fm, double fb) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }

double adaptive_step(const std::function<double(double)>& f, const SimpsonPanel& p, double tol, int depth) {
  const double m = 0.5 * (p.a + p.b);
  const double lm = 0.5 * (p.a + m), rm = 0.5 * (m + p.b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(p.a, m, p.fa, flm, p.fm);
  const double right = simpson(m, p.b, p.fm, frm, p.fb);
  const double delta = left + right - p.whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_step(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1) +
         adaptive_step(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1);
}

double c_coefficient(double gamma, double alpha) {
  return 12.0 / (5.0 * std::numbers::pi) * std::pow(gamma, alpha / 2.0);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol, int max_depth) {
  COLEARN_REQUIRE(b >= a, "adaptive_simpson: need a <= b");
  COLEARN_REQUIRE(abs_tol > 0.0, "adaptive_simpson: tolerance must be positive");
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return adaptive_step(f, {a, b, fa, fm, fb, simpson(a, b, fa, fm, fb)}, abs_tol, max_depth);
}

double v_integral_core(double gamma, double alpha) {
  COLEARN_REQUIRE(alpha > 2.0, "v_integral: alpha must exceed 2 for the integral to converge");
  COLEARN_REQUIRE(gamma >= 0.0, "v_integral: gamma must be nonnegative");
  const double a = alpha / 2.0;
  const double c = c_coefficient(gamma, alpha);
  if (c == 0.0) return 0.0;
  auto g = [c](double u) { return -std::expm1(-c * u); };

  // Breakpoints resolve the rise of g near u = 1/c.
  std::vector<double> cuts{0.0};
  for (double m = 1.0; m / c < 1.0; m *= 4.0) cuts.push_back(m / c);
  cuts.push_back(1.0);
  const double tol = 1e-9 / static_cast<double>(cuts.size());

  double head = 0.0;
  auto f_head = [&](double u) { return g(u) / (1.0 + std::pow(u, a)); };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) head += adaptive_simpson(f_head, cuts[i], cuts[i + 1], tol);

  // u = v^(-1/(a-1)) maps [1, inf) onto (0, 1] with integrand g(u) / (1 + v^(a/(a-1))) / (a - 1).
  const double q = 1.0 / (a - 1.0);
  const double qa = a / (a - 1.0);
  auto f_tail = [&](double v) {
    if (v == 0.0) return 1.0;
    return g(std::pow(v, -q)) / (1.0 + std::pow(v, qa));
  };
  const double tail = q * adaptive_simpson(f_tail, 0.0, 1.0, tol * (a - 1.0));
  return head + tail;
}

double v_integral(const VParams& p) {
  COLEARN_REQUIRE(p.alpha > 2.0, "v_integral: alpha must exceed 2 for the integral to converge");
  COLEARN_REQUIRE(p.lambda > 0.0 && p.power > 0.0 && p.noise >= 0.0 && p.gamma >= 0.0,
                  "v_integral: parameters out of range");
  const double prefactor = p.noise * p.gamma * std::pow(p.lambda, 1.0 - p.alpha / 2.0) /
                           (p.power * std::pow(2.0, p.alpha - 2.0)) * std::pow(p.gamma, p.alpha / 2.0);
  if (prefactor == 0.0) return 0.0;
  return prefactor * v_integral_core(p.gamma, p.alpha);
}

std::string policy_name(SchedulingPolicy p) {
  switch (p) {
    case SchedulingPolicy::rs: return "rs";
    case SchedulingPolicy::rr: return "rr";
    case SchedulingPolicy::pf: return "pf";
  }
  return "?";
}

SchedulingPolicy policy_from_name(const std::string& name) {
  for (auto p : {SchedulingPolicy::rs, SchedulingPolicy::rr, SchedulingPolicy::pf})
    if (policy_name(p) == name) return p;
  throw ContractViolation("unknown scheduling policy '" + name + "'");
}

AnalyticSuccess success_prob_analytic(SchedulingPolicy policy, std::size_t k, std::size_t n, const VParams& p) {
  COLEARN_REQUIRE(k >= 1 && k <= n, "success_prob_analytic: need 1 <= K <= N");
  const double frac = static_cast<double>(k) / static_cast<double>(n);
  AnalyticSuccess out;
  switch (policy) {
    case SchedulingPolicy::rs:
    case SchedulingPolicy::rr: {
      const double v = v_integral(p);
      out.when_scheduled = 1.0 / (1.0 + v);
      out.time_average = frac / (1.0 + v);
      break;
    }
    case SchedulingPolicy::pf: {
      const std::size_t m = n - k + 1;
      long double sum = 0.0L;
      long double binom = 1.0L;
      for (std::size_t i = 1; i <= m; ++i) {
        binom = binom * static_cast<long double>(m - i + 1) / static_cast<long double>(i);
        VParams pi = p;
        pi.gamma = static_cast<double>(i) * p.gamma;
        const long double term = binom * static_cast<long double>(frac) / (1.0L + v_integral(pi));
        sum += (i % 2 == 1) ? term : -term;
      }
      out.time_average = static_cast<double>(sum);
      out.when_scheduled = out.time_average / frac;
      break;
    }
  }
  return out;
}

SuccessEstimate success_prob_mc(SchedulingPolicy policy, const SuccessConfig& cfg, std::size_t rounds,
                                RngStream& rng) {
  cfg.model.validate();
  const std::size_t n = cfg.devices, k = cfg.scheduled;
  COLEARN_REQUIRE(k >= 1 && k <= n, "success_prob_mc: need 1 <= K <= N");
  COLEARN_REQUIRE(rounds >= 1, "success_prob_mc: need at least one round");

  RngStream geo_rng = rng.child("geometry");
  RngStream fading_rng = rng.child("fading");
  RngStream policy_rng = rng.child("policy");
  RngStream interference_rng = rng.child("interference");

  const DeviceGeometry geometry = cfg.geometry.size() > 0
                                      ? cfg.geometry
                                      : uniform_disc_geometry(n, cfg.cluster_radius_m, cfg.model.min_distance_m, geo_rng);
  COLEARN_REQUIRE(geometry.size() == n, "success_prob_mc: geometry does not match device count");
  std::vector<double> path(n);
  for (std::size_t i = 0; i < n; ++i)
    path[i] = cfg.model.device_power_w * std::pow(geometry.distance(i), -cfg.model.path_loss_exp);
  const double snr_noise = cfg.model.noise_power_w > 0.0 ? cfg.model.noise_power_w : 1.0;

  scheduling::PfTracker pf(n, cfg.pf_factor);
  std::vector<double> successes(n, 0.0), scheduled(n, 0.0), h(n), snr(n);
  double mean = 0.0, m2 = 0.0, cmean = 0.0, cm2 = 0.0;

  for (std::size_t t = 0; t < rounds; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = cfg.model.fading ? fading_rng.exponential(1.0) : 1.0;
      snr[i] = path[i] * h[i] / snr_noise;
    }
    scheduling::DeviceSet sel;
    switch (policy) {
      case SchedulingPolicy::rs: sel = scheduling::random_schedule(n, k, policy_rng); break;
      case SchedulingPolicy::rr: sel = scheduling::round_robin_schedule(n, k, t).devices; break;
      case SchedulingPolicy::pf: sel = pf.select(snr, k); break;
    }
    std::size_t ok = 0;
    for (std::size_t i : sel) {
      scheduled[i] += 1.0;
      const auto interferers = sample_interferers(cfg.model, interference_rng);
      const double g = sinr(cfg.model.device_power_w, h[i], geometry.distance(i), interferers,
                            cfg.model.path_loss_exp, cfg.model.noise_power_w);
      if (g > cfg.model.sinr_threshold) {
        successes[i] += 1.0;
        ++ok;
      }
    }
    const double f = static_cast<double>(ok) / static_cast<double>(n);
    const double cf = static_cast<double>(ok) / static_cast<double>(sel.size());
    const double count = static_cast<double>(t + 1);
    const double dm = f - mean;
    mean += dm / count;
    m2 += dm * (f - mean);
    const double dc = cf - cmean;
    cmean += dc / count;
    cm2 += dc * (cf - cmean);
  }

  SuccessEstimate out;
  const auto r = static_cast<double>(rounds);
  out.per_device.resize(n);
  out.schedule_freq.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.per_device[i] = successes[i] / r;
    out.schedule_freq[i] = scheduled[i] / r;
  }
  out.mean = mean;
  out.conditional = cmean;
  if (rounds > 1) {
    out.std_err = std::sqrt(m2 / (r - 1.0) / r);
    out.conditional_std_err = std::sqrt(cm2 / (r - 1.0) / r);
  }
  return out;
}

double rounds_figure_of_merit(double u) {
  COLEARN_REQUIRE(u > 0.0 && u < 1.0, "rounds_figure_of_merit: U must lie in (0, 1)");
  return -1.0 / std::log1p(-u);
}

double rounds_figure_of_merit_rr(double u_when_scheduled, std::size_t k, std::size_t n) {
  COLEARN_REQUIRE(k >= 1 && k <= n, "rounds_figure_of_merit_rr: need 1 <= K <= N");
  return static_cast<double>(k) / static_cast<double>(n) * rounds_figure_of_merit(u_when_scheduled);
}

}  // namespace colearn::wireless
