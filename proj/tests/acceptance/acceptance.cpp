// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "focusfl/experiment.hpp"
#include "focusfl/fairness.hpp"
#include "focusfl/focus_em.hpp"
#include "focusfl/parallel.hpp"

using namespace focusfl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vector random_vector(std::size_t d, RandomStream& rng, double scale = 1.0) {
  Vector v(d);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

void criterion_closed_form() {
  const auto t0 = Clock::now();
  const TheoremVerdict v = check_theorem3(ScenarioConfig{});
  const double elapsed = seconds_since(t0);
  const double focus = v.details["closed_form"]["faa_focus"].get<double>();
  const double avg = v.details["closed_form"]["faa_avg"].get<double>();
  report(1, focus <= 1e-4 && avg >= 0.7981 && elapsed < 1.0,
         fmt("closed-form faa_focus=%.3e (<=1e-4) faa_avg=%.4f (>=0.7981) time=%.2fs (<1s)", focus, avg, elapsed));
}

void criterion_trained() {
  bool ok = true;
  double worst_focus_faa = 0, worst_focus_gap = 0, min_avg_faa = 1e300, min_avg_loss = 1e300, slowest = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    const Scenario s = generate_scenario(cfg, ExperimentManifest{}.eval_samples_per_agent);
    for (Algorithm algo : {Algorithm::focus, Algorithm::fedavg}) {
      const auto t0 = Clock::now();
      const AlgorithmRun run = run_algorithm(s, cfg, algo, InitStrategy::local_fit);
      slowest = std::max(slowest, seconds_since(t0));
      if (algo == Algorithm::focus) {
        worst_focus_faa = std::max(worst_focus_faa, run.report.faa);
        worst_focus_gap = std::max(worst_focus_gap, std::abs(run.report.avg_loss - 0.01));
      } else {
        min_avg_faa = std::min(min_avg_faa, run.report.faa);
        min_avg_loss = std::min(min_avg_loss, run.report.avg_loss);
      }
    }
  }
  ok = worst_focus_faa <= 0.01 && worst_focus_gap <= 0.02 && min_avg_faa >= 0.7 && min_avg_loss >= 0.09 &&
       slowest < 10.0;
  report(2, ok,
         fmt("5 seeds: focus max faa=%.2e (<=0.01) max |loss-0.01|=%.2e (<=0.02); fedavg min faa=%.4f (>=0.7) "
             "min loss=%.4f (>=0.09); slowest run %.2fs (<10s)",
             worst_focus_faa, worst_focus_gap, min_avg_faa, min_avg_loss, slowest));
}

void criterion_convergence() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  ScenarioConfig outlier;
  ScenarioConfig three;
  three.scenario_kind = ScenarioKind::multi_cluster;
  three.num_clusters = 3;
  for (const auto& [name, cfg] : {std::pair{"outlier", outlier}, std::pair{"3-cluster", three}}) {
    const TheoremVerdict v = check_theorem1(cfg);
    const double pi = v.details["final_min_correct_pi"].get<double>();
    bool dist_ok = true;
    for (const auto& c : v.details["clusters"]) dist_ok = dist_ok && c["within_tenth_plus_2r"].get<bool>();
    ok = ok && pi >= 0.99 && dist_ok;
    detail += fmt("%s: min pi=%.6f dist=%s; ", name, pi, dist_ok ? "ok" : "FAIL");
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 30.0;
  report(3, ok, detail + fmt("total %.2fs (<30s)", elapsed));
}

void criterion_single_cluster_identity() {
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    const Scenario s = generate_scenario(cfg);
    const Federation fed = Federation::from_config(cfg, s.train, s.test);
    const FedAvgResult avg = run_fedavg(fed);
    const FocusResult focus = run_focus(fed, 1, InitOptions{});
    ok = ok && focus.models.weights[0] == avg.model && focus.logs.size() == avg.logs.size();
    for (std::size_t t = 0; ok && t < avg.logs.size(); ++t) {
      ok = focus.logs[t].per_agent_train_loss == avg.logs[t].per_agent_train_loss &&
           focus.logs[t].per_agent_test_loss == avg.logs[t].per_agent_test_loss;
    }
  }
  report(4, ok, "M=1 FOCUS vs FedAvg, seeds 1-3: models and per-round logs bit-identical");
}

// Smallest eigenvalue of a symmetric PSD matrix via power iteration on (shift*I - A).
double min_eigenvalue(const std::vector<Vector>& a, double shift) {
  const std::size_t d = a.size();
  Vector v(d, 1.0), next(d);
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    for (std::size_t i = 0; i < d; ++i) {
      next[i] = shift * v[i];
      for (std::size_t j = 0; j < d; ++j) next[i] -= a[i][j] * v[j];
    }
    const double n = norm(next);
    for (std::size_t i = 0; i < d; ++i) v[i] = next[i] / n;
    lambda = n;
  }
  return shift - lambda;
}

void criterion_model_properties() {
  RandomStream rng(5, StreamTag::train_data);
  double worst_fd = 0.0;
  for (const ModelKind& model : {ModelKind::linear(), ModelKind::logistic(0.1)}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vector mu = random_vector(10, rng);
      const auto d = model.is_classifier() ? gen_classification_dataset(mu, 50, 1.0, rng)
                                           : gen_regression_dataset(mu, 50, 1.0, 0.1, rng);
      const Vector w = random_vector(10, rng);
      const Vector g = gradient(model, w, d);
      Vector fd(w.size());
      const double h = 1e-5;
      for (std::size_t i = 0; i < w.size(); ++i) {
        Vector up = w, down = w;
        up[i] += h;
        down[i] -= h;
        fd[i] = (empirical_loss(model, up, d) - empirical_loss(model, down, d)) / (2 * h);
      }
      worst_fd = std::max(worst_fd, norm(subtract(g, fd)) / std::max(norm(fd), 1e-300));
    }
  }

  // Curvature bounds: lower = ridge term for logistic, 2*lambda_min(sample covariance) for least squares.
  bool curvature_ok = true;
  for (const ModelKind& model : {ModelKind::linear(), ModelKind::logistic(0.2)}) {
    const std::size_t dim = 6;
    const auto d = model.is_classifier() ? gen_classification_dataset(random_vector(dim, rng), 400, 1.0, rng)
                                         : gen_regression_dataset(random_vector(dim, rng), 400, 1.0, 0.1, rng);
    const double smooth = smoothness_bound(model, d);
    double strong = model.ridge_lambda;
    if (!model.is_classifier()) {
      std::vector<Vector> cov(dim, Vector(dim, 0.0));
      for (std::size_t s = 0; s < d.size(); ++s) {
        const auto x = d.features.row(s);
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = 0; j < dim; ++j) cov[i][j] += x[i] * x[j] / static_cast<double>(d.size());
      }
      strong = 2.0 * min_eigenvalue(cov, smooth);
    }
    for (int trial = 0; trial < 100; ++trial) {
      const Vector a = random_vector(dim, rng, 2.0), b = random_vector(dim, rng, 2.0);
      const Vector diff = subtract(a, b);
      const Vector gdiff = subtract(gradient(model, a, d), gradient(model, b, d));
      curvature_ok = curvature_ok && strong > 0.0 && dot(gdiff, diff) >= strong * dot(diff, diff) * (1 - 1e-9) &&
                     norm(gdiff) <= smooth * norm(diff) * (1 + 1e-12);
    }
  }

  RandomStream prng(11, StreamTag::minibatch);
  double worst_row = 0.0;
  bool range_ok = true;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t m = 1 + prng.below(5);
    Vector prior(m), losses(m);
    double total = 0.0;
    for (double& v : prior) total += (v = prng.uniform_open_zero());
    for (double& v : prior) v /= total;
    for (double& l : losses) l = 50.0 * prng.uniform();
    const Vector next = e_step_row(prior, losses);
    double sum = 0.0;
    for (double v : next) {
      range_ok = range_ok && v >= 0.0 && v <= 1.0;
      sum += v;
    }
    worst_row = std::max(worst_row, std::abs(sum - 1.0));
  }
  report(5, worst_fd <= 1e-5 && curvature_ok && range_ok && worst_row <= 1e-9,
         fmt("grad FD max rel err=%.2e (<=1e-5, 200 cases); curvature bounds on 200 pairs %s; "
             "1e4 soft-label updates max |row sum-1|=%.1e (<=1e-9)",
             worst_fd, curvature_ok ? "ok" : "FAIL", worst_row));
}

void criterion_surrogate_vs_analytic() {
  bool ok = true;
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    const Scenario s = generate_scenario(cfg, ExperimentManifest{}.eval_samples_per_agent);
    for (Algorithm algo : {Algorithm::fedavg, Algorithm::focus}) {
      const AlgorithmRun run = run_algorithm(s, cfg, algo, InitStrategy::local_fit);
      if (!run.analytic_report) {
        ok = false;
        continue;
      }
      const Vector& est = run.report.per_agent_excess.per_agent;
      const Vector& exact = run.analytic_report->per_agent_excess.per_agent;
      for (std::size_t e = 0; e < exact.size(); ++e) {
        const double tol = std::max(0.02 * exact[e], 0.002);
        worst_ratio = std::max(worst_ratio, std::abs(est[e] - exact[e]) / tol);
      }
    }
  }
  ok = ok && worst_ratio <= 1.0;
  report(6, ok, fmt("10 seeds x {fedavg, focus}: worst |surrogate-analytic| / max(2%%, 0.002) = %.3f (<=1)", worst_ratio));
}

void criterion_cluster_count_sweep() {
  ExperimentManifest m;
  m.scenario.scenario_kind = ScenarioKind::multi_cluster;
  m.scenario.num_clusters = 3;
  m.algorithms = {Algorithm::focus};
  m.repetitions = 4;
  const std::vector<double> values{1, 2, 3, 4};
  const auto rows = run_sweep(m, SweepParam::num_clusters, values);
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    double faa[5] = {};
    for (const auto& r : rows) {
      if (r.summary.seed == seed) faa[static_cast<int>(r.value)] = r.summary.faa;
    }
    const bool worst = faa[1] > faa[2] && faa[1] > faa[3] && faa[1] > faa[4];
    const double plateau = std::abs(faa[3] - faa[4]);
    ok = ok && worst && plateau <= 0.02;
    detail += fmt("seed %d: faa M1..4 = %.3f %.3f %.1e %.1e; ", static_cast<int>(seed), faa[1], faa[2], faa[3], faa[4]);
  }
  report(7, ok, detail + "need M=1 strictly worst and |M3-M4|<=0.02");
}

void criterion_thread_determinism() {
  ExperimentManifest m;
  std::string one, many;
  {
    ScopedThreadLimit limit(1);
    one = run_experiment(m, false).summary.dump();
  }
  {
    ScopedThreadLimit limit(8);
    many = run_experiment(m, false).summary.dump();
  }
  report(8, one == many, fmt("summary JSON (%zu bytes) under 1 vs 8 threads: %s", one.size(),
                             one == many ? "byte-identical" : "DIFFERENT"));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{
      criterion_closed_form,        criterion_trained,          criterion_convergence,
      criterion_single_cluster_identity, criterion_model_properties, criterion_surrogate_vs_analytic,
      criterion_cluster_count_sweep, criterion_thread_determinism};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
