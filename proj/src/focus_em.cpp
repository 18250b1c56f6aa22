#include "focusfl/focus_em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "focusfl/errors.hpp"
#include "focusfl/parallel.hpp"

namespace focusfl {

SoftLabelMatrix SoftLabelMatrix::uniform(int num_agents, int num_clusters) {
  if (num_agents < 1 || num_clusters < 1) throw std::invalid_argument("SoftLabelMatrix: need E >= 1 and M >= 1");
  SoftLabelMatrix pi;
  pi.values_ = Matrix(static_cast<std::size_t>(num_agents), static_cast<std::size_t>(num_clusters));
  std::fill(pi.values_.data.begin(), pi.values_.data.end(), 1.0 / num_clusters);
  return pi;
}

SoftLabelMatrix SoftLabelMatrix::from_rows(const std::vector<Vector>& rows, double tol) {
  if (rows.empty() || rows.front().empty()) throw std::invalid_argument("SoftLabelMatrix: empty");
  SoftLabelMatrix pi;
  pi.values_ = Matrix(rows.size(), rows.front().size());
  for (std::size_t e = 0; e < rows.size(); ++e) {
    if (rows[e].size() != pi.values_.cols) throw std::invalid_argument("SoftLabelMatrix: ragged rows");
    std::copy(rows[e].begin(), rows[e].end(), pi.values_.row(e).begin());
  }
  if (!pi.is_row_stochastic(tol)) throw std::invalid_argument("SoftLabelMatrix: rows must lie on the simplex");
  return pi;
}

double SoftLabelMatrix::column_mass(int m) const {
  double total = 0.0;
  for (int e = 0; e < agents(); ++e) total += (*this)(e, m);
  return total;
}

bool SoftLabelMatrix::is_row_stochastic(double tol) const {
  for (std::size_t e = 0; e < values_.rows; ++e) {
    double sum = 0.0;
    for (double v : values_.row(e)) {
      if (!(v >= 0.0 && v <= 1.0)) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

Vector e_step_row(std::span<const double> pi_row, std::span<const double> losses) {
  if (pi_row.size() != losses.size()) throw std::invalid_argument("e_step: pi row and loss row differ in length");
  const std::size_t M = pi_row.size();
  // Exponents are taken relative to the smallest loss among clusters with mass,
  // so the largest factor is exactly 1 and nothing overflows.
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < M; ++m) {
    if (!std::isfinite(losses[m])) throw std::invalid_argument("e_step: losses must be finite");
    if (pi_row[m] > 0.0) floor = std::min(floor, losses[m]);
  }
  if (!std::isfinite(floor)) throw std::invalid_argument("e_step: pi row has no positive mass");

  Vector out(M, 0.0);
  double total = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    if (pi_row[m] > 0.0) {
      out[m] = pi_row[m] * std::exp(floor - losses[m]);
      total += out[m];
    }
  }
  for (double& v : out) v /= total;
  return out;
}

SoftLabelMatrix e_step(const SoftLabelMatrix& pi, const Matrix& losses) {
  if (losses.rows != static_cast<std::size_t>(pi.agents()) || losses.cols != static_cast<std::size_t>(pi.clusters())) {
    throw std::invalid_argument("e_step: loss matrix shape must be E x M");
  }
  SoftLabelMatrix next;
  next.values_ = Matrix(losses.rows, losses.cols);
  for (int e = 0; e < pi.agents(); ++e) {
    const Vector row = e_step_row(pi.row(e), losses.row(static_cast<std::size_t>(e)));
    std::copy(row.begin(), row.end(), next.values_.row(static_cast<std::size_t>(e)).begin());
  }
  return next;
}

Matrix training_loss_matrix(const Federation& fed, const ClusterModels& models) {
  const std::size_t E = fed.train.size();
  const auto M = static_cast<std::size_t>(models.size());
  Matrix losses(E, M);
  parallel_for(E * M, [&](std::size_t idx) {
    const std::size_t e = idx / M;
    const std::size_t m = idx % M;
    losses(e, m) = mean_sample_loss(fed.model, models.weights[m], fed.train[e]);
  });
  return losses;
}

MStepOutcome m_step(const SoftLabelMatrix& pi, const ClusterModels& models, const Federation& fed) {
  const auto E = static_cast<std::size_t>(pi.agents());
  const auto M = static_cast<std::size_t>(pi.clusters());
  if (E != fed.train.size() || M != static_cast<std::size_t>(models.size())) {
    throw std::invalid_argument("m_step: pi shape does not match agents x models");
  }

  // theta[m * E + e]: agent e's K-step update of cluster model m.
  std::vector<ParamVector> theta(E * M);
  parallel_for(E * M, [&](std::size_t idx) {
    const std::size_t m = idx / E;
    const std::size_t e = idx % E;
    if (pi(static_cast<int>(e), static_cast<int>(m)) == 0.0) return;  // zero weight in the aggregate
    theta[idx] = local_sgd(models.weights[m], fed.train[e], fed.learning_rate, fed.local_steps, fed.model);
  });

  MStepOutcome out;
  out.models.weights.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    if (pi.column_mass(static_cast<int>(m)) < kStarvedClusterMass) {
      out.models.weights[m] = models.weights[m];
      out.starved.push_back(static_cast<int>(m));
      continue;
    }
    std::vector<ParamVector> locals(E);
    Vector weights(E);
    for (std::size_t e = 0; e < E; ++e) {
      weights[e] = pi(static_cast<int>(e), static_cast<int>(m));
      locals[e] = theta[m * E + e].empty() ? models.weights[m] : std::move(theta[m * E + e]);
    }
    out.models.weights[m] = weighted_average(locals, weights);
  }
  if (!out.models.all_finite()) throw DivergenceError("divergence detected: non-finite cluster model");
  return out;
}

namespace {

void record_monitoring(FocusHistory& h, const SoftLabelMatrix& pi, const ClusterModels& models,
                       const Federation& fed, const ClusterSpec* truth) {
  if (truth == nullptr) return;
  double min_pi = 1.0;
  for (int e = 0; e < pi.agents(); ++e) {
    const int c = fed.train[static_cast<std::size_t>(e)].true_cluster;
    min_pi = std::min(min_pi, c < pi.clusters() ? pi(e, c) : 0.0);
  }
  h.min_correct_pi.push_back(min_pi);
  Vector dists;
  for (int m = 0; m < std::min(models.size(), truth->num_clusters()); ++m) {
    dists.push_back(distance(models.weights[static_cast<std::size_t>(m)], truth->centers[static_cast<std::size_t>(m)]));
  }
  h.center_distances.push_back(std::move(dists));
}

RoundLog evaluate_round(const Federation& fed, int round, const ClusterModels& models, const SoftLabelMatrix& pi) {
  RoundLog log;
  log.round = round;
  const auto E = fed.train.size();
  log.per_agent_train_loss.assign(E, 0.0);
  log.per_agent_test_loss.assign(E, 0.0);
  parallel_for(E, [&](std::size_t e) {
    const auto row = pi.row(static_cast<int>(e));
    log.per_agent_train_loss[e] = ensemble_mean_loss(fed.model, models, row, fed.train[e]);
    log.per_agent_test_loss[e] =
        fed.test.empty() ? log.per_agent_train_loss[e] : ensemble_mean_loss(fed.model, models, row, fed.test[e]);
  });
  log.model_snapshot_norms = models.norms();
  return log;
}

}  // namespace

FocusResult run_focus(const Federation& fed, const ClusterModels& init, const ClusterSpec* truth) {
  fed.check();
  if (init.size() < 1) throw std::invalid_argument("run_focus: need at least one model");
  if (init.dim() != fed.train.front().dim()) throw std::invalid_argument("run_focus: init dimension mismatch");

  FocusResult result;
  ClusterModels models = init;
  SoftLabelMatrix pi = SoftLabelMatrix::uniform(fed.num_agents(), init.size());
  result.history.pi.push_back(pi);
  result.history.models.push_back(models);
  record_monitoring(result.history, pi, models, fed, truth);

  for (int t = 0; t < fed.rounds; ++t) {
    const auto start = std::chrono::steady_clock::now();
    try {
      pi = e_step(pi, training_loss_matrix(fed, models));
      MStepOutcome step = m_step(pi, models, fed);
      for (int m : step.starved) result.history.starved_events.emplace_back(t + 1, m);
      models = std::move(step.models);
    } catch (DivergenceError& err) {
      err.set_round(t + 1);
      throw;
    }
    RoundLog log = evaluate_round(fed, t + 1, models, pi);
    log.wall_time = std::chrono::steady_clock::now() - start;
    result.logs.push_back(std::move(log));
    result.history.pi.push_back(pi);
    result.history.models.push_back(models);
    record_monitoring(result.history, pi, models, fed, truth);
  }
  result.models = std::move(models);
  result.pi = std::move(pi);
  return result;
}

FocusResult run_focus(const Federation& fed, int num_clusters, const InitOptions& init, const ClusterSpec* truth) {
  return run_focus(fed, initialize_models(fed, num_clusters, init), truth);
}

Vector one_shot_label(const ModelKind& model, const ClusterModels& models, const AgentDataset& data) {
  if (data.size() == 0) throw std::invalid_argument("one_shot_label: empty dataset");
  const auto M = static_cast<std::size_t>(models.size());
  Vector losses(M);
  for (std::size_t m = 0; m < M; ++m) losses[m] = mean_sample_loss(model, models.weights[m], data);
  const Vector prior(M, 1.0 / static_cast<double>(M));
  return e_step_row(prior, losses);
}

std::vector<int> hard_assignment(const SoftLabelMatrix& pi) {
  std::vector<int> out(static_cast<std::size_t>(pi.agents()));
  for (int e = 0; e < pi.agents(); ++e) {
    int best = 0;
    for (int m = 1; m < pi.clusters(); ++m) {
      if (pi(e, m) > pi(e, best)) best = m;
    }
    out[static_cast<std::size_t>(e)] = best;
  }
  return out;
}

std::vector<AgentPredictor> focus_predictors(const ClusterModels& models, const SoftLabelMatrix& pi) {
  std::vector<AgentPredictor> out;
  out.reserve(static_cast<std::size_t>(pi.agents()));
  for (int e = 0; e < pi.agents(); ++e) {
    const auto row = pi.row(e);
    out.push_back(AgentPredictor{models, Vector(row.begin(), row.end())});
  }
  return out;
}

}  // namespace focusfl
