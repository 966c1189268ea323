#include "multidirsbm/cem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include <boost/random/uniform_int_distribution.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "multidirsbm/optim.hpp"
#include "multidirsbm/special_math.hpp"

namespace mdsbm {

void FitConfig::validate() const {
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(alpha_min > 0.0) || !(alpha_max > alpha_min)) throw std::invalid_argument("invalid alpha bounds");
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
}

// ---------------------------------------------------------------- E-step

Matrix e_step(const CompositionalMultiplex& net, const ModelParams& params, const Partition& part, ModelKind kind) {
  check_compatible(net, params, part);
  const int n = net.num_nodes();
  const int kc = params.num_clusters();
  Matrix log_post = params.theta.array().log().matrix().transpose().replicate(n, 1);
  for (int s = 0; s < net.num_layers(); ++s) log_post += sender_log_terms(net, params, part.labels, s, kind);

  Matrix zhat(n, kc);
  for (int i = 0; i < n; ++i) {
    const double norm = log_sum_exp(log_post.row(i).transpose());
    if (!std::isfinite(norm))
      throw EstimationError(fmt::format("E-step: node {} has no finite cluster likelihood", i + 1));
    zhat.row(i) = (log_post.row(i).array() - norm).exp().matrix();
    zhat.row(i) /= zhat.row(i).sum();
  }
  return zhat;
}

// ---------------------------------------------------------------- C-step

namespace {

struct LayerCache {
  const EdgeMatrix* edges = nullptr;
  Matrix log_x;   // 0 off the edge set
  Matrix P, log_p, log_q, A, lgamma_a;
  LayerStats stats;
  Matrix comp;    // log theta_h + sender terms, n x K
  Matrix mass;    // sum_j e_lj A(h, c_j), n x K
  Matrix lgamma_mass;
  Vector lse;     // per sender log-sum-exp of comp
};

void refresh(LayerCache& c, const Vector& log_theta, ModelKind kind) {
  const Eigen::Index n = c.stats.out_counts.rows();
  c.comp = sender_log_terms(c.stats, c.P, c.A, kind);
  c.comp.rowwise() += log_theta.transpose();
  c.mass = c.stats.out_counts * c.A.transpose();
  c.lgamma_mass.resize(n, c.A.rows());
  for (Eigen::Index l = 0; l < n; ++l)
    for (Eigen::Index h = 0; h < c.A.rows(); ++h)
      c.lgamma_mass(l, h) = c.mass(l, h) > 0.0 ? log_gamma(c.mass(l, h)) : 0.0;
  c.lse.resize(n);
  for (Eigen::Index l = 0; l < n; ++l) c.lse[l] = log_sum_exp(c.comp.row(l).transpose());
}

LayerCache make_cache(const CompositionalMultiplex& net, const ModelParams& params, int s, const Labels& labels,
                      const Vector& log_theta, ModelKind kind) {
  const int n = net.num_nodes();
  LayerCache c;
  c.edges = &net.edges[s];
  c.log_x = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if ((*c.edges)(i, j)) c.log_x(i, j) = log_share(net.shares[s](i, j));
  c.P = params.P[s];
  const Matrix clamped = params.P[s].cwiseMax(kProbFloor).cwiseMin(1.0 - kProbFloor);
  c.log_p = clamped.array().log().matrix();
  c.log_q = (1.0 - clamped.array()).log().matrix();
  c.A = params.A[s];
  c.lgamma_a = c.A.unaryExpr([](double a) { return log_gamma(a); });
  c.stats = layer_stats(net, s, labels, params.num_clusters());
  refresh(c, log_theta, kind);
  return c;
}

// Change in the hybrid log-likelihood when node i moves from `from` to `to`,
// summed over all other senders in one layer.
double move_gain(const LayerCache& c, int i, int from, int to, ModelKind kind, Vector& row) {
  const Eigen::Index n = c.comp.rows();
  const Eigen::Index kc = c.comp.cols();
  double gain = 0.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    if (l == i) continue;  // node i's own term is marginalized over its label
    if ((*c.edges)(l, i)) {
      const double lx = c.log_x(l, i);
      for (Eigen::Index h = 0; h < kc; ++h) {
        double v = c.comp(l, h) + c.log_p(h, to) - c.log_p(h, from);
        if (kind == ModelKind::Full) {
          const double da = c.A(h, to) - c.A(h, from);
          v += log_gamma(std::max(c.mass(l, h) + da, std::numeric_limits<double>::min())) - c.lgamma_mass(l, h) -
               c.lgamma_a(h, to) + c.lgamma_a(h, from) + da * lx;
        }
        row[h] = v;
      }
    } else {
      for (Eigen::Index h = 0; h < kc; ++h) row[h] = c.comp(l, h) + c.log_q(h, to) - c.log_q(h, from);
    }
    gain += log_sum_exp(row) - c.lse[l];
  }
  return gain;
}

void apply_move(LayerCache& c, int i, int from, int to, const Vector& log_theta, ModelKind kind) {
  const Eigen::Index n = c.comp.rows();
  for (Eigen::Index l = 0; l < n; ++l) {
    if (l == i) continue;
    c.stats.pair_counts(l, from) -= 1.0;
    c.stats.pair_counts(l, to) += 1.0;
    if ((*c.edges)(l, i)) {
      c.stats.out_counts(l, from) -= 1.0;
      c.stats.out_counts(l, to) += 1.0;
      c.stats.log_share_sums(l, from) -= c.log_x(l, i);
      c.stats.log_share_sums(l, to) += c.log_x(l, i);
    }
  }
  refresh(c, log_theta, kind);
}

}  // namespace

Partition c_step(const CompositionalMultiplex& net, const ModelParams& params, const Partition& part,
                 EmptyClusterPolicy policy, ModelKind kind, FitDiagnostics* diagnostics) {
  check_compatible(net, params, part);
  const int n = net.num_nodes();
  const int kc = params.num_clusters();
  Partition out = part;
  if (kc == 1) return out;

  Labels& labels = out.labels;
  Eigen::VectorXi sizes = cluster_sizes(labels, kc);
  const Vector log_theta = params.theta.array().log().matrix();
  std::vector<LayerCache> caches;
  caches.reserve(net.num_layers());
  for (int s = 0; s < net.num_layers(); ++s) caches.push_back(make_cache(net, params, s, labels, log_theta, kind));

  Vector row(kc);
  for (int i = 0; i < n; ++i) {
    const int from = labels[i];
    if (policy == EmptyClusterPolicy::Forbid && sizes[from] == 1) continue;
    int best = from;
    double best_gain = 0.0;
    for (int to = 0; to < kc; ++to) {
      if (to == from) continue;
      double gain = 0.0;
      for (const LayerCache& c : caches) gain += move_gain(c, i, from, to, kind, row);
      if (gain > best_gain) {
        best_gain = gain;
        best = to;
      }
    }
    if (best == from) continue;
    for (LayerCache& c : caches) apply_move(c, i, from, best, log_theta, kind);
    labels[i] = best;
    --sizes[from];
    ++sizes[best];
  }

  if (policy == EmptyClusterPolicy::Reseed) {
    for (int k = 0; k < kc; ++k) {
      if (sizes[k] > 0) continue;
      int pick = -1;
      double confidence = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (sizes[labels[i]] <= 1) continue;
        const double conf = part.responsibilities ? (*part.responsibilities)(i, labels[i]) : 1.0;
        if (conf < confidence) {
          confidence = conf;
          pick = i;
        }
      }
      if (pick < 0) break;
      --sizes[labels[pick]];
      labels[pick] = k;
      ++sizes[k];
      if (diagnostics) ++diagnostics->reseeded_clusters;
    }
  }
  return out;
}

// ---------------------------------------------------------------- M-step

Vector m_step_theta(const Matrix& zhat) {
  return zhat.colwise().sum().transpose() / static_cast<double>(zhat.rows());
}

LayerStack m_step_p(const CompositionalMultiplex& net, const Matrix& zhat, const Labels& labels,
                    FitDiagnostics* diagnostics) {
  const int kc = static_cast<int>(zhat.cols());
  LayerStack P;
  P.reserve(net.num_layers());
  for (int s = 0; s < net.num_layers(); ++s) {
    const LayerStats st = layer_stats(net, s, labels, kc);
    const Matrix edges = zhat.transpose() * st.out_counts;
    const Matrix pairs = zhat.transpose() * st.pair_counts;
    Matrix p(kc, kc);
    for (int k = 0; k < kc; ++k)
      for (int h = 0; h < kc; ++h) {
        if (pairs(k, h) > 0.0) {
          p(k, h) = std::clamp(edges(k, h) / pairs(k, h), 0.0, 1.0);
        } else {
          p(k, h) = 0.0;
          if (diagnostics) ++diagnostics->empty_blocks;
        }
      }
    P.push_back(std::move(p));
  }
  return P;
}

namespace {

// Row k of the layer's A-objective, as weighted sufficient statistics.
struct RowProblem {
  std::vector<int> senders;     // nodes with positive weight and degree
  std::vector<double> weights;  // zhat_ik for those nodes
  Matrix counts;                // m_ih rows for those nodes
  Vector count_mass;            // sum_i w_i m_ih
  Vector share_mass;            // sum_i w_i L_ih

  double negated(const Vector& a, Vector& grad) const {
    Vector psi_a(a.size());
    double value = 0.0;
    for (Eigen::Index h = 0; h < a.size(); ++h) {
      value -= count_mass[h] * log_gamma(a[h]) - a[h] * share_mass[h];
      psi_a[h] = digamma(a[h]);
    }
    grad = -(share_mass - count_mass.cwiseProduct(psi_a));
    for (std::size_t r = 0; r < senders.size(); ++r) {
      const double mass = counts.row(static_cast<Eigen::Index>(r)).dot(a);
      value += weights[r] * log_gamma(mass);
      grad -= weights[r] * digamma(mass) * counts.row(static_cast<Eigen::Index>(r)).transpose();
    }
    return -value;
  }
};

}  // namespace

Matrix estimate_A(const CompositionalMultiplex& net, const Matrix& zhat, const Labels& labels, int layer,
                  const Matrix& warm_start, AlphaBounds bounds, FitDiagnostics* diagnostics) {
  const int kc = static_cast<int>(zhat.cols());
  if (!(bounds.lower > 0.0) || !(bounds.upper > bounds.lower)) throw std::invalid_argument("invalid alpha bounds");
  if (warm_start.rows() != kc || warm_start.cols() != kc) throw std::invalid_argument("warm start has wrong shape");
  const LayerStats st = layer_stats(net, layer, labels, kc);
  const Vector lower = Vector::Constant(kc, bounds.lower);
  const Vector upper = Vector::Constant(kc, bounds.upper);

  optim::BoxOptions options;
  options.pgtol = 1e-7;
  options.max_iterations = 1000;

  Matrix A = warm_start.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
  for (int k = 0; k < kc; ++k) {
    RowProblem row;
    row.count_mass = Vector::Zero(kc);
    row.share_mass = Vector::Zero(kc);
    std::vector<Eigen::Index> rows;
    for (int i = 0; i < net.num_nodes(); ++i) {
      const double w = zhat(i, k);
      if (w <= 0.0 || st.degrees[i] == 0) continue;
      row.senders.push_back(i);
      row.weights.push_back(w);
      rows.push_back(i);
      row.count_mass += w * st.out_counts.row(i).transpose();
      row.share_mass += w * st.log_share_sums.row(i).transpose();
    }
    if (row.senders.empty()) continue;  // no data for this row: keep the warm start
    row.counts.resize(static_cast<Eigen::Index>(rows.size()), kc);
    for (std::size_t r = 0; r < rows.size(); ++r) row.counts.row(static_cast<Eigen::Index>(r)) = st.out_counts.row(rows[r]);

    const optim::Objective objective = [&row](const Vector& a, Vector& g) { return row.negated(a, g); };
    optim::BoxResult best = optim::minimize_box(objective, A.row(k).transpose(), lower, upper, options);
    if (!best.ok()) {
      optim::BoxResult retry = optim::minimize_box(objective, Vector::Ones(kc), lower, upper, options);
      if (retry.status != optim::BoxStatus::NonFinite &&
          (best.status == optim::BoxStatus::NonFinite || retry.f < best.f))
        best = std::move(retry);
      if (best.status == optim::BoxStatus::NonFinite)
        throw EstimationError(fmt::format("A estimation failed in layer {} row {}", layer + 1, k + 1));
      if (!best.ok() && diagnostics) ++diagnostics->optimizer_failures;
    }
    A.row(k) = best.x.transpose();
  }
  return A;
}

ModelParams m_step(const CompositionalMultiplex& net, const Matrix& zhat, const Labels& labels,
                   const LayerStack& warm_A, const FitConfig& config, FitDiagnostics* diagnostics) {
  ModelParams params;
  params.theta = m_step_theta(zhat);
  params.P = m_step_p(net, zhat, labels, diagnostics);
  const int kc = static_cast<int>(zhat.cols());
  params.A.reserve(net.num_layers());
  for (int s = 0; s < net.num_layers(); ++s) {
    if (config.kind == ModelKind::BinaryOnly) {
      params.A.push_back(Matrix::Ones(kc, kc));
      continue;
    }
    params.A.push_back(estimate_A(net, zhat, labels, s, warm_A[s], {config.alpha_min, config.alpha_max}, diagnostics));
  }
  return params;
}

// ---------------------------------------------------------------- driver

std::vector<int> align_sender_rows(ModelParams& params, Partition& part) {
  const int kc = part.num_clusters;
  std::vector<int> perm(kc);
  std::iota(perm.begin(), perm.end(), 0);
  if (!part.responsibilities || kc < 2) return perm;
  const Matrix& zhat = *part.responsibilities;
  // agree(a, b): responsibility mass on row b among nodes labelled a
  Matrix agree = Matrix::Zero(kc, kc);
  for (int i = 0; i < part.num_nodes(); ++i) agree.row(part.labels[i]) += zhat.row(i);

  const auto score = [&](const std::vector<int>& p) {
    double v = 0.0;
    for (int a = 0; a < kc; ++a) v += agree(a, p[a]);
    return v;
  };
  if (kc <= 8) {
    std::vector<int> cand = perm;
    double best = score(perm);
    while (std::next_permutation(cand.begin(), cand.end()))
      if (const double v = score(cand); v > best) {
        best = v;
        perm = cand;
      }
  } else {
    std::vector<bool> row_used(kc, false), label_used(kc, false);
    for (int step = 0; step < kc; ++step) {
      int ba = -1, bb = -1;
      for (int a = 0; a < kc; ++a)
        for (int b = 0; b < kc; ++b)
          if (!label_used[a] && !row_used[b] && (ba < 0 || agree(a, b) > agree(ba, bb))) ba = a, bb = b;
      perm[ba] = bb;
      label_used[ba] = row_used[bb] = true;
    }
  }
  if (std::is_sorted(perm.begin(), perm.end())) return perm;

  ModelParams out = params;
  Matrix z(zhat.rows(), kc);
  for (int a = 0; a < kc; ++a) {
    out.theta[a] = params.theta[perm[a]];
    for (int s = 0; s < params.num_layers(); ++s) {
      out.P[s].row(a) = params.P[s].row(perm[a]);
      out.A[s].row(a) = params.A[s].row(perm[a]);
    }
    z.col(a) = zhat.col(perm[a]);
  }
  params = std::move(out);
  part.responsibilities = std::move(z);
  return perm;
}

Labels random_partition(int num_nodes, int num_clusters, Rng& rng) {
  if (num_clusters < 1 || num_clusters > num_nodes)
    throw std::invalid_argument(fmt::format("cannot split {} nodes into {} clusters", num_nodes, num_clusters));
  boost::random::uniform_int_distribution<int> pick(0, num_clusters - 1);
  Labels labels(num_nodes);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    for (int i = 0; i < num_nodes; ++i) labels[i] = pick(rng);
    if ((cluster_sizes(labels, num_clusters).array() > 0).all()) return labels;
  }
  // Nearly as many clusters as nodes: seed one node per cluster, rest uniform.
  std::vector<int> order(num_nodes);
  std::iota(order.begin(), order.end(), 0);
  for (int i = num_nodes - 1; i > 0; --i) {
    boost::random::uniform_int_distribution<int> swap_with(0, i);
    std::swap(order[i], order[swap_with(rng)]);
  }
  for (int r = 0; r < num_nodes; ++r) labels[order[r]] = r < num_clusters ? r : pick(rng);
  return labels;
}

namespace {

bool has_converged(double previous, double current, double tol) {
  const double delta = std::abs(current - previous);
  if (current == 0.0) return delta < tol;
  return delta / std::abs(current) < tol;
}

}  // namespace

FitResult fit_from(const CompositionalMultiplex& net, const Labels& initial, const FitConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const int kc = config.K;
  const int layers = net.num_layers();

  FitResult res;
  res.kind = config.kind;
  res.seed = config.seed;
  Partition part(initial, kc, one_hot(initial, kc));
  res.params = m_step(net, *part.responsibilities, part.labels, LayerStack(layers, Matrix::Ones(kc, kc)), config,
                      &res.diagnostics);
  res.ll_trace.push_back(hybrid_log_likelihood(net, res.params, part, config.kind));

  for (int it = 1; it <= config.max_iter; ++it) {
    part.responsibilities = e_step(net, res.params, part, config.kind);
    part = c_step(net, res.params, part, config.empty_cluster_policy, config.kind, &res.diagnostics);
    res.params = m_step(net, *part.responsibilities, part.labels, res.params.A, config, &res.diagnostics);
    align_sender_rows(res.params, part);
    const double ll = hybrid_log_likelihood(net, res.params, part, config.kind);
    res.ll_trace.push_back(ll);
    res.iterations = it;
    if (has_converged(res.ll_trace[res.ll_trace.size() - 2], ll, config.tol)) {
      res.converged = true;
      break;
    }
  }
  res.partition = std::move(part);
  res.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

FitResult fit(const CompositionalMultiplex& net, const FitConfig& config) {
  config.validate();
  if (net.num_nodes() == 0 || net.num_layers() == 0) throw std::invalid_argument("empty network");
  if (config.K > net.num_nodes())
    throw std::invalid_argument(fmt::format("K={} exceeds the node count {}", config.K, net.num_nodes()));
  const auto start = std::chrono::steady_clock::now();

  auto run = [&](int r) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
    const Labels init = random_partition(net.num_nodes(), config.K, rng);
    return fit_from(net, init, config);
  };

  std::vector<FitResult> runs(config.restarts);
  if (config.threads <= 1) {
    for (int r = 0; r < config.restarts; ++r) runs[r] = run(r);
  } else {
    for (int first = 0; first < config.restarts; first += config.threads) {
      const int last = std::min(config.restarts, first + config.threads);
      std::vector<std::future<FitResult>> jobs;
      for (int r = first; r < last; ++r) jobs.push_back(std::async(std::launch::async, run, r));
      for (int r = first; r < last; ++r) runs[r] = jobs[r - first].get();
    }
  }

  int best = 0;
  FitDiagnostics total;
  for (int r = 0; r < config.restarts; ++r) {
    total += runs[r].diagnostics;
    if (runs[r].hybrid_ll() > runs[best].hybrid_ll()) best = r;
  }
  FitResult out = std::move(runs[best]);
  out.best_restart_index = best;
  out.seed = config.seed;
  out.diagnostics = total;
  if (total.empty_blocks > 0)
    spdlog::warn("K={}: {} connectivity block update(s) had no possible pairs; p set to 0", config.K,
                 total.empty_blocks);
  if (total.optimizer_failures > 0)
    spdlog::info("K={}: concentration optimizer stopped early on {} row update(s)", config.K,
                 total.optimizer_failures);
  out.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace mdsbm
