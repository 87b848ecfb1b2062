#include "wcond/harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "wcond/errors.hpp"
#include "wcond/harness/csv.hpp"
#include "wcond/harness/svg.hpp"
#include "wcond/matrix_io.hpp"
#include "wcond/precond.hpp"
#include "wcond/quadratic.hpp"
#include "wcond/rng.hpp"
#include "wcond/svd.hpp"

namespace wcond::harness {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index owns its
// output slot, so results do not depend on the schedule.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Vector normal_vector(Rng& rng, std::size_t n) {
  Vector v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

std::string summary_text(const json& j) { return j.dump(); }

}  // namespace

// ---- Van der Sluis / equilibration sweep ---------------------------------

std::optional<VdsRow> vds_trial_from_seed(const VdsConfig& cfg, std::uint64_t trial_seed) {
  Rng rng(trial_seed);
  Matrix a = rng.normal_matrix(cfg.rows, cfg.cols);
  Vector scales(cfg.rows);
  for (double& s : scales) s = rng.log_uniform(1.0 / cfg.row_imbalance, cfg.row_imbalance);
  a = scale_rows(a, scales);

  VdsRow row;
  row.seed = trial_seed;
  try {
    const LeftScaled eq = row_equilibrate(a);
    row.kappa_a = condition_number(a, cfg.rank_tol);
    row.kappa_ea = condition_number(eq.result, cfg.rank_tol);
    if (cfg.p_mode == "equilibration") {
      row.kappa_pa = row.kappa_ea;
    } else {
      Vector p(cfg.rows);
      for (double& d : p) d = rng.log_uniform(1.0 / cfg.p_range, cfg.p_range);
      const DiagonalPreconditioner pc(std::move(p), Side::left, PrecondKind::custom);
      row.kappa_pa = condition_number(pc.apply(a), cfg.rank_tol);
    }
  } catch (const RankDeficientError&) {
    return std::nullopt;
  } catch (const ZeroRowError&) {
    return std::nullopt;
  }
  row.ratio = row.kappa_ea / row.kappa_pa;
  row.equil_ok = row.kappa_ea <= row.kappa_a * (1.0 + cfg.equil_tol);
  row.vds_ok = row.kappa_ea <= row.kappa_pa;
  row.vds_sqrt_ok = row.kappa_ea <= std::sqrt(static_cast<double>(cfg.rows)) * row.kappa_pa;
  return row;
}

VdsRun run_vds(const ExperimentConfig& cfg) {
  const VdsConfig& v = cfg.vds;
  std::vector<std::uint64_t> seeds(v.trials);
  for (std::size_t t = 0; t < v.trials; ++t) seeds[t] = derive_seed(cfg.seed, t);
  std::vector<std::optional<VdsRow>> slots(v.trials);
  parallel_for(v.trials, v.threads, [&](std::size_t t) {
    slots[t] = vds_trial_from_seed(v, seeds[t]);
    if (slots[t]) slots[t]->trial = t;
  });

  VdsRun run;
  VdsResult& r = run.result;
  std::size_t unrelaxed = 0, relaxed = 0, equil = 0;
  for (std::size_t t = 0; t < v.trials; ++t) {
    if (!slots[t]) {
      r.excluded_seeds.push_back(seeds[t]);
      continue;
    }
    const VdsRow& row = *slots[t];
    r.rows.push_back(row);
    r.max_ratio = std::max(r.max_ratio, row.ratio);
    unrelaxed += row.vds_ok;
    relaxed += row.vds_sqrt_ok;
    equil += row.equil_ok;
    if (!row.equil_ok) r.equil_violation_seeds.push_back(row.seed);
  }
  const double n = static_cast<double>(r.rows.size());
  if (!r.rows.empty()) {
    r.frac_unrelaxed = static_cast<double>(unrelaxed) / n;
    r.frac_sqrt = static_cast<double>(relaxed) / n;
    r.frac_equil = static_cast<double>(equil) / n;
  }

  CsvTable table({"trial", "seed", "kappa_a", "kappa_ea", "kappa_pa", "ratio", "equil_ok", "vds_ok",
                  "vds_sqrt_ok"});
  CsvTable violations({"trial", "seed", "kappa_a", "kappa_ea"});
  Series ratio{"kappa(EA)/kappa(PA)", {}, {}};
  Series bound{"sqrt(rows)", {}, {}};
  const double sqrt_rows = std::sqrt(static_cast<double>(v.rows));
  for (const auto& row : r.rows) {
    table.add_row({format_number(row.trial), format_number(row.seed), format_number(row.kappa_a),
                   format_number(row.kappa_ea), format_number(row.kappa_pa),
                   format_number(row.ratio), format_bool(row.equil_ok), format_bool(row.vds_ok),
                   format_bool(row.vds_sqrt_ok)});
    if (!row.equil_ok) {
      violations.add_row({format_number(row.trial), format_number(row.seed),
                          format_number(row.kappa_a), format_number(row.kappa_ea)});
    }
    ratio.x.push_back(static_cast<double>(row.trial));
    ratio.y.push_back(row.ratio);
    bound.x.push_back(static_cast<double>(row.trial));
    bound.y.push_back(sqrt_rows);
  }
  CsvTable excluded({"seed"});
  for (auto s : r.excluded_seeds) excluded.add_row({format_number(s)});

  Plot plot;
  plot.title = "Row equilibration vs diagonal P";
  plot.x_label = "trial";
  plot.y_label = "kappa(EA) / kappa(PA)";
  plot.log_y = true;
  plot.series = {ratio, bound};

  run.artifacts.files = {{"vds.csv", table.str()},
                         {"equil_violations.csv", violations.str()},
                         {"excluded.csv", excluded.str()},
                         {"ratios.svg", emit_svg(plot)}};
  run.artifacts.summary_json = summary_text({{"trials", v.trials},
                                             {"full_rank", r.rows.size()},
                                             {"excluded", r.excluded_seeds.size()},
                                             {"max_ratio", r.max_ratio},
                                             {"frac_unrelaxed", r.frac_unrelaxed},
                                             {"frac_sqrt", r.frac_sqrt},
                                             {"frac_equil", r.frac_equil},
                                             {"equil_violations", r.equil_violation_seeds.size()}});
  return run;
}

// ---- Quadratic demo ----------------------------------------------------

namespace {

// The arm's left preconditioner. For two-sided E A C the left factor C E is
// used: C E A = C (E A C) C^-1 has the same spectrum.
DiagonalPreconditioner quad_preconditioner(const Matrix& a, const std::string& arm) {
  const std::size_t n = a.rows();
  if (arm == "none") return DiagonalPreconditioner::identity(n);
  if (arm == "row_equilibration") return row_equilibrate(a).precond;
  if (arm == "jacobi") return jacobi_precondition(a).precond;
  if (arm == "column_equilibration") {
    const RightScaled c = column_equilibrate(a);
    return {c.precond.diag(), Side::left, PrecondKind::column_equilibration};
  }
  if (arm == "row_column_equilibration") {
    const TwoSided t = row_column_equilibrate(a);
    Vector d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = t.left.diag()[i] * t.right.diag()[i];
    return {std::move(d), Side::left, PrecondKind::custom};
  }
  throw InvalidArgument("unknown quadratic arm '" + arm + "'");
}

}  // namespace

QuadRun run_quad(const ExperimentConfig& cfg) {
  const QuadConfig& q = cfg.quad;
  Matrix a(1, 1);
  if (!q.matrix.empty()) {
    const std::size_t n = q.matrix.size();
    std::vector<double> data;
    for (const auto& row : q.matrix) data.insert(data.end(), row.begin(), row.end());
    a = Matrix(n, n, std::move(data));
  } else {
    Rng rng(derive_seed(cfg.seed, "quad.matrix"));
    a = random_spd(rng, q.n, q.kappa);
  }
  const std::size_t n = a.rows();
  Vector b(n, 0.0);
  if (q.rhs == "random") {
    Rng rng(derive_seed(cfg.seed, "quad.rhs"));
    b = normal_vector(rng, n);
  }
  Rng theta_rng(derive_seed(cfg.seed, "quad.theta0"));
  const Vector theta0 = normal_vector(theta_rng, n);

  const QuadraticProblem base(a, b);
  const Vector star = base.minimizer();
  const double optimum = base.loss(star);

  QuadRun run;
  CsvTable curves({"arm", "rho", "iter", "loss_gap"});
  CsvTable iters({"arm", "rho", "eta", "kappa", "sigma_max", "iterations", "reached", "diverged",
                  "final_gap"});
  std::vector<Plot> plots(q.rhos.size());
  for (std::size_t ri = 0; ri < q.rhos.size(); ++ri) {
    plots[ri].title = "Gradient descent, rho = " + format_number(q.rhos[ri]);
    plots[ri].x_label = "iteration";
    plots[ri].y_label = "L - L*";
    plots[ri].log_y = true;
  }

  for (const auto& arm : q.arms) {
    const PreconditionedQuadratic pq = preconditioned_problem(base, quad_preconditioner(a, arm));
    for (std::size_t ri = 0; ri < q.rhos.size(); ++ri) {
      const double rho = q.rhos[ri];
      QuadRow row;
      row.arm = arm;
      row.rho = rho;
      row.kappa = pq.kappa_pa();
      row.sigma_max = pq.sigma_max_pa();
      row.eta = rho * 2.0 / row.sigma_max;
      const GDTrace trace = run_gd(pq, theta0, row.eta, q.max_iters);
      row.diverged = trace.diverged;
      row.iterations = iterations_to_tolerance(trace, optimum, q.tolerance);
      row.final_gap = trace.losses.back() - optimum;
      run.rows.push_back(row);

      const bool reached = row.iterations != kNotReached;
      iters.add_row({arm, format_number(rho), format_number(row.eta), format_number(row.kappa),
                     format_number(row.sigma_max),
                     reached ? format_number(row.iterations) : std::string(),
                     format_bool(reached), format_bool(row.diverged),
                     format_number(row.final_gap)});

      // Every iteration up to 100, then about 1000 evenly spaced samples.
      const std::size_t t_end = trace.losses.size();
      const std::size_t stride = std::max<std::size_t>(1, t_end / 1000);
      Series s{arm, {}, {}};
      for (std::size_t t = 0; t < t_end; ++t) {
        if (t > 100 && t % stride != 0 && t + 1 != t_end) continue;
        const double gap = trace.losses[t] - optimum;
        curves.add_row({arm, format_number(rho), format_number(t), format_number(gap)});
        s.x.push_back(static_cast<double>(t));
        s.y.push_back(gap);
      }
      plots[ri].series.push_back(std::move(s));
    }
  }

  run.artifacts.files = {{"curves.csv", curves.str()}, {"iterations.csv", iters.str()}};
  for (std::size_t ri = 0; ri < plots.size(); ++ri) {
    run.artifacts.files.push_back({"quad_rho_" + std::to_string(ri) + ".svg", emit_svg(plots[ri])});
  }
  json rows = json::array();
  for (const auto& r : run.rows) {
    rows.push_back({{"arm", r.arm},
                    {"rho", r.rho},
                    {"kappa", r.kappa},
                    {"iterations", r.iterations == kNotReached ? json(nullptr) : json(r.iterations)},
                    {"diverged", r.diverged}});
  }
  run.artifacts.summary_json =
      summary_text({{"n", n}, {"kappa_a", base.kappa()}, {"optimum_loss", optimum}, {"runs", rows}});
  return run;
}

// ---- Training comparison -----------------------------------------------

std::vector<net::LayerSpec> arm_architecture(const TrainConfig& cfg, const std::string& arm) {
  if (std::find(arm_names().begin(), arm_names().end(), arm) == arm_names().end()) {
    throw InvalidArgument("unknown arm '" + arm + "'");
  }
  std::vector<net::LayerSpec> arch = cfg.arch;
  const std::size_t last = arch.size() - 1;
  const bool bn = arm.rfind("bn", 0) == 0;
  for (std::size_t k = 0; k < arch.size(); ++k) {
    auto& s = arch[k];
    s.axis = cfg.axis;
    s.batch_norm = bn && k < last;
    s.weight_norm = net::WeightNorm::none;
    s.conditioning = net::Conditioning::none;
    const bool conditioned = cfg.conditioned_layers == "all" || k < last;
    if (!conditioned) continue;
    if (arm == "bn_ws") s.weight_norm = net::WeightNorm::standardize;
    if (arm == "bn_wn") s.weight_norm = net::WeightNorm::normalize;
    if (arm == "e_reparam" || (arm == "bn_e" && cfg.bn_e_mode == "reparam")) {
      s.conditioning = net::Conditioning::equilibrate_reparam;
    }
    if (arm == "e_static" || (arm == "bn_e" && cfg.bn_e_mode == "static")) {
      s.conditioning = net::Conditioning::equilibrate_static;
    }
  }
  return arch;
}

net::Network arm_network(const TrainConfig& cfg, const std::string& arm, std::uint64_t init_seed) {
  net::Network n(arm_architecture(cfg, arm), init_seed);
  // Static arms equilibrate the stored weights once; training then runs on them.
  for (std::size_t k = 0; k < n.layer_count(); ++k) {
    if (n.specs()[k].conditioning == net::Conditioning::equilibrate_static) {
      n.set_weight(k, net::equilibrated(n.weight(k), n.specs()[k].axis));
    }
  }
  return n;
}

namespace {

std::string train_csv(const net::TrainTrace& tr, std::size_t layers) {
  std::vector<std::string> header = {"epoch", "train_loss", "eval_loss", "accuracy"};
  for (std::size_t k = 0; k < layers; ++k) header.push_back("kappa_w_" + std::to_string(k));
  for (std::size_t k = 0; k < layers; ++k) header.push_back("kappa_ew_" + std::to_string(k));
  CsvTable t(std::move(header));
  auto opt = [](const std::vector<double>& v, std::size_t i) {
    return i < v.size() ? format_number(v[i]) : std::string();
  };
  auto kappa = [&](const std::vector<std::vector<double>>& v, std::size_t e, std::size_t k) {
    return e < v.size() && k < v[e].size() ? format_number(v[e][k]) : std::string();
  };
  for (std::size_t e = 0; e < tr.epochs(); ++e) {
    std::vector<std::string> row = {format_number(e + 1), format_number(tr.train_loss[e]),
                                    opt(tr.eval_loss, e), opt(tr.accuracy, e)};
    for (std::size_t k = 0; k < layers; ++k) row.push_back(kappa(tr.kappa_w, e, k));
    for (std::size_t k = 0; k < layers; ++k) row.push_back(kappa(tr.kappa_ew, e, k));
    t.add_row(std::move(row));
  }
  return t.str();
}

}  // namespace

TrainRun run_train_compare(const ExperimentConfig& cfg) {
  const TrainConfig& tc = cfg.train;
  const net::Dataset data = make_dataset(tc.dataset, derive_seed(cfg.seed, "dataset"));
  const std::uint64_t init_seed = derive_seed(cfg.seed, "init");
  const std::uint64_t schedule_seed = derive_seed(cfg.seed, "schedule");

  auto options = [&](double lr, std::size_t epochs, bool record_kappa) {
    net::TrainOptions o;
    o.loss = tc.loss;
    o.sgd.lr = lr;
    o.sgd.momentum = tc.momentum;
    o.epochs = epochs;
    o.batch_size = tc.batch_size;
    o.seed = schedule_seed;
    o.record_kappa = record_kappa;
    return o;
  };

  TrainRun run;
  TrainCompareResult& r = run.result;
  const std::size_t n_arms = tc.arms.size();
  r.arms.resize(n_arms);
  std::vector<double> wall(n_arms, 0.0);
  parallel_for(n_arms, tc.threads, [&](std::size_t i) {
    ArmResult& a = r.arms[i];
    a.name = tc.arms[i];
    net::Network pre(arm_architecture(tc, a.name), init_seed);
    a.init_hash = net::shared_param_hash(pre);
    net::Network net = arm_network(tc, a.name, init_seed);
    const auto t0 = Clock::now();
    a.trace = net::train(net, data, options(tc.lr, tc.epochs, true));
    wall[i] = std::chrono::duration<double>(Clock::now() - t0).count();
    a.median_wall_time_per_step = median(a.trace.wall_time_per_step);
  });

  const auto& ref = r.arms.front().trace;
  r.reference_final_loss = ref.train_loss.empty() ? ref.initial_loss : ref.train_loss.back();
  r.shared_init = r.shared_schedule = true;
  for (auto& a : r.arms) {
    a.epochs_to_reference = net::epochs_to_threshold(a.trace, r.reference_final_loss);
    r.shared_init = r.shared_init && a.init_hash == r.arms.front().init_hash;
    r.shared_schedule = r.shared_schedule && a.trace.schedule_hash == ref.schedule_hash;
  }

  // Learning-rate sweep: diverged when non-finite or the loss ends above
  // divergence_factor times where it started.
  r.max_stable_lr.assign(n_arms, 0.0);
  const std::size_t n_lr = tc.lr_sweep.size();
  std::vector<SweepRow> sweep(n_arms * n_lr);
  parallel_for(sweep.size(), tc.threads, [&](std::size_t idx) {
    const std::size_t i = idx / n_lr, j = idx % n_lr;
    SweepRow& s = sweep[idx];
    s.arm = tc.arms[i];
    s.lr = tc.lr_sweep[j];
    net::Network net = arm_network(tc, s.arm, init_seed);
    const auto tr = net::train(net, data, options(s.lr, tc.sweep_epochs, false));
    s.final_loss = tr.train_loss.empty() ? std::numeric_limits<double>::quiet_NaN()
                                         : tr.train_loss.back();
    s.diverged = tr.diverged || !(s.final_loss <= tc.divergence_factor * tr.initial_loss);
  });
  r.sweep = sweep;
  for (const auto& s : sweep) {
    const std::size_t i = static_cast<std::size_t>(
        std::find(tc.arms.begin(), tc.arms.end(), s.arm) - tc.arms.begin());
    if (!s.diverged) r.max_stable_lr[i] = std::max(r.max_stable_lr[i], s.lr);
  }

  // Artifacts.
  Plot loss_plot;
  loss_plot.title = "Training loss";
  loss_plot.x_label = "epoch";
  loss_plot.y_label = "train loss";
  loss_plot.log_y = true;
  CsvTable summary({"arm", "initial_loss", "final_loss", "epochs_to_reference", "diverged",
                    "max_stable_lr", "init_hash", "schedule_hash"});
  json arms_json = json::array();
  for (std::size_t i = 0; i < n_arms; ++i) {
    const ArmResult& a = r.arms[i];
    const std::string file = "train_" + a.name + ".csv";
    run.artifacts.files.push_back({file, train_csv(a.trace, tc.arch.size())});
    Series s{a.name, {0.0}, {a.trace.initial_loss}};
    for (std::size_t e = 0; e < a.trace.epochs(); ++e) {
      s.x.push_back(static_cast<double>(e + 1));
      s.y.push_back(a.trace.train_loss[e]);
    }
    loss_plot.series.push_back(std::move(s));
    const double final_loss = a.trace.train_loss.empty() ? a.trace.initial_loss
                                                         : a.trace.train_loss.back();
    summary.add_row({a.name, format_number(a.trace.initial_loss), format_number(final_loss),
                     format_number(a.epochs_to_reference), format_bool(a.trace.diverged),
                     format_number(r.max_stable_lr[i]), format_hex(a.init_hash),
                     format_hex(a.trace.schedule_hash)});
    arms_json.push_back({{"name", a.name},
                         {"final_loss", final_loss},
                         {"epochs_to_reference", a.epochs_to_reference},
                         {"diverged", a.trace.diverged},
                         {"max_stable_lr", r.max_stable_lr[i]}});
    ArmRecord rec;
    rec.name = a.name;
    rec.diverged = a.trace.diverged;
    rec.files = {file};
    rec.wall_time_s = wall[i];
    rec.wall_time_per_step_s = a.median_wall_time_per_step;
    run.artifacts.arms.push_back(std::move(rec));
  }
  run.artifacts.files.push_back({"summary.csv", summary.str()});
  run.artifacts.files.push_back({"loss.svg", emit_svg(loss_plot)});

  if (n_lr > 0) {
    CsvTable t({"arm", "lr", "diverged", "final_loss"});
    Plot p;
    p.title = "Learning-rate sweep";
    p.x_label = "log10(lr)";
    p.y_label = "final train loss";
    p.log_y = true;
    for (std::size_t i = 0; i < n_arms; ++i) {
      Series s{tc.arms[i], {}, {}};
      for (std::size_t j = 0; j < n_lr; ++j) {
        const SweepRow& row = sweep[i * n_lr + j];
        t.add_row({row.arm, format_number(row.lr), format_bool(row.diverged),
                   format_number(row.final_loss)});
        s.x.push_back(std::log10(row.lr));
        s.y.push_back(row.diverged ? std::numeric_limits<double>::quiet_NaN() : row.final_loss);
      }
      p.series.push_back(std::move(s));
    }
    run.artifacts.files.push_back({"lr_sweep.csv", t.str()});
    run.artifacts.files.push_back({"lr_sweep.svg", emit_svg(p)});
  }

  run.artifacts.summary_json = summary_text({{"reference_arm", r.arms.front().name},
                                             {"reference_final_loss", r.reference_final_loss},
                                             {"shared_init", r.shared_init},
                                             {"shared_schedule", r.shared_schedule},
                                             {"arms", arms_json}});
  return run;
}

// ---- Hessian comparison ------------------------------------------------

HessianRun run_hessian_compare(const ExperimentConfig& cfg) {
  const HessianConfig& h = cfg.hessian;
  const net::Dataset data = make_dataset(h.dataset, derive_seed(cfg.seed, "dataset"));
  Theorem2Config tc;
  tc.arch = h.arch;
  for (auto& s : tc.arch) s.axis = h.axis;
  tc.loss = h.loss;
  tc.n_points = h.n_points;
  tc.seed = cfg.seed;
  tc.rank_tol = h.rank_tol;
  tc.tolerance = h.tolerance;
  tc.reference.loss = h.loss;
  tc.reference.sgd.lr = h.reference_lr;
  tc.reference.sgd.momentum = h.reference_momentum;
  tc.reference.epochs = h.reference_epochs;
  tc.reference.batch_size = h.reference_batch_size;
  tc.reference.seed = derive_seed(cfg.seed, "hessian.reference");
  tc.reference.record_kappa = false;

  HessianRun run;
  run.result = compare_theorem2(tc, data);
  const Theorem2Result& r = run.result;

  CsvTable kappa({"seed", "phase", "kappa_plain", "kappa_eq", "rank_ok_plain", "rank_ok_eq"});
  CsvTable detail({"seed", "phase", "kappa_plain", "kappa_eq", "surviving_plain", "surviving_eq",
                   "gradient_check_ok"});
  CsvTable violations({"seed", "phase", "kappa_plain", "kappa_eq", "ratio"});
  Series plain{"plain", {}, {}}, eq{"equilibrated", {}, {}};
  std::size_t grad_failures = 0;
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const auto& p = r.points[i];
    kappa.add_row({format_number(p.theta_seed), p.phase, format_number(p.kappa_plain),
                   format_number(p.kappa_eq), format_bool(p.rank_ok_plain),
                   format_bool(p.rank_ok_eq)});
    detail.add_row({format_number(p.theta_seed), p.phase, format_number(p.kappa_plain),
                    format_number(p.kappa_eq), format_number(p.surviving_plain),
                    format_number(p.surviving_eq), format_bool(p.gradient_check_ok)});
    grad_failures += !p.gradient_check_ok;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    plain.x.push_back(static_cast<double>(i));
    eq.x.push_back(static_cast<double>(i));
    plain.y.push_back(p.both_full_rank() ? p.kappa_plain : nan);
    eq.y.push_back(p.both_full_rank() ? p.kappa_eq : nan);
  }
  for (const auto& v : r.violations) {
    violations.add_row({format_number(v.theta_seed), v.phase, format_number(v.kappa_plain),
                        format_number(v.kappa_eq), format_number(v.kappa_eq / v.kappa_plain)});
  }
  Plot plot;
  plot.title = "Hessian condition numbers";
  plot.x_label = "point";
  plot.y_label = "kappa(H)";
  plot.log_y = true;
  plot.series = {plain, eq};

  run.artifacts.files = {{"kappa.csv", kappa.str()},
                         {"kappa_detail.csv", detail.str()},
                         {"violations.csv", violations.str()},
                         {"kappa.svg", emit_svg(plot)}};
  const auto full = r.comparisons();
  run.artifacts.summary_json = summary_text({{"points", r.points.size()},
                                             {"full_rank_points", full.size()},
                                             {"satisfied", r.satisfied},
                                             {"satisfied_fraction", r.satisfied_fraction()},
                                             {"violations", r.violations.size()},
                                             {"gradient_check_failures", grad_failures}});
  return run;
}

// ---- Conditioning report -----------------------------------------------

CondRun run_cond_report(const ExperimentConfig& cfg, const Matrix& a) {
  CondRun run;
  CsvTable t({"kind", "rows", "cols", "kappa_before", "kappa_after", "seed"});
  json rows = json::array();
  for (const auto& k : cfg.cond.kinds) {
    const PrecondKind kind = k == "row_equilibration"      ? PrecondKind::row_equilibration
                             : k == "column_equilibration" ? PrecondKind::column_equilibration
                             : k == "jacobi"               ? PrecondKind::jacobi
                                                           : PrecondKind::custom;
    const ConditioningReport rep = conditioning_report(a, kind, cfg.seed);
    run.rows.push_back(rep);
    t.add_row({k, format_number(rep.rows), format_number(rep.cols), format_number(rep.kappa_before),
               format_number(rep.kappa_after), format_number(rep.seed)});
    rows.push_back({{"kind", k}, {"kappa_before", rep.kappa_before}, {"kappa_after", rep.kappa_after}});
  }
  run.artifacts.files = {{"cond.csv", t.str()}};
  run.artifacts.summary_json = summary_text({{"rows", a.rows()}, {"cols", a.cols()}, {"reports", rows}});
  return run;
}

// ---- Dispatch ------------------------------------------------------------

RunOutcome execute(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& matrix_file) {
  validate(cfg);
  RunTiming timing;
  timing.started = std::chrono::system_clock::now();
  RunOutcome out;
  std::string extra;
  switch (cfg.kind) {
    case ExperimentKind::vds: out.artifacts = run_vds(cfg).artifacts; break;
    case ExperimentKind::quad: out.artifacts = run_quad(cfg).artifacts; break;
    case ExperimentKind::train_compare: out.artifacts = run_train_compare(cfg).artifacts; break;
    case ExperimentKind::hessian_compare: out.artifacts = run_hessian_compare(cfg).artifacts; break;
    case ExperimentKind::cond_report: {
      if (!matrix_file) throw ConfigError("cond_report needs a matrix file");
      std::ifstream in(*matrix_file, std::ios::binary);
      if (!in) throw ConfigError("cannot open matrix file " + matrix_file->string());
      extra.assign(std::istreambuf_iterator<char>(in), {});
      std::istringstream text(extra);
      out.artifacts = run_cond_report(cfg, read_matrix(text)).artifacts;
      break;
    }
  }
  timing.finished = std::chrono::system_clock::now();
  out.hash = config_hash(cfg, extra);
  out.directory = write_run(cfg, out.hash, out.artifacts, timing);
  return out;
}

}  // namespace wcond::harness
