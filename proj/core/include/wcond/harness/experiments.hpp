#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wcond/harness/config.hpp"
#include "wcond/harness/output.hpp"
#include "wcond/hessian.hpp"
#include "wcond/matrix.hpp"
#include "wcond/net/train.hpp"
#include "wcond/precond.hpp"

namespace wcond::harness {

// ---- Van der Sluis / equilibration sweep ---------------------------------

struct VdsRow {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double kappa_a = 0.0;
  double kappa_ea = 0.0;
  double kappa_pa = 0.0;
  double ratio = 0.0;  // kappa_ea / kappa_pa
  bool equil_ok = false;
  bool vds_ok = false;       // kappa_ea <= kappa_pa
  bool vds_sqrt_ok = false;  // kappa_ea <= sqrt(rows) * kappa_pa
};

struct VdsResult {
  std::vector<VdsRow> rows;  // full-rank trials only
  std::vector<std::uint64_t> excluded_seeds;  // rank-deficient trials
  std::vector<std::uint64_t> equil_violation_seeds;
  double max_ratio = 0.0;
  double frac_unrelaxed = 0.0;
  double frac_sqrt = 0.0;
  double frac_equil = 0.0;
};

/// One trial, reproducible from its seed alone.
std::optional<VdsRow> vds_trial_from_seed(const VdsConfig& cfg, std::uint64_t trial_seed);

struct VdsRun {
  VdsResult result;
  Artifacts artifacts;
};
VdsRun run_vds(const ExperimentConfig& cfg);

// ---- Quadratic demo ----------------------------------------------------

struct QuadRow {
  std::string arm;
  double rho = 0.0;
  double eta = 0.0;
  double kappa = 0.0;      // of the arm's operator (A or PA)
  double sigma_max = 0.0;  // of the arm's operator
  std::size_t iterations = 0;  // to tolerance; kNotReached when never
  bool diverged = false;
  double final_gap = 0.0;
};

struct QuadRun {
  std::vector<QuadRow> rows;
  Artifacts artifacts;
};
QuadRun run_quad(const ExperimentConfig& cfg);

// ---- Training comparison -----------------------------------------------

struct ArmResult {
  std::string name;
  net::TrainTrace trace;
  std::uint64_t init_hash = 0;  // of the shared weights/biases before any conditioning
  /// First epoch reaching the reference arm's final loss (0 = never).
  std::size_t epochs_to_reference = 0;
  double median_wall_time_per_step = 0.0;
};

struct SweepRow {
  std::string arm;
  double lr = 0.0;
  bool diverged = false;
  double final_loss = 0.0;
};

struct TrainCompareResult {
  std::vector<ArmResult> arms;
  /// The first arm is the reference; its final training loss is the threshold.
  double reference_final_loss = 0.0;
  bool shared_init = false;
  bool shared_schedule = false;
  std::vector<SweepRow> sweep;
  /// Per arm (same order as `arms`): largest swept lr that did not diverge, 0 if none.
  std::vector<double> max_stable_lr;
};

/// The architecture an arm trains (before static conditioning is applied).
std::vector<net::LayerSpec> arm_architecture(const TrainConfig& cfg, const std::string& arm);
/// Builds the arm's initial network from the shared init seed.
net::Network arm_network(const TrainConfig& cfg, const std::string& arm, std::uint64_t init_seed);

struct TrainRun {
  TrainCompareResult result;
  Artifacts artifacts;
};
TrainRun run_train_compare(const ExperimentConfig& cfg);

// ---- Hessian comparison ------------------------------------------------

struct HessianRun {
  Theorem2Result result;
  Artifacts artifacts;
};
HessianRun run_hessian_compare(const ExperimentConfig& cfg);

// ---- Conditioning report -----------------------------------------------

struct CondRun {
  std::vector<ConditioningReport> rows;
  Artifacts artifacts;
};
CondRun run_cond_report(const ExperimentConfig& cfg, const Matrix& a);

// ---- Dispatch ------------------------------------------------------------

struct RunOutcome {
  std::filesystem::path directory;
  std::uint64_t hash = 0;
  Artifacts artifacts;
};

/// Runs the configured experiment and writes its run directory. The
/// cond_report kind needs `matrix_file`.
RunOutcome execute(const ExperimentConfig& cfg,
                   const std::optional<std::filesystem::path>& matrix_file = std::nullopt);

}  // namespace wcond::harness
