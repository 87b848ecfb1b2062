#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wcond/net/dataset.hpp"
#include "wcond/net/layer.hpp"
#include "wcond/net/loss.hpp"

namespace wcond::harness {

/// Malformed or unknown configuration; the message names the offending key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { vds, quad, train_compare, hessian_compare, cond_report };

std::string_view to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(std::string_view s);

struct DatasetConfig {
  std::string kind = "teacher";  // teacher | two_moons | idx
  std::size_t samples = 256;
  // teacher
  std::size_t in_dim = 4;
  std::size_t hidden = 8;
  std::size_t out_dim = 1;
  double teacher_kappa = 1e3;
  double noise = 0.0;  // teacher output noise or two-moons jitter
  std::string teacher_activation = "tanh";
  // idx
  std::string images;
  std::string labels;
  std::uint32_t positive_label = 1;
};

struct VdsConfig {
  std::size_t rows = 16;
  std::size_t cols = 16;
  std::size_t trials = 1000;
  /// Row scales of A are log-uniform in [1/row_imbalance, row_imbalance].
  double row_imbalance = 1e3;
  /// "random": P log-uniform in [1/p_range, p_range]; "equilibration": P = E.
  std::string p_mode = "random";
  double p_range = 1e3;
  double rank_tol = 1e-12;
  /// Equilibration check: kappa(EA) <= kappa(A) * (1 + equil_tol).
  double equil_tol = 1e-9;
  std::size_t threads = 1;
};

struct QuadConfig {
  /// Explicit matrix (rows); when empty a random SPD matrix of size n and
  /// condition number kappa is drawn.
  std::vector<std::vector<double>> matrix;
  std::size_t n = 8;
  double kappa = 1e3;
  std::string rhs = "random";  // random | zero
  std::vector<double> rhos = {0.5, 0.9};
  /// none | row_equilibration | column_equilibration | row_column_equilibration | jacobi
  std::vector<std::string> arms = {"none", "row_equilibration", "jacobi"};
  std::size_t max_iters = 50000;
  double tolerance = 1e-8;  // loss gap L - L* that counts as converged
};

struct TrainConfig {
  DatasetConfig dataset;
  /// Base architecture; normalization/conditioning fields are set per arm.
  std::vector<net::LayerSpec> arch = {net::dense(4, 16, net::Activation::tanh), net::dense(16, 1)};
  net::LossKind loss = net::LossKind::mse;
  std::vector<std::string> arms = {"none", "e_reparam"};
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double lr = 0.01;
  double momentum = 0.0;
  net::EquilibrationAxis axis = net::EquilibrationAxis::output_units;
  /// Layers touched by WS/W/E: "all" or "hidden" (all but the last).
  std::string conditioned_layers = "all";
  /// How the BN+E arm conditions: "reparam" (every forward) or "static" (once).
  std::string bn_e_mode = "reparam";
  /// Learning rates for the divergence sweep; empty disables it.
  std::vector<double> lr_sweep;
  std::size_t sweep_epochs = 20;
  /// A sweep run counts as diverged when it goes non-finite or its final
  /// loss exceeds divergence_factor * initial loss.
  double divergence_factor = 1.0;
  std::size_t threads = 1;
};

struct HessianConfig {
  DatasetConfig dataset;
  std::vector<net::LayerSpec> arch = {net::dense(2, 8, net::Activation::tanh), net::dense(8, 1)};
  net::LossKind loss = net::LossKind::mse;
  net::EquilibrationAxis axis = net::EquilibrationAxis::output_units;
  std::size_t n_points = 40;
  double rank_tol = 1e-8;
  double tolerance = 1e-6;
  std::size_t reference_epochs = 40;
  double reference_lr = 0.05;
  double reference_momentum = 0.0;
  std::size_t reference_batch_size = 32;
};

struct CondConfig {
  /// row_equilibration | column_equilibration | jacobi
  std::vector<std::string> kinds = {"row_equilibration", "column_equilibration", "jacobi"};
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::vds;
  std::uint64_t seed = 0;
  /// Parent of the per-run directory; not part of the config hash.
  std::string output_dir = "runs";
  VdsConfig vds;
  QuadConfig quad;
  TrainConfig train;
  HessianConfig hessian;
  CondConfig cond;
};

/// Defaults for `kind` (the hessian dataset defaults to the 2-D teacher).
ExperimentConfig default_config(ExperimentKind kind);

/// Parses a JSON document. Top level: {"experiment", "seed", "output_dir",
/// and one section named after the experiment}. Every object rejects keys it
/// does not know. Missing keys keep their defaults.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Validates ranges and cross-field constraints; throws ConfigError.
void validate(const ExperimentConfig& cfg);

/// Normalized JSON (sorted keys, every default filled in, only the active
/// section). Settings that cannot change results (output_dir, thread counts)
/// are left out, so they do not change the hash either.
std::string canonical_json(const ExperimentConfig& cfg);

/// FNV-1a of canonical_json plus `extra` (e.g. an input file's bytes).
std::uint64_t config_hash(const ExperimentConfig& cfg, std::string_view extra = {});

/// Builds the dataset a config describes (seeded by `seed`).
net::Dataset make_dataset(const DatasetConfig& d, std::uint64_t seed);

/// Names accepted in TrainConfig::arms.
const std::vector<std::string>& arm_names();

}  // namespace wcond::harness
