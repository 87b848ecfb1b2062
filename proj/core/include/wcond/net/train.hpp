#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wcond/net/dataset.hpp"
#include "wcond/net/loss.hpp"
#include "wcond/net/network.hpp"

namespace wcond::net {

struct SgdOptions {
  double lr = 0.01;
  double momentum = 0.0;
};

struct TrainOptions {
  LossKind loss = LossKind::mse;
  SgdOptions sgd;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;  // 0 = full batch
  std::uint64_t seed = 0;       // shuffle stream
  double bn_momentum = 0.1;
  bool record_kappa = true;
  const Dataset* eval = nullptr;
  /// Called after each completed epoch (1-based) with the updated network.
  std::function<void(std::size_t, const Network&)> on_epoch;
};

/// Per-epoch records. Losses are full-dataset losses in eval phase after the
/// epoch's updates.
struct TrainTrace {
  double initial_loss = 0.0;
  std::vector<double> train_loss;
  std::vector<double> eval_loss;
  std::vector<double> accuracy;  // classification (bce) only
  std::vector<double> wall_time_per_step;  // seconds
  /// [epoch][layer]: kappa of the stored W_k and of E_k W_k. NaN when rank-deficient.
  std::vector<std::vector<double>> kappa_w;
  std::vector<std::vector<double>> kappa_ew;
  bool diverged = false;
  std::vector<std::string> log;
  /// Fingerprints of the shared initial weights/biases and of the batch schedule.
  std::uint64_t init_hash = 0;
  std::uint64_t schedule_hash = 0;

  std::size_t epochs() const noexcept { return train_loss.size(); }
};

struct LossAndGrad {
  double loss;
  Vector grad;
};

/// Loss of the network on (x, y) and its gradient w.r.t. the parameters.
LossAndGrad loss_and_gradient(const Network& net, const Matrix& x, const Matrix& y, LossKind loss,
                              Phase phase = Phase::train);

/// Full-dataset loss (no gradient).
double dataset_loss(const Network& net, const Dataset& data, LossKind loss,
                    Phase phase = Phase::eval);

/// Minibatch SGD. Deterministic given (net, data, options). Stops early and
/// sets `diverged` when the loss or an activation turns non-finite.
TrainTrace train(Network& net, const Dataset& data, const TrainOptions& options);

/// Fingerprint of the weights and biases only (the parameters shared by all arms).
std::uint64_t shared_param_hash(const Network& net);

/// First epoch (1-based) with train_loss <= threshold, 0 if never.
std::size_t epochs_to_threshold(const TrainTrace& trace, double threshold);

/// CSV: epoch,train_loss,eval_loss,accuracy,kappa_w_<k>...,kappa_ew_<k>...
/// Wall times are not part of it so that reruns are byte-identical.
void write_train_trace_csv(std::ostream& out, const TrainTrace& trace);

}  // namespace wcond::net
