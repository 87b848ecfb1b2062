#include "wcond/net/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "wcond/rng.hpp"
#include "wcond/svd.hpp"

namespace wcond::net {

namespace {

struct Fnv {
  std::uint64_t h = kFnvOffset;
  void bytes(const void* p, std::size_t n) {
    h = fnv1a64(std::string_view(static_cast<const char*>(p), n), h);
  }
  template <class T>
  void value(const T& v) {
    bytes(&v, sizeof v);
  }
};

double safe_kappa(const Matrix& m) {
  try {
    return condition_number(m);
  } catch (const RankDeficientError&) {
    return std::numeric_limits<double>::quiet_NaN();
  } catch (const InvalidArgument&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

void record_kappa(const Network& net, TrainTrace& tr) {
  std::vector<double> kw, kew;
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const Matrix w = net.weight(k);
    kw.push_back(safe_kappa(w));
    kew.push_back(safe_kappa(equilibrated(w, net.specs()[k].axis)));
  }
  tr.kappa_w.push_back(std::move(kw));
  tr.kappa_ew.push_back(std::move(kew));
}

bool has_batch_norm(const Network& net) {
  for (const auto& s : net.specs())
    if (s.batch_norm) return true;
  return false;
}

// Batch boundaries over a permutation; a trailing batch of one sample is merged
// into its predecessor so batch norm always sees at least two rows.
std::vector<std::pair<std::size_t, std::size_t>> batch_bounds(std::size_t n, std::size_t bs) {
  if (bs == 0 || bs > n) bs = n;
  std::vector<std::pair<std::size_t, std::size_t>> b;
  for (std::size_t s = 0; s < n; s += bs) b.emplace_back(s, std::min(n, s + bs));
  if (b.size() > 1 && b.back().second - b.back().first == 1) {
    b[b.size() - 2].second = b.back().second;
    b.pop_back();
  }
  return b;
}

}  // namespace

LossAndGrad loss_and_gradient(const Network& net, const Matrix& x, const Matrix& y, LossKind loss,
                              Phase phase) {
  const auto fr = net.forward(x, phase);
  const auto lv = evaluate_loss(loss, fr.output, y);
  return {lv.value, net.backward(fr, lv.grad)};
}

double dataset_loss(const Network& net, const Dataset& data, LossKind loss, Phase phase) {
  const auto fr = net.forward(data.x, phase);
  return evaluate_loss(loss, fr.output, data.y).value;
}

std::uint64_t shared_param_hash(const Network& net) {
  Fnv f;
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const auto p = net.layer_params(k);
    f.bytes(p.weight.data(), p.weight.size_bytes());
    f.bytes(p.bias.data(), p.bias.size_bytes());
  }
  return f.h;
}

TrainTrace train(Network& net, const Dataset& data, const TrainOptions& opt) {
  if (data.size() == 0) throw InvalidArgument("train: empty dataset");
  if (!(opt.sgd.lr >= 0.0) || !std::isfinite(opt.sgd.lr)) {
    throw InvalidArgument("train: lr must be finite and >= 0");
  }
  if (opt.sgd.momentum < 0.0 || opt.sgd.momentum >= 1.0) {
    throw InvalidArgument("train: momentum must lie in [0, 1)");
  }
  if (has_batch_norm(net) && data.size() < 2) {
    throw InvalidArgument("train: batch norm needs at least two samples");
  }

  TrainTrace tr;
  tr.init_hash = shared_param_hash(net);
  Fnv schedule;
  Rng shuffle(derive_seed(opt.seed, "shuffle"));
  Vector velocity(net.param_count(), 0.0);
  const auto bounds = batch_bounds(data.size(), opt.batch_size);
  const bool classify = opt.loss == LossKind::bce;

  try {
    tr.initial_loss = dataset_loss(net, data, opt.loss);
  } catch (const NonFiniteError& e) {
    tr.diverged = true;
    tr.log.push_back(std::string("initial forward: ") + e.what());
    return tr;
  }

  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    const auto perm = shuffle.permutation(data.size());
    for (auto i : perm) schedule.value(static_cast<std::uint64_t>(i));
    for (const auto& [b, e] : bounds) schedule.value(static_cast<std::uint64_t>(e - b));

    double step_seconds = 0.0;
    try {
      for (const auto& [b, e] : bounds) {
        const auto batch = data.subset(std::span<const std::size_t>(perm).subspan(b, e - b));
        const auto t0 = std::chrono::steady_clock::now();
        const auto fr = net.forward(batch.x, Phase::train);
        const auto lv = evaluate_loss(opt.loss, fr.output, batch.y);
        if (!std::isfinite(lv.value)) throw NonFiniteError("train loss", epoch);
        const Vector g = net.backward(fr, lv.grad);
        auto theta = net.params();
        for (std::size_t i = 0; i < theta.size(); ++i) {
          velocity[i] = opt.sgd.momentum * velocity[i] + g[i];
          theta[i] -= opt.sgd.lr * velocity[i];
        }
        step_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (std::size_t k = 0; k < net.layer_count(); ++k) {
          if (fr.layers[k].bn) {
            update_running_stats(net.bn_states()[k], *fr.layers[k].bn,
                                 fr.layers[k].act_in.rows(), opt.bn_momentum);
          }
        }
        for (auto& m : fr.floor_log) tr.log.push_back("epoch " + std::to_string(epoch + 1) + ": " + m);
      }
      const double loss = dataset_loss(net, data, opt.loss);
      if (!std::isfinite(loss)) throw NonFiniteError("epoch loss", epoch);
      tr.train_loss.push_back(loss);
      if (opt.eval) tr.eval_loss.push_back(dataset_loss(net, *opt.eval, opt.loss));
      if (classify) {
        tr.accuracy.push_back(binary_accuracy(net.forward(data.x, Phase::eval).output, data.y));
      }
      tr.wall_time_per_step.push_back(step_seconds / static_cast<double>(bounds.size()));
      if (opt.record_kappa) record_kappa(net, tr);
      if (opt.on_epoch) opt.on_epoch(epoch + 1, net);
    } catch (const NonFiniteError& e) {
      tr.diverged = true;
      tr.log.push_back("diverged at epoch " + std::to_string(epoch + 1) + ": " + e.what());
      break;
    } catch (const InvalidArgument& e) {
      // Non-finite weights surface as Matrix construction failures in kappa bookkeeping.
      tr.diverged = true;
      tr.log.push_back("diverged at epoch " + std::to_string(epoch + 1) + ": " + e.what());
      break;
    }
  }
  tr.schedule_hash = schedule.h;
  return tr;
}

std::size_t epochs_to_threshold(const TrainTrace& trace, double threshold) {
  for (std::size_t e = 0; e < trace.train_loss.size(); ++e)
    if (trace.train_loss[e] <= threshold) return e + 1;
  return 0;
}

void write_train_trace_csv(std::ostream& out, const TrainTrace& tr) {
  const auto old = out.precision(17);
  const std::size_t layers = tr.kappa_w.empty() ? 0 : tr.kappa_w.front().size();
  out << "epoch,train_loss,eval_loss,accuracy";
  for (std::size_t k = 0; k < layers; ++k) out << ",kappa_w_" << k;
  for (std::size_t k = 0; k < layers; ++k) out << ",kappa_ew_" << k;
  out << '\n';
  for (std::size_t e = 0; e < tr.train_loss.size(); ++e) {
    out << e + 1 << ',' << tr.train_loss[e] << ',';
    if (e < tr.eval_loss.size()) out << tr.eval_loss[e];
    out << ',';
    if (e < tr.accuracy.size()) out << tr.accuracy[e];
    if (e < tr.kappa_w.size()) {
      for (double v : tr.kappa_w[e]) out << ',' << v;
      for (double v : tr.kappa_ew[e]) out << ',' << v;
    }
    out << '\n';
  }
  out.precision(old);
}

}  // namespace wcond::net
