#include "tvgnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tvgnn/errors.hpp"
#include "tvgnn/rng.hpp"

namespace tvgnn::pipeline {

bool EarlyStopping::observe(std::size_t epoch, double value) {
  if (value < best) {
    best = value;
    best_epoch = epoch;
    since_improvement = 0;
    return true;
  }
  ++since_improvement;
  return false;
}

TrainOptions TrainOptions::from(const ModelConfig& cfg) {
  TrainOptions o;
  o.adam.lr = cfg.lr;
  o.adam.weight_decay = cfg.weight_decay;
  o.max_epochs = cfg.max_epochs;
  o.patience = cfg.patience;
  return o;
}

namespace {

std::vector<char> loss_mask(const Sample& s) {
  std::vector<char> m(s.quarter->num_nodes());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = s.uses(i) ? 1 : 0;
  return m;
}

Tensor label_column(const QuarterData& q, int tau) {
  const std::size_t col = horizon_column(tau);
  Tensor t = Tensor::matrix(q.num_nodes(), 1);
  for (std::size_t i = 0; i < q.num_nodes(); ++i) t(i, 0) = q.labels(i, col);
  return t;
}

ag::Var sample_loss(const TvgnnModel& model, const Sample& s) {
  const auto mask = loss_mask(s);
  const ag::Var pred = model.forward(*s.quarter).predictions;
  const auto& hs = model.horizons();
  ag::Var total;
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const ag::Var col = hs.size() == 1 ? pred : ag::slice_cols(pred, k, 1);
    const ag::Var l = ag::masked_mse(col, label_column(*s.quarter, hs[k]), mask);
    total = total.defined() ? ag::add(total, l) : l;
  }
  return hs.size() == 1 ? total : ag::scale(total, 1.0 / static_cast<double>(hs.size()));
}

}  // namespace

double validation_mse(const TvgnnModel& model, std::span<const Sample> samples) {
  const auto& hs = model.horizons();
  std::vector<double> sq(hs.size(), 0.0);
  std::size_t count = 0;
  for (const auto& s : samples) {
    if (s.count() == 0) continue;
    const Tensor pred = model.forward(*s.quarter).predictions.value();
    for (std::size_t i = 0; i < s.quarter->num_nodes(); ++i) {
      if (!s.uses(i)) continue;
      ++count;
      for (std::size_t k = 0; k < hs.size(); ++k) {
        const double d = pred(i, k) - s.quarter->labels(i, horizon_column(hs[k]));
        sq[k] += d * d;
      }
    }
  }
  if (count == 0) throw DataError("validation set has no labeled nodes");
  return std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(count * hs.size());
}

TrainHistory train_model(TvgnnModel& model, std::span<const Sample> train, std::span<const Sample> val,
                         const TrainOptions& opts, AdamState* state) {
  std::vector<const Sample*> steps;
  for (const auto& s : train)
    if (s.count() > 0) steps.push_back(&s);
  if (steps.empty()) throw DataError("training set has no labeled nodes");

  if (opts.init_output_bias) {
    for (int tau : model.horizons()) {
      double acc = 0.0;
      std::size_t n = 0;
      for (const auto* s : steps) {
        for (std::size_t i = 0; i < s->quarter->num_nodes(); ++i) {
          if (!s->uses(i)) continue;
          acc += s->quarter->labels(i, horizon_column(tau));
          ++n;
        }
      }
      model.set_output_bias(tau, acc / static_cast<double>(n));
    }
  }

  AdamState local;
  AdamState& adam = state ? *state : local;
  TrainHistory hist;
  EarlyStopping stopper(opts.patience);
  ParamStore::Snapshot best = model.params().snapshot();

  auto record = [&](std::size_t epoch, double train_loss) {
    EpochRecord rec{epoch, train_loss, validation_mse(model, val), false};
    if (!std::isfinite(rec.val_mse)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": validation MSE is not finite");
    }
    rec.improved = stopper.observe(epoch, rec.val_mse);
    if (rec.improved) best = model.params().snapshot();
    hist.epochs.push_back(rec);
    if (opts.on_epoch) opts.on_epoch(model, rec);
  };

  record(0, std::nan(""));
  for (std::size_t epoch = 1; epoch <= opts.max_epochs && !stopper.should_stop(); ++epoch) {
    double loss_sum = 0.0;
    for (const auto* s : steps) {
      model.params().zero_grad();
      const ag::Var loss = sample_loss(model, *s);
      if (!std::isfinite(loss.item())) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": loss is not finite");
      }
      ag::backward(loss);
      try {
        adam_step(model.params(), adam, opts.adam);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
      }
      loss_sum += loss.item();
    }
    record(epoch, loss_sum / static_cast<double>(steps.size()));
  }
  model.params().zero_grad();
  model.params().restore(best);
  hist.best_epoch = stopper.best_epoch;
  hist.best_val = stopper.best;
  hist.stopped_early = stopper.should_stop();
  return hist;
}

BundleTraining train(const ModelConfig& cfg, std::span<const Sample> train_set, std::span<const Sample> val,
                     const TrainOptions& opts) {
  BundleTraining out{ModelBundle::create(cfg), {}};
  for (auto& m : out.bundle.models) out.histories.push_back(train_model(m, train_set, val, opts));
  return out;
}

BundleTraining train(const ModelConfig& cfg, std::span<const Sample> train_set, std::span<const Sample> val) {
  return train(cfg, train_set, val, TrainOptions::from(cfg));
}

TransductiveMasks transductive_split(const graph::QuarterGraph& graph, std::array<double, 3> ratios) {
  const std::size_t n = graph.num_nodes();
  if (n < 10) throw DataError("transductive_split: need at least 10 nodes, graph has " + std::to_string(n));
  if (!(ratios[0] > 0 && ratios[1] >= 0 && ratios[2] > 0)) throw ConfigError("transductive_split: invalid ratios");
  const double total = ratios[0] + ratios[1] + ratios[2];
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios[0] / total));
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios[1] / total));
  if (n_train + n_val >= n) throw DataError("transductive_split: ratios leave no test nodes");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = graph.nodes[a];
    const auto& y = graph.nodes[b];
    return x.call_date != y.call_date ? x.call_date < y.call_date : a < b;
  });
  TransductiveMasks m;
  m.train.assign(n, 0);
  m.val.assign(n, 0);
  m.test.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    auto& mask = r < n_train ? m.train : r < n_train + n_val ? m.val : m.test;
    mask[order[r]] = 1;
  }
  return m;
}

BundleTraining fine_tune(const ModelBundle& pretrained, const Sample& train_sample, const Sample& val,
                         const TrainOptions& opts) {
  BundleTraining out{pretrained.clone(), {}};
  TrainOptions o = opts;
  o.init_output_bias = false;
  const std::span<const Sample> tr(&train_sample, 1), va(&val, 1);
  for (auto& m : out.bundle.models) {
    AdamState fresh;
    out.histories.push_back(train_model(m, tr, va, o, &fresh));
  }
  return out;
}

}  // namespace tvgnn::pipeline
