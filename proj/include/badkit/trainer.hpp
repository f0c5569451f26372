#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "badkit/augment.hpp"
#include "badkit/checkpoint.hpp"
#include "badkit/fbank.hpp"
#include "badkit/metrics.hpp"
#include "badkit/model.hpp"

namespace badkit {

struct TrainConfig {
  double base_lr = 0.019326;
  double momentum = 0.9;
  std::size_t batch_size = 10;
  std::size_t epochs = 30;
  std::size_t lr_halving_epoch = 8;  // halve once after this many epochs
  double avg_auc_threshold = 0.94;
  double finetune_lr_scale = 1e-3;
  std::size_t finetune_epochs = 10;
  std::uint64_t seed = 1234;
  AugmentConfig augment;

  void validate() const {
    if (base_lr <= 0 || momentum < 0 || batch_size == 0)
      throw std::invalid_argument("TrainConfig: lr/momentum/batch_size invalid");
    if (avg_auc_threshold <= 0.0 || avg_auc_threshold >= 1.0)
      throw std::invalid_argument("TrainConfig: avg_auc_threshold must be in (0,1)");
    augment.validate();
  }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double valid_err = 0.0;
  double valid_auc = 0.0;
  std::string checkpoint_ref;
};

struct LabeledImage {
  std::string item_id;
  int label = 0;
  FbankImage image;
};

using DataSet = std::vector<LabeledImage>;

/// Fixed LR for the first lr_halving_epoch epochs, half of it afterwards.
inline double lr_schedule(std::size_t epoch, const TrainConfig& cfg) {
  if (epoch < 1) throw std::invalid_argument("lr_schedule: epochs are 1-based");
  return epoch <= cfg.lr_halving_epoch ? cfg.base_lr : cfg.base_lr / 2.0;
}

/// Nesterov momentum step: v <- mu*v - lr*g; p <- p + mu*v - lr*g.
/// Velocities persist on the parameters across steps.
inline void nesterov_update(const std::vector<ParamTensor<float>*>& params, double lr,
                            double momentum) {
  const float flr = static_cast<float>(lr);
  const float mu = static_cast<float>(momentum);
  for (ParamTensor<float>* p : params) {
    float* v = p->velocity.data.data();
    float* w = p->value.data.data();
    const float* g = p->grad.data.data();
    const std::size_t n = p->value.size();
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = mu * v[i] - flr * g[i];
      w[i] += mu * v[i] - flr * g[i];
    }
  }
}

namespace detail {

inline void check_dataset(const DataSet& data, const ArchConfig& cfg, const char* what) {
  for (const auto& item : data)
    if (item.image.frames != cfg.input_frames || item.image.bands != cfg.input_bands)
      throw std::invalid_argument(std::string(what) + ": item '" + item.item_id +
                                  "' has shape " + std::to_string(item.image.frames) + "x" +
                                  std::to_string(item.image.bands) + ", model expects " +
                                  std::to_string(cfg.input_frames) + "x" +
                                  std::to_string(cfg.input_bands));
}

inline void fill_batch_row(Tensor<float>& batch, std::size_t row, const FbankImage& img) {
  std::copy(img.values.begin(), img.values.end(),
            batch.data.begin() + static_cast<std::ptrdiff_t>(row * img.values.size()));
}

}  // namespace detail

/// Inference scores (positive-class probability) for a dataset, in order.
/// Results are independent of eval_batch grouping.
inline PredictionSet predict_set(const Model<float>& model, const DataSet& data,
                                 std::size_t eval_batch = 32) {
  detail::check_dataset(data, model.config, "predict_set");
  PredictionSet preds;
  preds.reserve(data.size());
  const std::size_t F = model.config.input_frames, Bn = model.config.input_bands;
  for (std::size_t start = 0; start < data.size(); start += eval_batch) {
    const std::size_t b = std::min(eval_batch, data.size() - start);
    Tensor<float> batch({b, 1, F, Bn});
    for (std::size_t i = 0; i < b; ++i)
      detail::fill_batch_row(batch, i, data[start + i].image);
    const Tensor<float> probs = model.forward_infer(batch);
    for (std::size_t i = 0; i < b; ++i) {
      PredRow row;
      row.item_id = data[start + i].item_id;
      row.score = probs.at2(i, 1);
      row.label = data[start + i].label;
      preds.push_back(std::move(row));
    }
  }
  return preds;
}

struct EvalResult {
  double loss = 0.0, err = 0.0, auc = 0.0;
};

/// Loss, argmax error rate and AUC in inference mode, no augmentation.
inline EvalResult evaluate_dataset(const Model<float>& model, const DataSet& data,
                                   std::size_t eval_batch = 32) {
  if (data.empty()) throw std::invalid_argument("evaluate_dataset: empty dataset");
  detail::check_dataset(data, model.config, "evaluate_dataset");
  const std::size_t F = model.config.input_frames, Bn = model.config.input_bands;
  double total_loss = 0.0;
  std::size_t errors = 0;
  PredictionSet preds;
  preds.reserve(data.size());
  for (std::size_t start = 0; start < data.size(); start += eval_batch) {
    const std::size_t b = std::min(eval_batch, data.size() - start);
    Tensor<float> batch({b, 1, F, Bn});
    std::vector<int> labels(b);
    for (std::size_t i = 0; i < b; ++i) {
      detail::fill_batch_row(batch, i, data[start + i].image);
      labels[i] = data[start + i].label;
    }
    ModelTape<float> tape;
    const Tensor<float> probs = model.forward_infer(batch, &tape);
    const auto xr = softmax_xent(tape.logits, labels);
    total_loss += xr.loss * static_cast<double>(b);
    for (std::size_t i = 0; i < b; ++i) {
      std::size_t argmax = 0;
      for (std::size_t j = 1; j < model.config.n_classes; ++j)
        if (probs.at2(i, j) > probs.at2(i, argmax)) argmax = j;
      if (argmax != static_cast<std::size_t>(labels[i])) ++errors;
      preds.push_back({data[start + i].item_id, probs.at2(i, 1), labels[i]});
    }
  }
  EvalResult res;
  res.loss = total_loss / static_cast<double>(data.size());
  res.err = static_cast<double>(errors) / static_cast<double>(data.size());
  res.auc = roc_auc(preds);
  return res;
}

inline double accuracy(const Model<float>& model, const DataSet& data) {
  return 1.0 - evaluate_dataset(model, data).err;
}

namespace detail {

/// One pass over the items in the given order: augment, forward (train
/// mode), backward, Nesterov update per mini-batch. Returns mean batch loss.
inline double run_epoch(Model<float>& model, const DataSet& data,
                        const std::vector<std::size_t>& order, double lr,
                        const TrainConfig& cfg, rng::Engine& gen) {
  const std::size_t F = model.config.input_frames, Bn = model.config.input_bands;
  auto params = model.parameters();
  double total_loss = 0.0;
  std::size_t n_batches = 0;
  ModelTape<float> tape;
  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    const std::size_t b = std::min(cfg.batch_size, order.size() - start);
    Tensor<float> batch({b, 1, F, Bn});
    std::vector<int> labels(b);
    for (std::size_t i = 0; i < b; ++i) {
      const LabeledImage& item = data[order[start + i]];
      const FbankImage img = augment_image(item.image, cfg.augment, gen);
      fill_batch_row(batch, i, img);
      labels[i] = item.label;
    }
    model.zero_grads();
    model.forward_train(batch, tape);
    const auto xr = softmax_xent(tape.logits, labels);
    if (!std::isfinite(xr.loss))
      throw std::runtime_error("training diverged: non-finite loss at batch " +
                               std::to_string(n_batches + 1) + " (lr=" + std::to_string(lr) + ")");
    model.backward(tape, xr.dlogits);
    nesterov_update(params, lr, cfg.momentum);
    total_loss += xr.loss;
    ++n_batches;
  }
  return n_batches ? total_loss / static_cast<double>(n_batches) : 0.0;
}

}  // namespace detail

struct TrainResult {
  std::vector<EpochRecord> records;
  std::vector<Checkpoint> checkpoints;  // one per epoch, in epoch order
  double final_train_acc = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&, const Checkpoint&)>;

/// The full training recipe: seeded per-epoch shuffle, mini-batches with
/// on-the-fly augmentation, Nesterov updates, one LR halving, per-epoch
/// validation (inference mode, no augmentation) and checkpointing. With a
/// fixed seed the whole trajectory is reproducible bit for bit.
inline TrainResult train(Model<float>& model, const DataSet& train_set, const DataSet& valid_set,
                         const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  if (valid_set.empty()) throw std::invalid_argument("train: empty validation set");
  detail::check_dataset(train_set, model.config, "train");
  detail::check_dataset(valid_set, model.config, "train(valid)");

  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng::Engine gen = rng::make_engine(cfg.seed, epoch);  // per-epoch stream
    rng::shuffle(order, gen);
    const double lr = lr_schedule(epoch, cfg);
    double train_loss;
    try {
      train_loss = detail::run_epoch(model, train_set, order, lr, cfg, gen);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("epoch " + std::to_string(epoch) + ": " + e.what());
    }

    const EvalResult val = evaluate_dataset(model, valid_set);
    Checkpoint ck = snapshot(model, static_cast<int>(epoch), val.auc);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss;
    rec.valid_loss = val.loss;
    rec.valid_err = val.err;
    rec.valid_auc = val.auc;
    rec.checkpoint_ref = "epoch:" + std::to_string(epoch);
    if (on_epoch) on_epoch(rec, ck);
    result.records.push_back(rec);
    result.checkpoints.push_back(std::move(ck));
  }
  result.final_train_acc = accuracy(model, train_set);
  return result;
}

/// Items whose argmax prediction (inference mode, no augmentation) differs
/// from the label. Returns indices into the dataset.
inline std::vector<std::size_t> select_hard_samples(const Model<float>& model,
                                                    const DataSet& data) {
  const PredictionSet preds = predict_set(model, data);
  std::vector<std::size_t> hard;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int decided = preds[i].score > 0.5 ? 1 : 0;  // argmax; exact tie goes to class 0
    if (decided != data[i].label) hard.push_back(i);
  }
  return hard;
}

inline DataSet subset(const DataSet& data, const std::vector<std::size_t>& indices) {
  DataSet out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(data[i]);
  return out;
}

/// Fine-tune on hard samples only, at base_lr * finetune_lr_scale (constant)
/// for finetune_epochs epochs of the standard loop.
inline void fine_tune(Model<float>& model, const DataSet& hard_samples, const TrainConfig& cfg) {
  cfg.validate();
  if (hard_samples.empty()) throw std::invalid_argument("fine_tune: empty hard-sample set");
  detail::check_dataset(hard_samples, model.config, "fine_tune");
  const double lr = cfg.base_lr * cfg.finetune_lr_scale;
  std::vector<std::size_t> order(hard_samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t epoch = 1; epoch <= cfg.finetune_epochs; ++epoch) {
    rng::Engine gen = rng::make_engine(cfg.seed, 0xf1000000ull + epoch);
    rng::shuffle(order, gen);
    detail::run_epoch(model, hard_samples, order, lr, cfg, gen);
  }
}

/// Elementwise mean of all tensors (running statistics included) over the
/// checkpoints whose validation AUC meets the threshold. Equal weighting;
/// commutes with checkpoint order up to rounding.
inline Checkpoint average_parameters(const std::vector<Checkpoint>& checkpoints,
                                     double auc_threshold) {
  std::vector<const Checkpoint*> selected;
  for (const auto& ck : checkpoints)
    if (ck.valid_auc >= auc_threshold) selected.push_back(&ck);
  if (selected.empty())
    throw std::runtime_error("average_parameters: no checkpoint reaches AUC threshold " +
                             std::to_string(auc_threshold));

  Checkpoint avg = *selected.front();
  double auc_sum = 0.0;
  for (const auto* ck : selected) auc_sum += ck->valid_auc;
  for (std::size_t m = 1; m < selected.size(); ++m) {
    const Checkpoint& ck = *selected[m];
    if (ck.tensors.size() != avg.tensors.size())
      throw std::runtime_error("average_parameters: checkpoints disagree on tensor count");
    for (std::size_t t = 0; t < avg.tensors.size(); ++t) {
      if (ck.tensors[t].first != avg.tensors[t].first ||
          !ck.tensors[t].second.same_shape(avg.tensors[t].second))
        throw std::runtime_error("average_parameters: checkpoints disagree on tensor " +
                                 avg.tensors[t].first);
      add_inplace(avg.tensors[t].second, ck.tensors[t].second);
    }
  }
  const float inv = 1.0f / static_cast<float>(selected.size());
  for (auto& [name, tensor] : avg.tensors)
    for (auto& v : tensor.data) v *= inv;
  avg.epoch = 0;
  avg.valid_auc = auc_sum / static_cast<double>(selected.size());
  return avg;
}

}  // namespace badkit
