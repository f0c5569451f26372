#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "badkit/layers.hpp"
#include "badkit/rng.hpp"
#include "badkit/tensor.hpp"

namespace badkit {

enum class BlockType { Plain, Residual, Dense };

inline std::string to_string(BlockType t) {
  switch (t) {
    case BlockType::Plain: return "plain";
    case BlockType::Residual: return "residual";
    case BlockType::Dense: return "dense";
  }
  return "dense";
}

inline BlockType block_type_from_string(const std::string& s) {
  if (s == "plain") return BlockType::Plain;
  if (s == "residual") return BlockType::Residual;
  if (s == "dense") return BlockType::Dense;
  throw std::invalid_argument("unknown block type: " + s);
}

/// Declarative architecture. Defaults give the full-size dense model,
/// 325,414 trainable parameters.
struct ArchConfig {
  BlockType block_type = BlockType::Dense;
  std::size_t n_blocks = 3;
  std::size_t layers_per_block = 5;
  std::size_t initial_filters = 24;
  std::size_t growth_rate = 14;
  std::size_t input_frames = 200;
  std::size_t input_bands = 56;
  std::size_t n_classes = 2;

  void validate() const {
    if (n_blocks == 0 || layers_per_block == 0 || initial_filters == 0 || n_classes < 2 ||
        input_frames == 0 || input_bands == 0)
      throw std::invalid_argument("ArchConfig: counts must be positive");
    if (block_type == BlockType::Dense && growth_rate == 0)
      throw std::invalid_argument("ArchConfig: dense blocks need growth_rate >= 1");
  }

  // channels entering block b (0-based)
  std::size_t block_in_channels(std::size_t b) const {
    return block_type == BlockType::Dense ? initial_filters + b * layers_per_block * growth_rate
                                          : initial_filters;
  }
  // channels entering unit i (0-based) of block b
  std::size_t unit_in_channels(std::size_t b, std::size_t i) const {
    return block_type == BlockType::Dense ? block_in_channels(b) + i * growth_rate
                                          : initial_filters;
  }
  std::size_t unit_out_channels() const {
    return block_type == BlockType::Dense ? growth_rate : initial_filters;
  }
  std::size_t block_out_channels(std::size_t b) const {
    return block_type == BlockType::Dense
               ? block_in_channels(b) + layers_per_block * growth_rate
               : initial_filters;
  }
  std::size_t final_channels() const { return block_out_channels(n_blocks - 1); }

  std::string serialize() const {
    std::ostringstream os;
    os << "block_type=" << to_string(block_type) << "\n"
       << "n_blocks=" << n_blocks << "\n"
       << "layers_per_block=" << layers_per_block << "\n"
       << "initial_filters=" << initial_filters << "\n"
       << "growth_rate=" << growth_rate << "\n"
       << "input_frames=" << input_frames << "\n"
       << "input_bands=" << input_bands << "\n"
       << "n_classes=" << n_classes << "\n";
    return os.str();
  }

  static ArchConfig deserialize(const std::string& text) {
    ArchConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::map<std::string, std::string> kv;
    while (std::getline(is, line)) {
      const auto pos = line.find('=');
      if (pos == std::string::npos) continue;
      kv[line.substr(0, pos)] = line.substr(pos + 1);
    }
    auto need = [&](const char* key) {
      auto it = kv.find(key);
      if (it == kv.end()) throw std::runtime_error(std::string("ArchConfig: missing key ") + key);
      return it->second;
    };
    cfg.block_type = block_type_from_string(need("block_type"));
    cfg.n_blocks = std::stoul(need("n_blocks"));
    cfg.layers_per_block = std::stoul(need("layers_per_block"));
    cfg.initial_filters = std::stoul(need("initial_filters"));
    cfg.growth_rate = std::stoul(need("growth_rate"));
    cfg.input_frames = std::stoul(need("input_frames"));
    cfg.input_bands = std::stoul(need("input_bands"));
    cfg.n_classes = std::stoul(need("n_classes"));
    cfg.validate();
    return cfg;
  }
};

// Per-layer caches for one forward pass. Owned by the caller, so inference
// forward on a shared model is const and thread-safe.
template <typename T>
struct UnitTape {
  BatchNormCache<T> bn;
  ReluCache<T> relu;
  Conv2DCache<T> conv;
};

template <typename T>
struct BlockTape {
  std::vector<UnitTape<T>> units;
  Conv2DCache<T> transition;
  MaxPoolCache<T> pool;
};

template <typename T>
struct ModelTape {
  Conv2DCache<T> init_conv;
  std::vector<BlockTape<T>> blocks;
  GlobalMeanPoolCache<T> gpool;
  DenseCache<T> head;
  Tensor<T> logits;
};

/// BN -> ReLU -> Conv(3x3, same, stride 1) unit.
template <typename T>
struct ConvUnit {
  BatchNorm2D<T> bn;
  Conv2D<T> conv;
};

/// One architecture block: layers_per_block units wired per block type,
/// then a transition of 1x1 conv (channel preserving) + 2x2 max pool.
template <typename T>
struct ModelBlock {
  std::vector<ConvUnit<T>> units;
  Conv2D<T> transition;
};

/// Reference to a named model tensor; running stats are not trainable.
template <typename T>
struct NamedTensorRef {
  std::string name;
  Tensor<T>* tensor;
  ParamTensor<T>* param;  // null for non-trainable buffers
};

template <typename T>
struct Model {
  ArchConfig config;
  std::uint64_t rng_seed = 0;
  Conv2D<T> init_conv;
  std::vector<ModelBlock<T>> blocks;
  Dense<T> head;

  // ---------------------------------------------------------- construction

  static Model build(const ArchConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Model m;
    m.config = cfg;
    m.rng_seed = seed;
    rng::Engine gen = rng::make_engine(seed, 0x6d6f64 /* "mod" */);
    m.init_conv.init(1, cfg.initial_filters, 3, 3, ConvMode::Same, 1, gen);
    m.blocks.resize(cfg.n_blocks);
    for (std::size_t b = 0; b < cfg.n_blocks; ++b) {
      auto& block = m.blocks[b];
      block.units.resize(cfg.layers_per_block);
      for (std::size_t i = 0; i < cfg.layers_per_block; ++i) {
        const std::size_t cin = cfg.unit_in_channels(b, i);
        block.units[i].bn.init(cin);
        block.units[i].conv.init(cin, cfg.unit_out_channels(), 3, 3, ConvMode::Same, 1, gen);
      }
      const std::size_t cout = cfg.block_out_channels(b);
      block.transition.init(cout, cout, 1, 1, ConvMode::Same, 1, gen);
    }
    m.head.init(cfg.final_channels(), cfg.n_classes, gen);
    return m;
  }

  // ------------------------------------------------------------- parameters

  std::vector<NamedTensorRef<T>> named_tensors() {
    std::vector<NamedTensorRef<T>> refs;
    refs.push_back({"init_conv.kernel", &init_conv.kernel.value, &init_conv.kernel});
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const std::string bp = "block" + std::to_string(b + 1) + ".";
      for (std::size_t i = 0; i < blocks[b].units.size(); ++i) {
        const std::string up = bp + "unit" + std::to_string(i + 1) + ".";
        auto& unit = blocks[b].units[i];
        refs.push_back({up + "bn.gamma", &unit.bn.gamma.value, &unit.bn.gamma});
        refs.push_back({up + "bn.beta", &unit.bn.beta.value, &unit.bn.beta});
        refs.push_back({up + "bn.running_mean", &unit.bn.running_mean, nullptr});
        refs.push_back({up + "bn.running_var", &unit.bn.running_var, nullptr});
        refs.push_back({up + "conv.kernel", &unit.conv.kernel.value, &unit.conv.kernel});
      }
      refs.push_back({bp + "transition.kernel", &blocks[b].transition.kernel.value,
                      &blocks[b].transition.kernel});
    }
    refs.push_back({"output.weight", &head.weight.value, &head.weight});
    refs.push_back({"output.bias", &head.bias.value, &head.bias});
    return refs;
  }

  std::vector<ParamTensor<T>*> parameters() {
    std::vector<ParamTensor<T>*> out;
    for (auto& ref : named_tensors())
      if (ref.param) out.push_back(ref.param);
    return out;
  }

  /// Trainable parameter elements; batch-norm running stats excluded.
  std::size_t param_count() const {
    std::size_t total = init_conv.kernel.size();
    for (const auto& block : blocks) {
      for (const auto& unit : block.units)
        total += unit.bn.gamma.size() + unit.bn.beta.size() + unit.conv.kernel.size();
      total += block.transition.kernel.size();
    }
    total += head.weight.size() + head.bias.size();
    return total;
  }

  void zero_grads() {
    for (auto* p : parameters()) p->zero_grad();
  }

  // ----------------------------------------------------------------- forward

  /// Train-mode forward (batch statistics; updates running stats).
  /// Returns softmax probabilities; logits are left on the tape.
  Tensor<T> forward_train(const Tensor<T>& x, ModelTape<T>& tape) {
    return forward_impl<false>(x, &tape);
  }

  /// Inference-mode forward (running statistics). Deterministic and const;
  /// concurrent calls with separate tapes are safe. The tape may be null
  /// when no backward pass is needed.
  Tensor<T> forward_infer(const Tensor<T>& x, ModelTape<T>* tape = nullptr) const {
    return const_cast<Model*>(this)->template forward_impl<true>(x, tape);
  }

  // ---------------------------------------------------------------- backward

  /// Training backward from d(logits); accumulates parameter gradients and
  /// returns the input-image gradient.
  Tensor<T> backward(const ModelTape<T>& tape, const Tensor<T>& dlogits) {
    return backward_impl(tape, dlogits, ReluMode::Standard, true);
  }

  /// Gradient of a scalar in logit space w.r.t. the input, without touching
  /// parameter gradients. Const: safe on a shared model (saliency).
  Tensor<T> input_gradient(const ModelTape<T>& tape, const Tensor<T>& dlogits,
                           ReluMode relu_mode) const {
    return const_cast<Model*>(this)->backward_impl(tape, dlogits, relu_mode, false);
  }

 private:
  template <bool kInfer>
  Tensor<T> forward_impl(const Tensor<T>& x, ModelTape<T>* tape) {
    require_shape(x.rank() == 4 && x.dim(1) == 1 && x.dim(2) == config.input_frames &&
                      x.dim(3) == config.input_bands,
                  "model input, expected [batch,1," + std::to_string(config.input_frames) + "," +
                      std::to_string(config.input_bands) + "]");
    if (tape) tape->blocks.resize(blocks.size());

    Tensor<T> h = init_conv.forward(x, tape ? &tape->init_conv : nullptr);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      BlockTape<T>* bt = tape ? &tape->blocks[b] : nullptr;
      if (bt) bt->units.resize(blocks[b].units.size());
      h = block_forward<kInfer>(blocks[b], h, bt);
    }
    Tensor<T> pooled = global_mean_pool_forward(h, tape ? &tape->gpool : nullptr);
    Tensor<T> logits = head.forward(pooled, tape ? &tape->head : nullptr);
    if (tape) tape->logits = logits;
    return softmax_rows(logits);
  }

  template <bool kInfer>
  Tensor<T> unit_forward(ConvUnit<T>& unit, const Tensor<T>& x, UnitTape<T>* ut) {
    Tensor<T> h;
    if constexpr (kInfer) {
      h = unit.bn.forward_infer(x, ut ? &ut->bn : nullptr);
    } else {
      h = unit.bn.forward_train(x, ut->bn);
    }
    h = relu_forward(h, ut ? &ut->relu : nullptr);
    return unit.conv.forward(h, ut ? &ut->conv : nullptr);
  }

  template <bool kInfer>
  Tensor<T> block_forward(ModelBlock<T>& block, const Tensor<T>& x, BlockTape<T>* bt) {
    Tensor<T> out;
    switch (config.block_type) {
      case BlockType::Dense: {
        std::vector<Tensor<T>> feats;
        feats.reserve(block.units.size() + 1);
        feats.push_back(x);
        for (std::size_t i = 0; i < block.units.size(); ++i) {
          std::vector<const Tensor<T>*> parts;
          for (const auto& f : feats) parts.push_back(&f);
          const Tensor<T> input = concat_channels(parts);
          feats.push_back(
              unit_forward<kInfer>(block.units[i], input, bt ? &bt->units[i] : nullptr));
        }
        std::vector<const Tensor<T>*> parts;
        for (const auto& f : feats) parts.push_back(&f);
        out = concat_channels(parts);
        break;
      }
      case BlockType::Plain: {
        out = x;
        for (std::size_t i = 0; i < block.units.size(); ++i)
          out = unit_forward<kInfer>(block.units[i], out, bt ? &bt->units[i] : nullptr);
        break;
      }
      case BlockType::Residual: {
        out = x;
        for (std::size_t i = 0; i < block.units.size(); ++i) {
          Tensor<T> f = unit_forward<kInfer>(block.units[i], out, bt ? &bt->units[i] : nullptr);
          add_inplace(f, out);
          out = std::move(f);
        }
        break;
      }
    }
    Tensor<T> t = block.transition.forward(out, bt ? &bt->transition : nullptr);
    return maxpool2x2_forward(t, bt ? &bt->pool : nullptr);
  }

  Tensor<T> unit_backward(ConvUnit<T>& unit, const UnitTape<T>& ut, const Tensor<T>& dy,
                          ReluMode relu_mode, bool accum) {
    Tensor<T> dr = unit.conv.backward(ut.conv, dy, accum ? &unit.conv.kernel.grad : nullptr);
    Tensor<T> dh = relu_backward(ut.relu, dr, relu_mode);
    return unit.bn.backward(ut.bn, dh, accum ? &unit.bn.gamma.grad : nullptr,
                            accum ? &unit.bn.beta.grad : nullptr);
  }

  Tensor<T> block_backward(ModelBlock<T>& block, const BlockTape<T>& bt, const Tensor<T>& dout,
                           std::size_t block_index, ReluMode relu_mode, bool accum) {
    Tensor<T> dpool = maxpool2x2_backward(bt.pool, dout);
    Tensor<T> dcat = block.transition.backward(bt.transition, dpool,
                                               accum ? &block.transition.kernel.grad : nullptr);
    const std::size_t L = block.units.size();
    switch (config.block_type) {
      case BlockType::Dense: {
        std::vector<std::size_t> sizes;
        sizes.push_back(config.block_in_channels(block_index));
        for (std::size_t i = 0; i < L; ++i) sizes.push_back(config.unit_out_channels());
        std::vector<Tensor<T>> dfeats = split_channels(dcat, sizes);
        for (std::size_t i = L; i-- > 0;) {
          Tensor<T> dinput =
              unit_backward(block.units[i], bt.units[i], dfeats[i + 1], relu_mode, accum);
          std::vector<std::size_t> in_sizes(sizes.begin(), sizes.begin() + i + 1);
          std::vector<Tensor<T>> dparts = split_channels(dinput, in_sizes);
          for (std::size_t j = 0; j <= i; ++j) add_inplace(dfeats[j], dparts[j]);
        }
        return std::move(dfeats[0]);
      }
      case BlockType::Plain: {
        Tensor<T> dy = std::move(dcat);
        for (std::size_t i = L; i-- > 0;)
          dy = unit_backward(block.units[i], bt.units[i], dy, relu_mode, accum);
        return dy;
      }
      case BlockType::Residual: {
        Tensor<T> dy = std::move(dcat);
        for (std::size_t i = L; i-- > 0;) {
          Tensor<T> df = unit_backward(block.units[i], bt.units[i], dy, relu_mode, accum);
          add_inplace(dy, df);
        }
        return dy;
      }
    }
    throw std::logic_error("unreachable block type");
  }

  Tensor<T> backward_impl(const ModelTape<T>& tape, const Tensor<T>& dlogits, ReluMode relu_mode,
                          bool accum) {
    Tensor<T> dpooled = head.backward(tape.head, dlogits, accum ? &head.weight.grad : nullptr,
                                      accum ? &head.bias.grad : nullptr);
    Tensor<T> dh = global_mean_pool_backward(tape.gpool, dpooled);
    for (std::size_t b = blocks.size(); b-- > 0;)
      dh = block_backward(blocks[b], tape.blocks[b], dh, b, relu_mode, accum);
    return init_conv.backward(tape.init_conv, dh, accum ? &init_conv.kernel.grad : nullptr);
  }
};

/// build_model is deterministic: same config and seed give identical weights.
inline Model<float> build_model(const ArchConfig& cfg, std::uint64_t seed) {
  return Model<float>::build(cfg, seed);
}

}  // namespace badkit
