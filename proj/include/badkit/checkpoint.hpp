#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "badkit/binio.hpp"
#include "badkit/model.hpp"

namespace badkit {

constexpr char kCheckpointMagic[] = "BADCKPT1";  // 8 bytes on disk
constexpr std::uint32_t kCheckpointVersion = 1;

/// Full model state: architecture, every named tensor (parameters and
/// batch-norm running statistics), plus the epoch index and validation AUC
/// recorded when the snapshot was taken.
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  ArchConfig config;
  int epoch = 0;
  double valid_auc = 0.0;
  std::vector<std::pair<std::string, Tensor<float>>> tensors;
};

inline Checkpoint snapshot(Model<float>& model, int epoch, double valid_auc) {
  Checkpoint ck;
  ck.config = model.config;
  ck.epoch = epoch;
  ck.valid_auc = valid_auc;
  for (auto& ref : model.named_tensors()) ck.tensors.emplace_back(ref.name, *ref.tensor);
  return ck;
}

/// Overwrite a model's tensors from a checkpoint. Names and shapes must
/// match the model exactly.
inline void restore(Model<float>& model, const Checkpoint& ck) {
  std::map<std::string, const Tensor<float>*> by_name;
  for (const auto& [name, tensor] : ck.tensors) by_name[name] = &tensor;
  auto refs = model.named_tensors();
  if (refs.size() != ck.tensors.size())
    throw std::runtime_error("checkpoint: tensor count mismatch");
  for (auto& ref : refs) {
    auto it = by_name.find(ref.name);
    if (it == by_name.end()) throw std::runtime_error("checkpoint: missing tensor " + ref.name);
    if (it->second->shape != ref.tensor->shape)
      throw std::runtime_error("checkpoint: shape mismatch for " + ref.name);
    *ref.tensor = *it->second;
  }
  // Restored running stats are usable for inference.
  for (auto& block : model.blocks)
    for (auto& unit : block.units)
      if (unit.bn.train_steps == 0) unit.bn.train_steps = 1;
}

inline Model<float> to_model(const Checkpoint& ck) {
  Model<float> m = build_model(ck.config, 0);
  restore(m, ck);
  return m;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
  binio::write_tag(os, kCheckpointMagic, 8);
  binio::write_u32(os, ck.version);

  std::ostringstream meta;
  meta << ck.config.serialize();
  meta << "meta.epoch=" << ck.epoch << "\n";
  meta.precision(17);
  meta << "meta.valid_auc=" << ck.valid_auc << "\n";
  const std::string meta_str = meta.str();
  binio::write_u32(os, static_cast<std::uint32_t>(meta_str.size()));
  os.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));

  binio::write_u32(os, static_cast<std::uint32_t>(ck.tensors.size()));
  for (const auto& [name, tensor] : ck.tensors) {
    binio::write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    binio::write_u32(os, static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t d : tensor.shape) binio::write_u32(os, static_cast<std::uint32_t>(d));
    for (float v : tensor.data) binio::write_f32(os, v);
  }
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  if (binio::read_tag(is, 8) != kCheckpointMagic)
    throw std::runtime_error("not a checkpoint file: " + path);
  Checkpoint ck;
  ck.version = binio::read_u32(is);
  if (ck.version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(ck.version) +
                             ": " + path);

  const std::uint32_t meta_len = binio::read_u32(is);
  std::string meta(meta_len, '\0');
  is.read(meta.data(), meta_len);
  if (!is) throw std::runtime_error("truncated checkpoint: " + path);
  ck.config = ArchConfig::deserialize(meta);
  {
    std::istringstream ms(meta);
    std::string line;
    while (std::getline(ms, line)) {
      const auto pos = line.find('=');
      if (pos == std::string::npos) continue;
      const std::string key = line.substr(0, pos);
      if (key == "meta.epoch") ck.epoch = std::stoi(line.substr(pos + 1));
      if (key == "meta.valid_auc") ck.valid_auc = std::stod(line.substr(pos + 1));
    }
  }

  const std::uint32_t count = binio::read_u32(is);
  ck.tensors.reserve(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t name_len = binio::read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw std::runtime_error("truncated checkpoint: " + path);
    const std::uint32_t rank = binio::read_u32(is);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = binio::read_u32(is);
    Tensor<float> tensor(shape);
    for (auto& v : tensor.data) v = binio::read_f32(is);
    ck.tensors.emplace_back(std::move(name), std::move(tensor));
  }
  return ck;
}

}  // namespace badkit
