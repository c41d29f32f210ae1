/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "superyolo/error.hpp"

namespace superyolo::train {

namespace {

constexpr char kMagic[4] = {'S', 'Y', 'C', 'K'};
constexpr const char* kOptimizerPrefix = "optimizer.";

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename U>
void put(std::string& out, U v) {
  char buf[sizeof(U)];
  std::memcpy(buf, &v, sizeof(U));
  out.append(buf, sizeof(U));
}

template <typename U>
U take(const std::string& in, size_t pos) {
  U v;
  std::memcpy(&v, in.data() + pos, sizeof(U));
  return v;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json tensors = nlohmann::json::array();
  std::vector<const nn::Tensor<float>*> order;
  uint64_t offset = 0;
  auto add = [&](const std::string& name, const nn::Tensor<float>& t) {
    if (!t.defined() || t.is_meta()) throw ConfigError("cannot store undefined tensor '" + name + "'");
    const auto& s = t.shape();
    const uint64_t nbytes = static_cast<uint64_t>(t.numel()) * sizeof(float);
    tensors.push_back({{"name", name}, {"dtype", "f32"}, {"shape", {s.n, s.c, s.h, s.w}}, {"offset", offset},
                       {"nbytes", nbytes}});
    order.push_back(&t);
    offset += nbytes;
  };
  for (const auto& [name, t] : ckpt.weights) add(name, t);
  nlohmann::json state = nlohmann::json::array();
  for (const auto& [name, t] : ckpt.optimizer) {
    add(kOptimizerPrefix + name, t);
    state.push_back(name);
  }
  const nlohmann::json manifest = {{"format_version", kCheckpointVersion},
                                   {"config", ckpt.config},
                                   {"epoch", ckpt.epoch},
                                   {"step", ckpt.step},
                                   {"metric_history", ckpt.metric_history},
                                   {"tensors", tensors},
                                   {"optimizer", {{"kind", "sgd"}, {"state", state}}}};
  const std::string text = manifest.dump();
  std::string out(kMagic, 4);
  put<uint32_t>(out, kCheckpointVersion);
  put<uint64_t>(out, text.size());
  out += text;
  out.reserve(out.size() + offset);
  for (const auto* t : order) out.append(reinterpret_cast<const char*>(t->data()), t->numel() * sizeof(float));
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes, const std::string& source) {
  const auto fail = [&](const std::string& what) { throw IoError(source + ": " + what); };
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) fail("not a superyolo checkpoint");
  const auto version = take<uint32_t>(bytes, 4);
  if (version != kCheckpointVersion) fail("unsupported checkpoint version " + std::to_string(version));
  const auto len = take<uint64_t>(bytes, 8);
  if (len > bytes.size() - 16) fail("truncated manifest");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.substr(16, len));
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("malformed manifest: ") + e.what());
  }
  const size_t payload = 16 + len;
  Checkpoint ckpt;
  try {
    ckpt.config = manifest.at("config");
    ckpt.epoch = manifest.at("epoch").get<int>();
    ckpt.step = manifest.at("step").get<int64_t>();
    ckpt.metric_history = manifest.at("metric_history");
    for (const auto& entry : manifest.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      if (entry.at("dtype").get<std::string>() != "f32") fail("tensor '" + name + "' has unsupported dtype");
      const auto dims = entry.at("shape").get<std::vector<int64_t>>();
      if (dims.size() != 4) fail("tensor '" + name + "' is not 4-dimensional");
      const nn::Shape shape{dims[0], dims[1], dims[2], dims[3]};
      const auto off = entry.at("offset").get<uint64_t>();
      const auto nbytes = entry.at("nbytes").get<uint64_t>();
      if (nbytes != static_cast<uint64_t>(shape.numel()) * sizeof(float)) fail("tensor '" + name + "' size mismatch");
      if (off > bytes.size() - payload || nbytes > bytes.size() - payload - off) fail("tensor '" + name + "' truncated");
      std::vector<float> values(shape.numel());
      std::memcpy(values.data(), bytes.data() + payload + off, nbytes);
      nn::Tensor<float> t(shape, std::move(values));
      if (name.rfind(kOptimizerPrefix, 0) == 0)
        ckpt.optimizer.emplace(name.substr(std::strlen(kOptimizerPrefix)), std::move(t));
      else
        ckpt.weights.emplace(name, std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("malformed manifest: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("cannot write " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("cannot write " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str(), path);
}

Checkpoint export_inference(const Checkpoint& ckpt) {
  Checkpoint out;
  out.config = ckpt.config;
  out.config["model"]["sr_enabled"] = false;
  out.epoch = ckpt.epoch;
  out.step = ckpt.step;
  out.metric_history = ckpt.metric_history;
  for (const auto& [name, t] : ckpt.weights)
    if (name.rfind("sr.", 0) != 0) out.weights.emplace(name, t);
  return out;
}

}  // namespace superyolo::train
