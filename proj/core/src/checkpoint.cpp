// Copyright 2026 The fairsde Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fairsde/checkpoint.hpp"

#include <fstream>

#include "json_io.hpp"

namespace fairsde {

namespace json_io {

json encode(const Mlp& net) {
  json layers = json::array();
  for (const auto& layer : net.layers()) {
    layers.push_back({{"in", layer.in_dim()},
                      {"out", layer.out_dim()},
                      {"activation", activation_name(layer.activation)},
                      {"weight", layer.weight.data},
                      {"bias", layer.bias}});
  }
  return json{{"layers", std::move(layers)}};
}

Mlp mlp(const json& j) {
  std::vector<DenseLayer> layers;
  for (const auto& lj : j.at("layers")) {
    DenseLayer layer;
    const auto in = lj.at("in").get<std::size_t>();
    const auto out = lj.at("out").get<std::size_t>();
    layer.weight = Matrix(out, in);
    layer.weight.data = lj.at("weight").get<std::vector<double>>();
    if (layer.weight.data.size() != in * out) {
      throw CheckpointError("checkpoint: weight size does not match layer shape");
    }
    layer.bias = lj.at("bias").get<std::vector<double>>();
    layer.activation = parse_activation(lj.at("activation").get<std::string>());
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

json encode(const VirtualCenters& vc) {
  return json{{"groups", vc.num_groups},
              {"classes", vc.num_classes},
              {"dim", vc.dim()},
              {"values", vc.values.data}};
}

VirtualCenters centers(const json& j) {
  VirtualCenters vc;
  vc.num_groups = j.at("groups").get<int>();
  vc.num_classes = j.at("classes").get<int>();
  const auto dim = j.at("dim").get<std::size_t>();
  vc.values = Matrix(static_cast<std::size_t>(vc.num_groups * vc.num_classes), dim);
  vc.values.data = j.at("values").get<std::vector<double>>();
  if (vc.values.data.size() != vc.values.rows * dim) {
    throw CheckpointError("checkpoint: center values do not match shape");
  }
  return vc;
}

json encode(std::span<const EpochLog> log) {
  json arr = json::array();
  for (const auto& e : log) {
    arr.push_back({{"epoch", e.epoch},
                   {"L", e.loss},
                   {"L_disc", e.disc},
                   {"L_virt", e.virt},
                   {"L_div", e.div},
                   {"lr", e.lr},
                   {"val_accuracy", e.val_accuracy},
                   {"skipped_div", e.skipped_div}});
  }
  return arr;
}

std::vector<EpochLog> epoch_log(const json& j) {
  std::vector<EpochLog> log;
  for (const auto& e : j) {
    EpochLog entry;
    entry.epoch = e.at("epoch").get<int>();
    entry.loss = e.at("L").get<double>();
    entry.disc = e.at("L_disc").get<double>();
    entry.virt = e.at("L_virt").get<double>();
    entry.div = e.at("L_div").get<double>();
    entry.lr = e.at("lr").get<double>();
    entry.val_accuracy = e.value("val_accuracy", 0.0);
    entry.skipped_div = e.value("skipped_div", std::size_t{0});
    log.push_back(entry);
  }
  return log;
}

}  // namespace json_io

namespace {

using json_io::json;

json envelope(const std::string& kind, const SeedLineage& lineage) {
  return json{{"format", "fairsde-checkpoint"},
              {"version", kCheckpointVersion},
              {"model", kind},
              {"seed_lineage",
               {{"seed", lineage.seed},
                {"init", lineage.init},
                {"shuffle", lineage.shuffle},
                {"pairs", lineage.pairs},
                {"probe", lineage.probe}}}};
}

void write(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint '" + path.string() + "'");
  out << j.dump(1) << '\n';
  if (!out) throw CheckpointError("write failed for checkpoint '" + path.string() + "'");
}

json read(const std::filesystem::path& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw CheckpointError("checkpoint '" + path.string() + "' is not valid JSON: " +
                          e.what());
  }
  if (!j.is_object() || j.value("format", "") != "fairsde-checkpoint") {
    throw CheckpointError("'" + path.string() + "' is not a fairsde checkpoint");
  }
  if (j.value("version", 0) != kCheckpointVersion) {
    throw CheckpointError("checkpoint '" + path.string() + "' has unsupported version");
  }
  if (!kind.empty() && j.value("model", "") != kind) {
    throw CheckpointError("checkpoint '" + path.string() + "' holds a '" +
                          j.value("model", "") + "' model, expected '" + kind + "'");
  }
  return j;
}

template <typename Fn>
auto decode(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw CheckpointError("checkpoint '" + path.string() + "' is malformed: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError("checkpoint '" + path.string() + "' is malformed: " + e.what());
  }
}

json heads_json(const std::vector<Mlp>& heads) {
  json arr = json::array();
  for (const auto& h : heads) arr.push_back(json_io::encode(h));
  return arr;
}

std::vector<Mlp> heads_from(const json& arr) {
  std::vector<Mlp> heads;
  for (const auto& h : arr) heads.push_back(json_io::mlp(h));
  return heads;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ErmModel& model,
                     const SeedLineage& lineage) {
  json j = envelope("erm", lineage);
  j["backbone"] = json_io::encode(model.backbone);
  j["head"] = json_io::encode(model.head);
  j["log"] = json_io::encode(model.log);
  write(path, j);
}

void save_checkpoint(const std::filesystem::path& path, const DecoupledModel& model,
                     const SeedLineage& lineage) {
  json j = envelope("decoupled", lineage);
  j["heads"] = heads_json(model.heads);
  j["log"] = json_io::encode(model.log);
  write(path, j);
}

void save_checkpoint(const std::filesystem::path& path, const FairSdeModel& model,
                     const SeedLineage& lineage) {
  json j = envelope("fairsde", lineage);
  j["backbone"] = json_io::encode(model.backbone);
  j["disc"] = json_io::encode(model.disc);
  j["centers"] = json_io::encode(model.centers);
  j["heads"] = heads_json(model.heads);
  j["center_reinits"] = model.center_reinits;
  j["log"] = json_io::encode(model.log);
  write(path, j);
}

ErmModel load_erm_checkpoint(const std::filesystem::path& path) {
  const json j = read(path, "erm");
  return decode(path, [&] {
    ErmModel m;
    m.backbone = json_io::mlp(j.at("backbone"));
    m.head = json_io::mlp(j.at("head"));
    m.log = json_io::epoch_log(j.at("log"));
    return m;
  });
}

DecoupledModel load_decoupled_checkpoint(const std::filesystem::path& path) {
  const json j = read(path, "decoupled");
  return decode(path, [&] {
    DecoupledModel m;
    m.heads = heads_from(j.at("heads"));
    m.log = json_io::epoch_log(j.at("log"));
    return m;
  });
}

FairSdeModel load_fairsde_checkpoint(const std::filesystem::path& path) {
  const json j = read(path, "fairsde");
  return decode(path, [&] {
    FairSdeModel m;
    m.backbone = json_io::mlp(j.at("backbone"));
    m.disc = json_io::mlp(j.at("disc"));
    m.centers = json_io::centers(j.at("centers"));
    m.heads = heads_from(j.at("heads"));
    m.center_reinits = j.value("center_reinits", std::size_t{0});
    m.log = json_io::epoch_log(j.at("log"));
    return m;
  });
}

SeedLineage load_checkpoint_lineage(const std::filesystem::path& path) {
  const json j = read(path, "");
  return decode(path, [&] {
    const auto& s = j.at("seed_lineage");
    return SeedLineage{s.at("seed").get<std::uint64_t>(), s.at("init").get<std::uint64_t>(),
                       s.at("shuffle").get<std::uint64_t>(),
                       s.at("pairs").get<std::uint64_t>(),
                       s.at("probe").get<std::uint64_t>()};
  });
}

std::string checkpoint_model(const std::filesystem::path& path) {
  const json j = read(path, "");
  return decode(path, [&] { return j.at("model").get<std::string>(); });
}

}  // namespace fairsde
