#include "vitslim/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>

#include "vitslim/error.hpp"

namespace vitslim {

namespace {

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}

bool fits_f32(std::span<const double> values) {
  for (double v : values) {
    if (static_cast<double>(static_cast<float>(v)) != v) return false;
  }
  return true;
}

struct Entry {
  std::string name;
  Shape shape;
  std::span<const double> values;
};

struct Region {
  Shape shape;
  std::vector<double> values;
};

void append_values(std::vector<unsigned char>& body, std::span<const double> values, bool f32) {
  for (double v : values) {
    if (f32) {
      const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      for (int i = 0; i < 4; ++i) body.push_back(static_cast<unsigned char>(bits >> (8 * i)));
    } else {
      put_u64(body, std::bit_cast<std::uint64_t>(v));
    }
  }
}

}  // namespace

std::vector<unsigned char> encode_checkpoint(const Checkpoint& ckpt) {
  std::vector<Entry> entries;
  for (const auto& [name, t] : ckpt.model.params.named()) {
    entries.push_back({"model." + name, t.shape(), t.data()});
  }
  if (ckpt.masks) {
    entries.push_back({"masks.attn", ckpt.masks->attn.shape(), ckpt.masks->attn.data()});
    entries.push_back({"masks.mlp", ckpt.masks->mlp.shape(), ckpt.masks->mlp.data()});
    entries.push_back(
        {"masks.patch_raw", ckpt.masks->patch_raw.shape(), ckpt.masks->patch_raw.data()});
  }
  if (ckpt.optimizer) {
    const OptimizerState& o = *ckpt.optimizer;
    for (std::size_t i = 0; i < o.names.size(); ++i) {
      entries.push_back({"optim.m." + o.names[i], {o.m[i].size()}, o.m[i]});
      entries.push_back({"optim.v." + o.names[i], {o.v[i].size()}, o.v[i]});
    }
  }

  std::vector<unsigned char> body;
  nlohmann::json dir = nlohmann::json::array();
  for (const Entry& e : entries) {
    const bool f32 = fits_f32(e.values);
    dir.push_back({{"name", e.name}, {"offset", body.size()}, {"shape", e.shape},
                   {"dtype", f32 ? "f32" : "f64"}});
    append_values(body, e.values, f32);
  }

  nlohmann::json header{{"format", "vitslim-checkpoint"},
                        {"version", kCheckpointVersion},
                        {"stage", ckpt.stage},
                        {"precision", to_string(ckpt.precision)},
                        {"config", ckpt.model.config},
                        {"arch", ckpt.model.arch},
                        {"hyper", ckpt.hyper},
                        {"rng", {{"seed", ckpt.seed}, {"step", ckpt.step}}},
                        {"optimizer", ckpt.optimizer
                                          ? nlohmann::json{{"step", ckpt.optimizer->step},
                                                           {"slots", ckpt.optimizer->names}}
                                          : nlohmann::json(nullptr)},
                        {"extra", ckpt.extra},
                        {"body_bytes", body.size()},
                        {"tensors", dir}};
  const std::string text = header.dump();
  std::vector<unsigned char> out;
  out.reserve(8 + text.size() + body.size());
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 8) {
    throw DataError("checkpoint truncated: " + std::to_string(bytes.size()) +
                    " bytes, need at least 8 for the header length");
  }
  const std::uint64_t header_len = get_u64(bytes.data());
  if (header_len > bytes.size() - 8) {
    throw DataError("checkpoint header length " + std::to_string(header_len) + " exceeds file size " +
                    std::to_string(bytes.size()));
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<long>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  if (!header.is_object() || header.value("format", "") != "vitslim-checkpoint") {
    throw DataError("not a vitslim checkpoint");
  }
  const int version = header.value("version", -1);
  if (version != kCheckpointVersion) {
    throw FormatVersionError("checkpoint format version " + std::to_string(version) +
                             " cannot be read by this build (expects version " +
                             std::to_string(kCheckpointVersion) +
                             "); re-export it with a matching build to migrate");
  }

  const std::size_t body_start = 8 + header_len;
  const std::size_t body_len = bytes.size() - body_start;
  try {
    if (header.at("body_bytes").get<std::size_t>() != body_len) {
      throw DataError("checkpoint body is " + std::to_string(body_len) + " bytes, header declares " +
                      std::to_string(header.at("body_bytes").get<std::size_t>()));
    }

    std::map<std::string, Region> regions;
    std::size_t expected = 0;
    for (const auto& e : header.at("tensors")) {
      Region r;
      r.shape = e.at("shape").get<Shape>();
      const std::string dtype = e.at("dtype").get<std::string>();
      const std::size_t width = dtype == "f32" ? 4 : dtype == "f64" ? 8 : 0;
      if (width == 0) throw DataError("checkpoint tensor has unknown dtype '" + dtype + "'");
      const std::size_t offset = e.at("offset").get<std::size_t>();
      const std::size_t count = numel(r.shape);
      const std::string name = e.at("name").get<std::string>();
      if (offset != expected || offset + count * width > body_len) {
        throw DataError("checkpoint tensor '" + name + "' at offset " + std::to_string(offset) +
                        " does not fit the " + std::to_string(body_len) + "-byte body");
      }
      const unsigned char* p = bytes.data() + body_start + offset;
      r.values.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        if (width == 4) {
          std::uint32_t bits = 0;
          for (int b = 0; b < 4; ++b) bits |= std::uint32_t{p[4 * i + b]} << (8 * b);
          r.values[i] = std::bit_cast<float>(bits);
        } else {
          r.values[i] = std::bit_cast<double>(get_u64(p + 8 * i));
        }
      }
      expected = offset + count * width;
      regions.emplace(name, std::move(r));
    }
    if (expected != body_len) {
      throw DataError("checkpoint body has " + std::to_string(body_len - expected) +
                      " trailing bytes");
    }

    auto take = [&regions](const std::string& name, const Shape& want) {
      auto it = regions.find(name);
      if (it == regions.end()) throw DataError("checkpoint lacks tensor '" + name + "'");
      if (it->second.shape != want) {
        throw DataError("checkpoint tensor '" + name + "' has shape " + to_string(it->second.shape) +
                        ", expected " + to_string(want));
      }
      std::vector<double> v = std::move(it->second.values);
      regions.erase(it);
      return v;
    };

    Checkpoint ck;
    ck.stage = header.at("stage").get<std::string>();
    ck.precision = parse_precision(header.at("precision").get<std::string>());
    const ViTConfig config = header.at("config").get<ViTConfig>();
    const SlimArchitecture arch = header.at("arch").get<SlimArchitecture>();
    ck.model = allocate_model(config, arch);
    for (auto& [name, t] : ck.model.params.named()) {
      const std::vector<double> v = take("model." + name, t.shape());
      std::copy(v.begin(), v.end(), t.data().begin());
    }
    if (regions.count("masks.attn")) {
      MaskSet m = init_masks(config);
      for (auto [name, t] : {std::pair{"masks.attn", m.attn}, std::pair{"masks.mlp", m.mlp},
                             std::pair{"masks.patch_raw", m.patch_raw}}) {
        const std::vector<double> v = take(name, t.shape());
        std::copy(v.begin(), v.end(), t.data().begin());
      }
      ck.masks = std::move(m);
    }
    ck.hyper = header.at("hyper");
    ck.seed = header.at("rng").at("seed").get<std::uint64_t>();
    ck.step = header.at("rng").at("step").get<std::uint64_t>();
    if (!header.at("optimizer").is_null()) {
      OptimizerState o;
      o.step = header.at("optimizer").at("step").get<std::uint64_t>();
      o.names = header.at("optimizer").at("slots").get<std::vector<std::string>>();
      for (const std::string& n : o.names) {
        auto it = regions.find("optim.m." + n);
        if (it == regions.end()) throw DataError("checkpoint lacks moments of slot '" + n + "'");
        const Shape s = it->second.shape;
        o.m.push_back(take("optim.m." + n, s));
        o.v.push_back(take("optim.v." + n, s));
      }
      ck.optimizer = std::move(o);
    }
    if (!regions.empty()) {
      throw DataError("checkpoint has unexpected tensor '" + regions.begin()->first + "'");
    }
    ck.extra = header.value("extra", nlohmann::json::object());
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint describes an invalid model: ") + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::vector<unsigned char> bytes = encode_checkpoint(ckpt);
  write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes);
}

Checkpoint checkpoint_from_state(const TrainState& state, const TrainHyper& hyper,
                                 const std::string& stage) {
  Checkpoint ck;
  ck.stage = stage;
  ck.precision = precision();
  ck.model = state.model.clone();
  if (state.masks) ck.masks = state.masks->clone();
  ck.hyper = hyper;
  ck.seed = hyper.seed;
  ck.step = state.step;
  OptimizerState o;
  o.step = state.optimizer.step_count();
  for (const AdamW::Slot& s : state.optimizer.slots()) {
    o.names.push_back(s.name);
    o.m.push_back(s.m);
    o.v.push_back(s.v);
  }
  ck.optimizer = std::move(o);
  return ck;
}

TrainState state_from_checkpoint(const Checkpoint& ckpt, const TrainHyper& hyper, bool resume) {
  TrainState state(ckpt.model.clone(),
                   ckpt.masks ? std::optional<MaskSet>(ckpt.masks->clone()) : std::nullopt, hyper);
  if (!resume) return state;
  state.step = ckpt.step;
  if (!ckpt.optimizer) throw DataError("checkpoint has no optimizer state to resume from");
  {
    auto slots = state.optimizer.slots();
    const OptimizerState& o = *ckpt.optimizer;
    if (o.names.size() != slots.size()) {
      throw DataError("checkpoint optimizer has " + std::to_string(o.names.size()) +
                      " slots, the model needs " + std::to_string(slots.size()));
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (o.names[i] != slots[i].name || o.m[i].size() != slots[i].m.size()) {
        throw DataError("checkpoint optimizer slot '" + o.names[i] + "' does not match '" +
                        slots[i].name + "'");
      }
      slots[i].m = o.m[i];
      slots[i].v = o.v[i];
    }
    state.optimizer.set_step_count(o.step);
  }
  return state;
}

}  // namespace vitslim
