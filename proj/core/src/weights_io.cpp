#include "lumio/weights_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lumio::vonet {

namespace {

struct TensorRef {
  std::string name;
  std::vector<std::size_t> shape;
  double* data;  // row-major element order for matrices
  std::size_t count;
};

// Deterministic tensor enumeration; defines the binary layout.
std::vector<TensorRef> enumerate_tensors(ModelWeights& w) {
  std::vector<TensorRef> refs;
  auto add_matrix = [&](const std::string& name, Eigen::MatrixXd& m) {
    refs.push_back({name,
                    {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                    m.data(),
                    static_cast<std::size_t>(m.size())});
  };
  auto add_vector = [&](const std::string& name, Eigen::VectorXd& v) {
    refs.push_back({name, {static_cast<std::size_t>(v.size())}, v.data(),
                    static_cast<std::size_t>(v.size())});
  };
  auto add_scalar = [&](const std::string& name, double& s) {
    refs.push_back({name, {1}, &s, 1});
  };

  add_matrix("brightness.conv1.weight", w.br_conv1_w);
  add_vector("brightness.conv1.bias", w.br_conv1_b);
  for (std::size_t c = 0; c < w.br_dw_w.size(); ++c) {
    add_matrix("brightness.dw." + std::to_string(c) + ".weight", w.br_dw_w[c]);
  }
  add_vector("brightness.dw.bias", w.br_dw_b);
  add_matrix("brightness.conv2.weight", w.br_conv2_w);
  add_vector("brightness.conv2.bias", w.br_conv2_b);
  add_matrix("embed.weight", w.embed_w);
  add_vector("embed.bias", w.embed_b);
  add_matrix("embed.pos", w.pos_embed);
  add_vector("embed.cls", w.cls_token);
  add_matrix("embed.frame", w.frame_embed);
  add_matrix("gate.weight", w.gate_w);
  add_vector("gate.bias", w.gate_b);
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    const std::string p = "layers." + std::to_string(i) + ".";
    auto& l = w.layers[i];
    add_vector(p + "ln1.scale", l.ln1_scale);
    add_vector(p + "ln1.shift", l.ln1_shift);
    add_matrix(p + "q.weight", l.wq);
    add_vector(p + "q.bias", l.bq);
    add_matrix(p + "k.weight", l.wk);
    add_vector(p + "k.bias", l.bk);
    add_matrix(p + "v.weight", l.wv);
    add_vector(p + "v.bias", l.bv);
    add_scalar(p + "alpha", l.alpha);
    add_vector(p + "ln2.scale", l.ln2_scale);
    add_vector(p + "ln2.shift", l.ln2_shift);
    add_matrix(p + "ffn.w1", l.ffn_w1);
    add_vector(p + "ffn.b1", l.ffn_b1);
    add_matrix(p + "ffn.w2", l.ffn_w2);
    add_vector(p + "ffn.b2", l.ffn_b2);
  }
  add_vector("decoder.ln.scale", w.dec_ln_scale);
  add_vector("decoder.ln.shift", w.dec_ln_shift);
  add_matrix("decoder.mlp.w1", w.dec_w1);
  add_vector("decoder.mlp.b1", w.dec_b1);
  add_matrix("decoder.mlp.w2", w.dec_w2);
  add_vector("decoder.mlp.b2", w.dec_b2);
  add_matrix("decoder.out.weight", w.out_w);
  add_vector("decoder.out.bias", w.out_b);
  return refs;
}

// Matrices are serialized row-major regardless of Eigen's storage order.
void copy_out(const TensorRef& ref, std::vector<double>& flat, std::size_t offset) {
  if (ref.shape.size() == 2) {
    const std::size_t rows = ref.shape[0], cols = ref.shape[1];
    Eigen::Map<const Eigen::MatrixXd> m(ref.data, rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) flat[offset++] = m(r, c);
  } else {
    std::memcpy(flat.data() + offset, ref.data, ref.count * sizeof(double));
  }
}

void copy_in(const TensorRef& ref, const std::vector<double>& flat, std::size_t offset) {
  if (ref.shape.size() == 2) {
    const std::size_t rows = ref.shape[0], cols = ref.shape[1];
    Eigen::Map<Eigen::MatrixXd> m(ref.data, rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = flat[offset++];
  } else {
    std::memcpy(ref.data, flat.data() + offset, ref.count * sizeof(double));
  }
}

void swap_bytes_if_big_endian(std::vector<double>& values) {
  if constexpr (std::endian::native == std::endian::big) {
    for (double& v : values) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      bits = __builtin_bswap64(bits);
      v = std::bit_cast<double>(bits);
    }
  }
}

nlohmann::ordered_json config_to_json(const ModelConfig& c) {
  return {{"patch", c.patch},
          {"image_height", c.image_height},
          {"image_width", c.image_width},
          {"model_dim", c.model_dim},
          {"layers", c.layers},
          {"brightness_channels", c.brightness_channels},
          {"heads", c.heads},
          {"ffn_dim", c.ffn_dim},
          {"decoder_hidden", c.decoder_hidden},
          {"drop_path_rate", c.drop_path_rate}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.patch = j.at("patch").get<int>();
  c.image_height = j.at("image_height").get<int>();
  c.image_width = j.at("image_width").get<int>();
  c.model_dim = j.at("model_dim").get<int>();
  c.layers = j.at("layers").get<int>();
  c.brightness_channels = j.at("brightness_channels").get<int>();
  c.heads = j.at("heads").get<int>();
  c.ffn_dim = j.at("ffn_dim").get<int>();
  c.decoder_hidden = j.at("decoder_hidden").get<int>();
  c.drop_path_rate = j.at("drop_path_rate").get<double>();
  return c;
}

}  // namespace

std::filesystem::path manifest_path_for(const std::filesystem::path& bin_path) {
  std::filesystem::path p = bin_path;
  p += ".json";
  return p;
}

void save_weights(const ModelWeights& w, const std::filesystem::path& bin_path) {
  w.validate();
  auto refs = enumerate_tensors(const_cast<ModelWeights&>(w));

  std::size_t total = 0;
  nlohmann::ordered_json manifest;
  manifest["version"] = 1;
  manifest["dtype"] = "float64";
  manifest["byte_order"] = "little-endian";
  manifest["config"] = config_to_json(w.config);
  auto& tensors = manifest["tensors"] = nlohmann::ordered_json::array();
  for (const auto& ref : refs) {
    tensors.push_back({{"name", ref.name}, {"shape", ref.shape}, {"offset", total}});
    total += ref.count;
  }
  manifest["element_count"] = total;

  std::vector<double> flat(total);
  std::size_t offset = 0;
  for (const auto& ref : refs) {
    copy_out(ref, flat, offset);
    offset += ref.count;
  }
  swap_bytes_if_big_endian(flat);

  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error(bin_path.string() + ": cannot open for writing");
  bin.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!bin) throw std::runtime_error(bin_path.string() + ": write failed");

  std::ofstream mf(manifest_path_for(bin_path));
  if (!mf) {
    throw std::runtime_error(manifest_path_for(bin_path).string() +
                             ": cannot open for writing");
  }
  mf << manifest.dump(2) << '\n';
}

ModelWeights load_weights(const std::filesystem::path& bin_path) {
  const auto mf_path = manifest_path_for(bin_path);
  std::ifstream mf(mf_path);
  if (!mf) throw std::runtime_error(mf_path.string() + ": cannot open manifest");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mf);
  } catch (const std::exception& e) {
    throw std::runtime_error(mf_path.string() + ": " + e.what());
  }
  if (manifest.at("version").get<int>() != 1) {
    throw std::runtime_error(mf_path.string() + ": unsupported version");
  }
  if (manifest.at("dtype").get<std::string>() != "float64") {
    throw std::runtime_error(mf_path.string() + ": unsupported dtype");
  }

  ModelWeights w = ModelWeights::zeros(config_from_json(manifest.at("config")));
  auto refs = enumerate_tensors(w);

  const std::size_t total = manifest.at("element_count").get<std::size_t>();
  std::vector<double> flat(total);
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error(bin_path.string() + ": cannot open for reading");
  bin.read(reinterpret_cast<char*>(flat.data()),
           static_cast<std::streamsize>(total * sizeof(double)));
  if (static_cast<std::size_t>(bin.gcount()) != total * sizeof(double)) {
    throw std::runtime_error(bin_path.string() + ": truncated weight data");
  }
  swap_bytes_if_big_endian(flat);

  const auto& tensors = manifest.at("tensors");
  if (tensors.size() != refs.size()) {
    throw std::runtime_error(mf_path.string() + ": tensor count does not match config");
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& entry = tensors[i];
    if (entry.at("name").get<std::string>() != refs[i].name) {
      throw std::runtime_error(mf_path.string() + ": unexpected tensor '" +
                               entry.at("name").get<std::string>() + "', wanted '" +
                               refs[i].name + "'");
    }
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (shape != refs[i].shape) {
      throw std::runtime_error(mf_path.string() + ": shape mismatch for '" + refs[i].name +
                               "'");
    }
    const auto offset = entry.at("offset").get<std::size_t>();
    if (offset + refs[i].count > total) {
      throw std::runtime_error(mf_path.string() + ": tensor '" + refs[i].name +
                               "' exceeds weight data");
    }
    copy_in(refs[i], flat, offset);
  }
  w.validate();
  return w;
}

}  // namespace lumio::vonet
