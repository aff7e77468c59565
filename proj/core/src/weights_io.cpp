#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "crowdnav/error.hpp"
#include "crowdnav/sgan.hpp"

namespace crowdnav::predict {
namespace {

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian; add byte swapping for this platform");

using nlohmann::json;

json hyper_to_json(const SganHyperparameters& hp) {
  return json{{"d_z", hp.latent_dim},
              {"embed_dim", hp.embed_dim},
              {"encoder_hidden", hp.encoder_hidden},
              {"pool_hidden", hp.pool_hidden},
              {"pool_dim", hp.pool_dim},
              {"context_dim", hp.context_dim},
              {"discriminator_embed", hp.discriminator_embed},
              {"discriminator_hidden", hp.discriminator_hidden},
              {"dt_pred", hp.dt},
              {"h", hp.observed_steps},
              {"T", hp.horizon}};
}

SganHyperparameters hyper_from_json(const json& j) {
  SganHyperparameters hp;
  try {
    hp.latent_dim = j.at("d_z").get<std::size_t>();
    hp.embed_dim = j.at("embed_dim").get<std::size_t>();
    hp.encoder_hidden = j.at("encoder_hidden").get<std::size_t>();
    hp.pool_hidden = j.at("pool_hidden").get<std::size_t>();
    hp.pool_dim = j.at("pool_dim").get<std::size_t>();
    hp.context_dim = j.at("context_dim").get<std::size_t>();
    hp.discriminator_embed = j.value("discriminator_embed", hp.discriminator_embed);
    hp.discriminator_hidden = j.value("discriminator_hidden", hp.discriminator_hidden);
    hp.dt = j.at("dt_pred").get<double>();
    hp.observed_steps = j.at("h").get<std::size_t>();
    hp.horizon = j.at("T").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest hyperparameters: ") + e.what());
  }
  return hp;
}

}  // namespace

GenerativeModelWeights load_weights(const std::filesystem::path& manifest_path) {
  std::ifstream manifest_file(manifest_path);
  if (!manifest_file) throw ValidationError("cannot open manifest " + manifest_path.string());
  json manifest;
  try {
    manifest_file >> manifest;
  } catch (const json::exception& e) {
    throw ValidationError("manifest " + manifest_path.string() + ": " + e.what());
  }

  GenerativeModelWeights weights;
  try {
  if (manifest.value("format", std::string("crowdnav-sgan")) != "crowdnav-sgan") {
    throw ValidationError("manifest " + manifest_path.string() + ": unknown format");
  }
  weights.hyper = hyper_from_json(manifest.at("hyperparameters"));

  const std::string binary_name = manifest.value("binary", std::string("weights.bin"));
  const auto binary_path = manifest_path.parent_path() / binary_name;
  std::ifstream binary(binary_path, std::ios::binary);
  if (!binary) throw ValidationError("cannot open weight binary " + binary_path.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(binary)),
                                std::istreambuf_iterator<char>());

  for (const json& entry : manifest.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto dtype = entry.value("dtype", std::string("f32"));
    if (dtype != "f32") throw ValidationError("tensor '" + name + "': unsupported dtype " + dtype);
    Tensor t;
    t.shape = entry.at("shape").get<std::vector<std::size_t>>();
    const auto offset = entry.at("offset").get<std::size_t>();
    const std::size_t count = t.size();
    if (offset % 4 != 0 || offset + 4 * count > bytes.size()) {
      throw TruncatedBinaryError(name, "needs bytes [" + std::to_string(offset) + ", " +
                                           std::to_string(offset + 4 * count) + "), file has " +
                                           std::to_string(bytes.size()));
    }
    t.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      float f;
      std::memcpy(&f, bytes.data() + offset + 4 * i, sizeof(float));
      t.data[i] = static_cast<double>(f);
    }
    weights.tensors.emplace(name, std::move(t));
  }
  } catch (const json::exception& e) {
    throw ValidationError("manifest " + manifest_path.string() + ": " + e.what());
  }
  validate_weights(weights);
  return weights;
}

void save_weights(const GenerativeModelWeights& weights, const std::filesystem::path& directory) {
  validate_weights(weights);
  std::filesystem::create_directories(directory);
  json tensors = json::array();
  std::vector<float> blob;
  for (const TensorSpec& spec : expected_tensors(weights.hyper, weights.has_discriminator())) {
    const Tensor& t = weights.at(spec.name);
    tensors.push_back(json{{"name", spec.name},
                           {"shape", t.shape},
                           {"offset", blob.size() * 4},
                           {"dtype", "f32"}});
    for (double v : t.data) blob.push_back(static_cast<float>(v));
  }
  const json manifest{{"format", "crowdnav-sgan"},
                      {"version", 1},
                      {"binary", "weights.bin"},
                      {"hyperparameters", hyper_to_json(weights.hyper)},
                      {"tensors", tensors}};
  std::ofstream(directory / "manifest.json") << manifest.dump(2) << '\n';
  std::ofstream bin(directory / "weights.bin", std::ios::binary);
  bin.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size() * sizeof(float)));
  if (!bin) throw Error("failed writing " + (directory / "weights.bin").string());
}

}  // namespace crowdnav::predict
