#include "ficbo/model/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ficbo::model {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::array<char, 8> kMagic{'F', 'I', 'C', 'B', 'O', 'C', 'K', 'P'};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("truncated checkpoint: " + path);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, const nlohmann::json& extra) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  nlohmann::json header{{"model", model.config()}};
  if (!extra.is_null()) header["extra"] = extra;
  const std::string text = header.dump();
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put<std::uint64_t>(out, model.parameters().size());
  for (const auto& p : model.parameters()) {
    put<std::uint64_t>(out, p.rows);
    put<std::uint64_t>(out, p.cols);
    out.write(reinterpret_cast<const char*>(p.value.data()), static_cast<std::streamsize>(p.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

Model load_checkpoint(const std::string& path, nlohmann::json* extra) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw std::runtime_error("not a checkpoint file: " + path);
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version) + ": " + path);
  const auto len = get<std::uint64_t>(in, path);
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw std::runtime_error("truncated checkpoint: " + path);
  const nlohmann::json header = nlohmann::json::parse(text);
  Model model(header.at("model").get<ModelConfig>());
  if (extra) *extra = header.value("extra", nlohmann::json{});
  const auto count = get<std::uint64_t>(in, path);
  if (count != model.parameters().size()) throw std::runtime_error("checkpoint parameter count mismatch: " + path);
  for (auto& p : model.parameters()) {
    const auto rows = get<std::uint64_t>(in, path);
    const auto cols = get<std::uint64_t>(in, path);
    if (rows != p.rows || cols != p.cols) throw std::runtime_error("checkpoint shape mismatch for " + p.name);
    if (!in.read(reinterpret_cast<char*>(p.value.data()), static_cast<std::streamsize>(p.size() * sizeof(double))))
      throw std::runtime_error("truncated checkpoint: " + path);
  }
  return model;
}

}  // namespace ficbo::model
