#include "recedit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "recedit/constraints.hpp"

namespace recedit::nn {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

template <class T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw ValidationError(path + ": truncated checkpoint");
  }
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in, const std::string& path) {
  uint64_t len = read_pod<uint64_t>(in, path);
  std::string s(len, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(len))) {
    throw ValidationError(path + ": truncated checkpoint");
  }
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParameterStore& params,
                     const std::string& metadata_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_pod<uint32_t>(out, kCheckpointVersion);
  write_string(out, metadata_json);
  write_pod<uint64_t>(out, params.params.size());
  for (const auto& [name, tensor] : params.params) {  // std::map: sorted names
    write_string(out, name);
    write_pod<uint32_t>(out, static_cast<uint32_t>(tensor.shape.size()));
    for (int64_t d : tensor.shape) write_pod<int64_t>(out, d);
    out.write(reinterpret_cast<const char*>(tensor.data.data()),
              static_cast<std::streamsize>(tensor.data.size() * sizeof(double)));
  }
  if (!out) throw ValidationError("write failed: " + path);
}

std::string load_checkpoint(const std::string& path, ParameterStore& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw ValidationError(path + ": not a checkpoint file");
  }
  uint32_t version = read_pod<uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw ValidationError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  std::string metadata = read_string(in, path);
  uint64_t n_params = read_pod<uint64_t>(in, path);
  params.params.clear();
  for (uint64_t i = 0; i < n_params; ++i) {
    std::string name = read_string(in, path);
    uint32_t ndim = read_pod<uint32_t>(in, path);
    std::vector<int64_t> shape(ndim);
    for (auto& d : shape) d = read_pod<int64_t>(in, path);
    TensorValue t(shape);
    if (!in.read(reinterpret_cast<char*>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size() * sizeof(double)))) {
      throw ValidationError(path + ": truncated checkpoint");
    }
    params.params[name] = std::move(t);
  }
  return metadata;
}

}  // namespace recedit::nn
