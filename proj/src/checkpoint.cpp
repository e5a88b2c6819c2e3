#include "hjnav/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

namespace hjnav {

namespace {

constexpr char kMagic[4] = {'M', 'A', 'D', 'P'};
constexpr std::uint16_t kVersion = 1;

// The on-disk format is little-endian; this code assumes a little-endian
// host (checked at startup of save/load).
bool host_is_little_endian() {
  const std::uint16_t probe = 0x0102;
  std::uint8_t first;
  std::memcpy(&first, &probe, 1);
  return first == 0x02;
}

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw CheckpointFormatError("checkpoint: truncated file");
  return v;
}

void write_doubles(std::ostream& os, const double* data, std::size_t n) {
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& is, double* data, std::size_t n) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw CheckpointFormatError("checkpoint: truncated parameter payload");
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  if (!host_is_little_endian())
    throw CheckpointError("checkpoint: big-endian hosts are not supported");
  const NetParams& p = ckpt.params;
  const int L = static_cast<int>(p.weights.size());
  if (L == 0) throw CheckpointError("checkpoint: empty parameter set");

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError("checkpoint: cannot open for writing: " + tmp);

    os.write(kMagic, 4);
    write_pod(os, kVersion);
    write_pod(os, static_cast<std::uint32_t>(L));
    for (int l = 0; l < L; ++l) {
      write_pod(os, static_cast<std::uint32_t>(p.weights[l].cols()));
      write_pod(os, static_cast<std::uint32_t>(p.weights[l].rows()));
    }
    write_pod(os, p.arch.omega0);
    const std::uint32_t d = static_cast<std::uint32_t>(p.arch.input_dim);
    write_pod(os, d);
    for (std::uint32_t i = 0; i < d; ++i) {
      write_pod(os, ckpt.scaler.offset[i]);
      write_pod(os, ckpt.scaler.scale[i]);
    }
    write_pod(os, ckpt.scaler.clamp_lo);
    write_pod(os, ckpt.scaler.clamp_hi);

    for (int l = 0; l < L; ++l) {
      // row-major write so the layout is independent of Eigen's default
      const auto& W = p.weights[l];
      for (Eigen::Index r = 0; r < W.rows(); ++r) {
        Eigen::RowVectorXd row = W.row(r);
        write_doubles(os, row.data(), static_cast<std::size_t>(row.size()));
      }
      write_doubles(os, p.biases[l].data(), static_cast<std::size_t>(p.biases[l].size()));
    }
    if (!os) throw CheckpointError("checkpoint: write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  if (!host_is_little_endian())
    throw CheckpointError("checkpoint: big-endian hosts are not supported");
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("checkpoint: cannot open: " + path);

  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw CheckpointFormatError("checkpoint: bad magic bytes");
  const auto version = read_pod<std::uint16_t>(is);
  if (version != kVersion)
    throw CheckpointVersionError("checkpoint: unsupported format version " +
                                 std::to_string(version));

  const auto L = read_pod<std::uint32_t>(is);
  if (L == 0 || L > 64) throw CheckpointShapeError("checkpoint: implausible layer count");
  std::vector<std::uint32_t> ins(L), outs(L);
  for (std::uint32_t l = 0; l < L; ++l) {
    ins[l] = read_pod<std::uint32_t>(is);
    outs[l] = read_pod<std::uint32_t>(is);
    if (ins[l] == 0 || outs[l] == 0 || ins[l] > 1u << 20 || outs[l] > 1u << 20)
      throw CheckpointShapeError("checkpoint: implausible layer shape");
    if (l > 0 && ins[l] != outs[l - 1])
      throw CheckpointShapeError("checkpoint: inconsistent layer chain");
  }
  if (outs[L - 1] != 1) throw CheckpointShapeError("checkpoint: output layer must be scalar");

  Checkpoint ckpt;
  ckpt.params.arch.omega0 = read_pod<double>(is);
  const auto d = read_pod<std::uint32_t>(is);
  if (d != ins[0]) throw CheckpointShapeError("checkpoint: input_dim mismatch with first layer");
  ckpt.params.arch.input_dim = static_cast<int>(d);
  for (std::uint32_t l = 0; l + 1 < L; ++l)
    ckpt.params.arch.hidden.push_back(static_cast<int>(outs[l]));

  ckpt.scaler.offset.resize(d);
  ckpt.scaler.scale.resize(d);
  for (std::uint32_t i = 0; i < d; ++i) {
    ckpt.scaler.offset[i] = read_pod<double>(is);
    ckpt.scaler.scale[i] = read_pod<double>(is);
  }
  ckpt.scaler.clamp_lo = read_pod<double>(is);
  ckpt.scaler.clamp_hi = read_pod<double>(is);

  ckpt.params.weights.resize(L);
  ckpt.params.biases.resize(L);
  for (std::uint32_t l = 0; l < L; ++l) {
    Eigen::MatrixXd W(outs[l], ins[l]);
    Eigen::RowVectorXd row(ins[l]);
    for (std::uint32_t r = 0; r < outs[l]; ++r) {
      read_doubles(is, row.data(), ins[l]);
      W.row(r) = row;
    }
    ckpt.params.weights[l] = W;
    ckpt.params.biases[l].resize(outs[l]);
    read_doubles(is, ckpt.params.biases[l].data(), outs[l]);
  }
  // Trailing garbage indicates corruption.
  char extra;
  is.read(&extra, 1);
  if (is.gcount() != 0) throw CheckpointFormatError("checkpoint: trailing bytes");
  return ckpt;
}

}  // namespace hjnav
