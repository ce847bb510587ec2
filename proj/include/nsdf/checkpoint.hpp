#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "nsdf/network.hpp"

namespace nsdf {

// Checkpoint file, little-endian:
//   8 bytes   magic "NSDFCKPT"
//   u32       version (1)
//   u32       scalar width in bytes (4 = float, 8 = double)
//   u32       embedding octave count L
//   u32       basis row count
//   u32       layer count
//   per layer: u32 in_dim, u32 out_dim
//   basis directions as f64, row-major
//   parameter vector in its in-memory order (column-major weight matrices,
//   W0 b0 W1 b1 ...)
inline constexpr char kCheckpointMagic[8] = {'N', 'S', 'D', 'F',
                                             'C', 'K', 'P', 'T'};

namespace detail {

inline void write_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}
inline uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

}  // namespace detail

template <class S>
void save_checkpoint(const std::string& path, const SdfNetwork<S>& net) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open checkpoint for write: " + path);
  os.write(kCheckpointMagic, 8);
  detail::write_u32(os, 1);
  detail::write_u32(os, sizeof(S));
  detail::write_u32(os, static_cast<uint32_t>(net.octaves()));
  detail::write_u32(os, static_cast<uint32_t>(net.basis_dirs().rows()));
  detail::write_u32(os, MlpDims::kLayers);
  const auto& dims = net.params().dims;
  for (int i = 0; i < MlpDims::kLayers; ++i) {
    detail::write_u32(os, static_cast<uint32_t>(dims.in[i]));
    detail::write_u32(os, static_cast<uint32_t>(dims.out[i]));
  }
  Eigen::Matrix<double, Eigen::Dynamic, 3> dirs =
      net.basis_dirs().template cast<double>();
  for (Eigen::Index r = 0; r < dirs.rows(); ++r)
    for (int c = 0; c < 3; ++c)
      os.write(reinterpret_cast<const char*>(&dirs(r, c)), 8);
  os.write(reinterpret_cast<const char*>(net.params().data.data()),
           static_cast<std::streamsize>(net.params().size() * sizeof(S)));
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

template <class S>
SdfNetwork<S> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  const uint32_t version = detail::read_u32(is);
  if (version != 1)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  const uint32_t width = detail::read_u32(is);
  if (width != sizeof(S))
    throw std::runtime_error("checkpoint scalar width " + std::to_string(width) +
                             " does not match requested width " +
                             std::to_string(sizeof(S)));
  const int octaves = static_cast<int>(detail::read_u32(is));
  const int rows = static_cast<int>(detail::read_u32(is));
  const uint32_t layers = detail::read_u32(is);
  if (layers != MlpDims::kLayers)
    throw std::runtime_error("unexpected layer count in checkpoint");

  MlpDims dims = MlpDims::standard(rows * 2 * (octaves + 1));
  for (uint32_t i = 0; i < layers; ++i) {
    const uint32_t in = detail::read_u32(is);
    const uint32_t out = detail::read_u32(is);
    if (in != static_cast<uint32_t>(dims.in[i]) ||
        out != static_cast<uint32_t>(dims.out[i]))
      throw std::runtime_error("checkpoint layer " + std::to_string(i) +
                               " dims " + std::to_string(in) + "x" +
                               std::to_string(out) +
                               " do not match the architecture");
  }

  Eigen::Matrix<double, Eigen::Dynamic, 3> dirs(rows, 3);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < 3; ++c) is.read(reinterpret_cast<char*>(&dirs(r, c)), 8);

  MlpParams<S> params(dims);
  is.read(reinterpret_cast<char*>(params.data.data()),
          static_cast<std::streamsize>(params.size() * sizeof(S)));
  if (!is) throw std::runtime_error("truncated checkpoint: " + path);
  return SdfNetwork<S>(dirs.cast<S>(), octaves, std::move(params));
}

}  // namespace nsdf
