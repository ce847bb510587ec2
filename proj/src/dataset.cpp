#include "nsdf/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace nsdf {

namespace fs = std::filesystem;

namespace {

std::string depth_name(int index, DepthFormat fmt) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "depth_%06d.%s", index,
                fmt == DepthFormat::kU16 ? "pgm" : "f32");
  return buf;
}

void write_depth_u16(const std::string& path, const Eigen::MatrixXd& depth) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write depth image: " + path);
  os << "P5\n" << depth.cols() << " " << depth.rows() << "\n65535\n";
  for (Eigen::Index v = 0; v < depth.rows(); ++v)
    for (Eigen::Index u = 0; u < depth.cols(); ++u) {
      const double d = depth(v, u);
      uint16_t mm = 0;
      if (std::isfinite(d) && d > 0)
        mm = static_cast<uint16_t>(
            std::min(65535.0, std::max(0.0, std::round(d * 1000.0))));
      const uint8_t bytes[2] = {static_cast<uint8_t>(mm >> 8),
                                static_cast<uint8_t>(mm & 0xff)};
      os.write(reinterpret_cast<const char*>(bytes), 2);  // PGM is big-endian
    }
  if (!os) throw std::runtime_error("depth image write failed: " + path);
}

Eigen::MatrixXd read_depth_u16(const std::string& path, int width, int height) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open depth image: " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  is >> magic >> w >> h >> maxval;
  if (magic != "P5" || maxval != 65535)
    throw std::runtime_error("depth image is not 16-bit PGM: " + path);
  if (w != width || h != height)
    throw std::runtime_error("depth image " + path + " has size " +
                             std::to_string(w) + "x" + std::to_string(h) +
                             ", expected " + std::to_string(width) + "x" +
                             std::to_string(height));
  is.get();  // single whitespace after the header
  Eigen::MatrixXd depth(height, width);
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u) {
      uint8_t bytes[2];
      is.read(reinterpret_cast<char*>(bytes), 2);
      const uint16_t mm = static_cast<uint16_t>((bytes[0] << 8) | bytes[1]);
      depth(v, u) =
          mm == 0 ? std::numeric_limits<double>::quiet_NaN() : mm / 1000.0;
    }
  if (!is) throw std::runtime_error("truncated depth image: " + path);
  return depth;
}

void write_depth_f32(const std::string& path, const Eigen::MatrixXd& depth) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write depth file: " + path);
  for (Eigen::Index v = 0; v < depth.rows(); ++v)
    for (Eigen::Index u = 0; u < depth.cols(); ++u) {
      const double d = depth(v, u);
      const float f =
          (std::isfinite(d) && d > 0) ? static_cast<float>(d) : 0.0f;
      os.write(reinterpret_cast<const char*>(&f), 4);
    }
  if (!os) throw std::runtime_error("depth file write failed: " + path);
}

Eigen::MatrixXd read_depth_f32(const std::string& path, int width, int height) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open depth file: " + path);
  Eigen::MatrixXd depth(height, width);
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u) {
      float f = 0;
      is.read(reinterpret_cast<char*>(&f), 4);
      depth(v, u) = f > 0 ? static_cast<double>(f)
                          : std::numeric_limits<double>::quiet_NaN();
    }
  if (!is) throw std::runtime_error("truncated depth file: " + path);
  return depth;
}

}  // namespace

void write_dataset(const std::string& dir, const Dataset& dataset) {
  fs::create_directories(dir);
  {
    std::ofstream os(fs::path(dir) / "meta");
    if (!os) throw std::runtime_error("cannot write dataset meta in " + dir);
    os.precision(12);
    os << "format_version 1\n";
    os << "width " << dataset.intrinsics.width << "\n";
    os << "height " << dataset.intrinsics.height << "\n";
    os << "fx " << dataset.intrinsics.fx << "\n";
    os << "fy " << dataset.intrinsics.fy << "\n";
    os << "cx " << dataset.intrinsics.cx << "\n";
    os << "cy " << dataset.intrinsics.cy << "\n";
    os << "depth_format " << (dataset.format == DepthFormat::kU16 ? "u16" : "f32")
       << "\n";
    os << "depth_scale 1000\n";
    os << "fps " << dataset.fps << "\n";
    os << "bounds_min " << dataset.bounds.min.transpose() << "\n";
    os << "bounds_max " << dataset.bounds.max.transpose() << "\n";
    os << "n_frames " << dataset.frames.size() << "\n";
  }
  {
    std::ofstream os(fs::path(dir) / "poses.txt");
    os.precision(15);
    for (const DepthFrame& f : dataset.frames) {
      const Mat4d m = f.pose.matrix();
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          os << m(r, c) << (r == 3 && c == 3 ? "\n" : " ");
    }
  }
  for (size_t i = 0; i < dataset.frames.size(); ++i) {
    const std::string path =
        (fs::path(dir) / depth_name(static_cast<int>(i), dataset.format)).string();
    if (dataset.format == DepthFormat::kU16)
      write_depth_u16(path, dataset.frames[i].depth);
    else
      write_depth_f32(path, dataset.frames[i].depth);
  }
  if (dataset.scene) save_scene((fs::path(dir) / "scene.txt").string(), *dataset.scene);
}

Dataset read_dataset(const std::string& dir) {
  Dataset out;
  std::map<std::string, std::string> meta;
  {
    std::ifstream is(fs::path(dir) / "meta");
    if (!is) throw std::runtime_error("dataset " + dir + ": missing meta file");
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      std::istringstream ss(line);
      std::string key;
      if (!(ss >> key)) continue;
      std::string rest;
      std::getline(ss, rest);
      meta[key] = rest;
    }
  }
  auto need = [&](const std::string& key) {
    const auto it = meta.find(key);
    if (it == meta.end())
      throw std::runtime_error("dataset meta: missing key '" + key + "'");
    return it->second;
  };
  out.intrinsics.width = std::stoi(need("width"));
  out.intrinsics.height = std::stoi(need("height"));
  out.intrinsics.fx = std::stod(need("fx"));
  out.intrinsics.fy = std::stod(need("fy"));
  out.intrinsics.cx = std::stod(need("cx"));
  out.intrinsics.cy = std::stod(need("cy"));
  out.intrinsics.validate();
  const std::string fmt = need("depth_format");
  if (fmt.find("u16") != std::string::npos)
    out.format = DepthFormat::kU16;
  else if (fmt.find("f32") != std::string::npos)
    out.format = DepthFormat::kF32;
  else
    throw std::runtime_error("dataset meta: unknown depth_format" + fmt);
  out.fps = meta.count("fps") ? std::stod(meta["fps"]) : 30.0;
  {
    std::istringstream ss(need("bounds_min"));
    ss >> out.bounds.min.x() >> out.bounds.min.y() >> out.bounds.min.z();
  }
  {
    std::istringstream ss(need("bounds_max"));
    ss >> out.bounds.max.x() >> out.bounds.max.y() >> out.bounds.max.z();
  }
  const int n_frames = std::stoi(need("n_frames"));

  std::vector<Pose> poses;
  {
    std::ifstream is(fs::path(dir) / "poses.txt");
    if (!is) throw std::runtime_error("dataset " + dir + ": missing poses.txt");
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream ss(line);
      Mat4d m;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          if (!(ss >> m(r, c)))
            throw std::runtime_error("poses.txt line " + std::to_string(line_no) +
                                     ": expected 16 numbers");
      Pose p = Pose::from_matrix(m);
      try {
        p.validate(1e-6);
      } catch (const std::exception& e) {
        throw std::runtime_error("poses.txt line " + std::to_string(line_no) +
                                 ": " + e.what());
      }
      poses.push_back(p);
    }
  }
  if (static_cast<int>(poses.size()) != n_frames)
    throw std::runtime_error(
        "dataset " + dir + ": pose count " + std::to_string(poses.size()) +
        " does not match frame count " + std::to_string(n_frames));

  for (int i = 0; i < n_frames; ++i) {
    DepthFrame f;
    f.frame_id = i;
    f.timestamp = i / out.fps;
    f.pose = poses[static_cast<size_t>(i)];
    f.intrinsics = out.intrinsics;
    const std::string path = (fs::path(dir) / depth_name(i, out.format)).string();
    f.depth = out.format == DepthFormat::kU16
                  ? read_depth_u16(path, out.intrinsics.width, out.intrinsics.height)
                  : read_depth_f32(path, out.intrinsics.width, out.intrinsics.height);
    out.frames.push_back(std::move(f));
  }

  const fs::path scene_path = fs::path(dir) / "scene.txt";
  if (fs::exists(scene_path)) out.scene = load_scene(scene_path.string());
  return out;
}

}  // namespace nsdf
