#pragma once

#include <algorithm>
#include <vector>

#include "nsdf/common.hpp"

namespace nsdf {

// Off-axis positional embedding. The projection directions are the 21 unique
// axes of a once-subdivided icosahedron (42 vertices, antipodal pairs
// collapsed). A point x maps to sin/cos of 2^k * A x for octaves k = 0..L.
//
// Output layout, octaves ascending: [sin(2^k A x) (21), cos(2^k A x) (21)].
// Dimension = 21 * 2 * (L + 1) = 252 for L = 5.
struct EmbeddingBasis {
  Eigen::Matrix<double, Eigen::Dynamic, 3> dirs;  // unit rows, one per axis
  int octaves = 5;                                // L; octaves used are 0..L

  int rows() const { return static_cast<int>(dirs.rows()); }
  int output_dim() const { return rows() * 2 * (octaves + 1); }
};

namespace detail {

inline Vec3d canonical_axis(const Vec3d& v) {
  // One representative per antipodal pair: first nonzero coordinate positive.
  constexpr double kEps = 1e-12;
  for (int i = 0; i < 3; ++i) {
    if (v[i] > kEps) return v;
    if (v[i] < -kEps) return -v;
  }
  return v;
}

}  // namespace detail

inline EmbeddingBasis build_embedding_basis(int octaves = 5) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;

  std::vector<Vec3d> verts;
  for (double a : {-1.0, 1.0})
    for (double b : {-phi, phi}) {
      verts.emplace_back(0.0, a, b);
      verts.emplace_back(a, b, 0.0);
      verts.emplace_back(b, 0.0, a);
    }
  for (auto& v : verts) v.normalize();

  // Icosahedron edges connect vertex pairs at the minimal pairwise distance.
  double min_d = std::numeric_limits<double>::max();
  for (size_t i = 0; i < verts.size(); ++i)
    for (size_t j = i + 1; j < verts.size(); ++j)
      min_d = std::min(min_d, (verts[i] - verts[j]).norm());

  std::vector<Vec3d> axes;
  for (const auto& v : verts) axes.push_back(detail::canonical_axis(v));
  for (size_t i = 0; i < verts.size(); ++i)
    for (size_t j = i + 1; j < verts.size(); ++j)
      if ((verts[i] - verts[j]).norm() < min_d * 1.01) {
        Vec3d mid = (verts[i] + verts[j]).normalized();
        axes.push_back(detail::canonical_axis(mid));
      }

  std::sort(axes.begin(), axes.end(), [](const Vec3d& a, const Vec3d& b) {
    if (a.x() != b.x()) return a.x() < b.x();
    if (a.y() != b.y()) return a.y() < b.y();
    return a.z() < b.z();
  });
  std::vector<Vec3d> unique;
  for (const auto& a : axes) {
    if (!unique.empty() && (unique.back() - a).norm() < 1e-9) continue;
    unique.push_back(a);
  }

  EmbeddingBasis basis;
  basis.octaves = octaves;
  basis.dirs.resize(static_cast<int>(unique.size()), 3);
  for (size_t i = 0; i < unique.size(); ++i)
    basis.dirs.row(static_cast<int>(i)) = unique[i].transpose();
  return basis;
}

// Embedding of a batch of points (columns of x). Writes a dim x B matrix.
template <class S>
void embed_batch(const Eigen::Matrix<S, Eigen::Dynamic, 3>& dirs, int octaves,
                 const Eigen::Ref<const Mat3X<S>>& x, MatX<S>& out) {
  const int r = static_cast<int>(dirs.rows());
  const Eigen::Index cols = x.cols();
  out.resize(2 * r * (octaves + 1), cols);
  MatX<S> proj = dirs * x;  // r x B
  for (int k = 0; k <= octaves; ++k) {
    const S scale = static_cast<S>(1 << k);
    out.middleRows(k * 2 * r, r) = (proj * scale).array().sin().matrix();
    out.middleRows(k * 2 * r + r, r) = (proj * scale).array().cos().matrix();
  }
}

template <class S>
VecX<S> embed(const EmbeddingBasis& basis, const Vec3<S>& x) {
  Eigen::Matrix<S, Eigen::Dynamic, 3> dirs = basis.dirs.template cast<S>();
  Mat3X<S> xm(3, 1);
  xm.col(0) = x;
  MatX<S> out;
  embed_batch<S>(dirs, basis.octaves, xm, out);
  return out.col(0);
}

}  // namespace nsdf
