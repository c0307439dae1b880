#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bcast/model.hpp"

namespace bcast {

// Histories are flattened mixed-radix, earliest stage most significant:
//   (y^k, z^k)      -> sum_i (y_i |Z| + z_i) (|Y||Z|)^(k-1-i)
//   (y^k, z^{k-1})  -> yz_index(y^{k-1}, z^{k-1}) |Y| + y_k
//   z^k             -> sum_i z_i |Z|^(k-1-i)

inline std::size_t yz_index(std::span<const int> ys, std::span<const int> zs, const Alphabets& a) {
  std::size_t h = 0;
  for (std::size_t i = 0; i < zs.size(); ++i) h = h * a.outputs() + ys[i] * a.z + zs[i];
  return h;
}

inline std::size_t z_index(std::span<const int> zs, const Alphabets& a) {
  std::size_t h = 0;
  for (int z : zs) h = h * a.z + z;
  return h;
}

inline std::size_t yz_count(const Alphabets& a, int len) { return ipow(a.outputs(), len); }
inline std::size_t z_count(const Alphabets& a, int len) { return ipow(a.z, len); }

/// Inverse of yz_index for histories of length `len`.
inline void decode_yz(std::size_t h, int len, const Alphabets& a, std::vector<int>& ys,
                      std::vector<int>& zs) {
  ys.assign(len, 0);
  zs.assign(len, 0);
  for (int i = len - 1; i >= 0; --i) {
    const int pair = static_cast<int>(h % a.outputs());
    h /= a.outputs();
    ys[i] = pair / a.z;
    zs[i] = pair % a.z;
  }
}

/// z-part of a flattened (y^k, z^k) history.
inline std::size_t z_part(std::size_t h, int len, const Alphabets& a) {
  std::size_t out = 0, scale = 1;
  for (int i = 0; i < len; ++i) {
    out += (h % a.outputs() % a.z) * scale;
    scale *= a.z;
    h /= a.outputs();
  }
  return out;
}

}  // namespace bcast
