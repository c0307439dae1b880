#pragma once

#include <memory>

namespace bcast {

/// A strategy made runnable: one object plays the encoder and both decoders
/// for a single episode. Each stage is driven as
///
///     x    = encode(u, v);
///     uhat = decode_inner(y);
///     vhat = decode_outer(z);   // closes the stage
///
/// Runners carry per-episode state; clone one per concurrent episode.
class Executable {
 public:
  virtual ~Executable() = default;
  virtual std::unique_ptr<Executable> clone() const = 0;
  /// Returns to the start of an episode.
  virtual void reset() = 0;
  virtual int encode(int u, int v) = 0;
  virtual int decode_inner(int y) = 0;
  virtual int decode_outer(int z) = 0;
};

}  // namespace bcast
