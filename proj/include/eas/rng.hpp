#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace eas {

/// Seeded pseudo-random stream. Two streams constructed from the same
/// (seed, stream id) pair produce bit-identical draw sequences, so any
/// parallel unit of work can own a stream derived from its logical key
/// instead of sharing one engine.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  /// Child stream keyed by `key`; independent of how many draws were made
  /// from this stream.
  [[nodiscard]] RngStream derive(std::uint64_t key) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();
  double chi_square(double dof);
  /// Uniform integer on [0, n).
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// SplitMix64 finalizer; used for stream derivation and hashing keys.
std::uint64_t mix64(std::uint64_t x);

}  // namespace eas
