#include "eas/rng.hpp"

namespace eas {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      engine_(mix64(seed ^ mix64(stream_id + 0x632be59bd9b4e019ULL))) {}

RngStream RngStream::derive(std::uint64_t key) const {
  return RngStream(seed_, mix64(stream_id_ * 0x100000001b3ULL ^ mix64(key)));
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::chi_square(double dof) {
  std::chi_squared_distribution<double> dist(dof);
  return dist(engine_);
}

std::size_t RngStream::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace eas
