#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sburg {

// Philox4x32-10 block cipher (Salmon et al., Random123). Counter-based:
// the k-th block of output is a pure function of (key, counter=k), so
// ensemble member m can own stream (seed, m) with no state shared between
// workers and no warm-up.
namespace philox {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Counter block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

}  // namespace philox

/// Seeded, streamed random source. Stream ids partition the counter space,
/// so (seed, stream) pairs give independent reproducible sequences.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint64_t next_u64() {
    if (word_ >= 4) refill();
    const std::uint64_t lo = buffer_[word_];
    const std::uint64_t hi = buffer_[word_ + 1];
    word_ += 2;
    return lo | (hi << 32);
  }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; pairs cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    // u1 in (0,1] keeps the log finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  void refill() {
    const philox::Counter ctr = {static_cast<std::uint32_t>(block_index_),
                                 static_cast<std::uint32_t>(block_index_ >> 32),
                                 stream_lo_, stream_hi_};
    buffer_ = philox::block(ctr, key_);
    ++block_index_;
    word_ = 0;
  }

  philox::Key key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t block_index_ = 0;
  philox::Counter buffer_{};
  int word_ = 4;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Stream-id layout: low byte = channel within a member, rest = member index.
// Channels 1..7 drive the spatial noise modes, kPsiChannel the weak model's
// second noise.
inline constexpr unsigned kChannelBits = 8;
inline constexpr std::uint64_t kPsiChannel = 9;

inline std::uint64_t make_stream(std::uint64_t member, std::uint64_t channel) {
  return (member << kChannelBits) | channel;
}

/// A seeded Wiener path sampled at resolution dt: increments[i] ~ N(0, dt),
/// bit-identical on regeneration with the same (seed, stream, dt, n).
struct WienerIncrements {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double dt = 0.0;
  std::vector<double> increments;

  std::size_t size() const noexcept { return increments.size(); }
};

inline WienerIncrements generate_increments(std::uint64_t seed, double dt,
                                            std::size_t n,
                                            std::uint64_t stream = 0) {
  if (!(dt > 0.0)) throw std::invalid_argument("generate_increments: dt must be > 0");
  WienerIncrements w;
  w.seed = seed;
  w.stream = stream;
  w.dt = dt;
  w.increments.resize(n);
  Rng rng(seed, stream);
  const double scale = std::sqrt(dt);
  for (std::size_t i = 0; i < n; ++i) w.increments[i] = scale * rng.normal();
  return w;
}

}  // namespace sburg
