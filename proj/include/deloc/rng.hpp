#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace deloc {

/// Philox4x32-10 block cipher (Salmon et al. 2011). Maps a 128-bit counter and
/// a 64-bit key to 128 random bits with no state.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter encrypt(Counter ctr, Key key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

/// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  Xoshiro256() = default;
  explicit Xoshiro256(const std::array<std::uint64_t, 4>& state) : s_(state) {
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9E3779B97F4A7C15ull;
  }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

/// Engine whose state is a pure function of (seed, stream, counter): two Philox
/// blocks seed a xoshiro256++ generator.
inline Xoshiro256 keyed_engine(std::uint64_t seed, std::uint32_t stream, std::uint64_t counter) {
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto lo = static_cast<std::uint32_t>(counter);
  const auto hi = static_cast<std::uint32_t>(counter >> 32);
  const auto a = Philox4x32::encrypt({0u, lo, hi, stream}, key);
  const auto b = Philox4x32::encrypt({1u, lo, hi, stream}, key);
  auto join = [](std::uint32_t x, std::uint32_t y) { return (std::uint64_t{x} << 32) | y; };
  return Xoshiro256({join(a[0], a[1]), join(a[2], a[3]), join(b[0], b[1]), join(b[2], b[3])});
}

/// Per-chain noise source. Every step consumes exactly `normals_per_step`
/// standard normals followed by `uniforms_per_step` uniforms, and the values
/// for step k depend only on (seed, stream, k). Steps are grouped into keyed
/// segments so that short steps (d = 1) do not pay a cipher call each.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint32_t stream, std::size_t normals_per_step,
              std::size_t uniforms_per_step = 0)
      : seed_(seed),
        stream_(stream),
        normals_per_step_(normals_per_step),
        uniforms_per_step_(uniforms_per_step),
        steps_per_segment_(normals_per_step >= 256 ? 1 : 256 / (normals_per_step + 1)) {}

  std::size_t normals_per_step() const { return normals_per_step_; }

  /// Fills `normals` (size normals_per_step) and `uniforms` (size
  /// uniforms_per_step) with the draws for `step`.
  void draw(std::uint64_t step, std::span<double> normals, std::span<double> uniforms = {}) {
    const std::uint64_t segment = step / steps_per_segment_;
    if (!engine_valid_ || segment != segment_ || step < next_step_) {
      engine_ = keyed_engine(seed_, stream_, segment);
      segment_ = segment;
      next_step_ = segment * steps_per_segment_;
      engine_valid_ = true;
    }
    while (next_step_ < step) skip_one();
    for (double& z : normals) z = normal_(engine_);
    for (double& u : uniforms) u = uniform_(engine_);
    ++next_step_;
  }

 private:
  void skip_one() {
    for (std::size_t i = 0; i < normals_per_step_; ++i) (void)normal_(engine_);
    for (std::size_t i = 0; i < uniforms_per_step_; ++i) (void)uniform_(engine_);
    ++next_step_;
  }

  std::uint64_t seed_;
  std::uint32_t stream_;
  std::size_t normals_per_step_;
  std::size_t uniforms_per_step_;
  std::uint64_t steps_per_segment_;
  Xoshiro256 engine_;
  bool engine_valid_ = false;
  std::uint64_t segment_ = 0;
  std::uint64_t next_step_ = 0;
  boost::random::normal_distribution<double> normal_;
  boost::random::uniform_01<double> uniform_;
};

/// Stream ids for the different consumers inside one chain.
enum class StreamRole : std::uint32_t { Main = 0, Warmup = 1, Init = 2, Auxiliary = 3 };

inline std::uint32_t stream_id(std::size_t chain, StreamRole role) {
  return static_cast<std::uint32_t>(chain * 4 + static_cast<std::uint32_t>(role));
}

}  // namespace deloc
