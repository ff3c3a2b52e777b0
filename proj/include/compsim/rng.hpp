#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace compsim {

// splitmix64 finalizer; good avalanche for seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed and stream tags.
inline std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t tag,
                                std::uint64_t index = 0) {
  return mix64(mix64(master ^ mix64(tag)) ^ index);
}

// Stream tags for the simulator's independent RNG streams.
namespace seedtag {
inline constexpr std::uint64_t kDrop = 0x44524f50ULL;    // UE placement + shadowing
inline constexpr std::uint64_t kFading = 0x46414445ULL;  // per-block fast fading
inline constexpr std::uint64_t kPilot = 0x50494c54ULL;   // per-block estimation noise
}  // namespace seedtag

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }

  double gaussian(double stddev) {
    return std::normal_distribution<double>(0.0, stddev)(eng_);
  }

  // CN(0, var): independent real/imag parts with variance var/2 each.
  std::complex<double> complexGaussian(double var) {
    const double s = std::sqrt(var / 2.0);
    return {gaussian(s), gaussian(s)};
  }

  void fillComplexGaussian(Eigen::Ref<Eigen::MatrixXcd> m, double var) {
    const double s = std::sqrt(var / 2.0);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        m(r, c) = std::complex<double>(gaussian(s), gaussian(s));
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace compsim
