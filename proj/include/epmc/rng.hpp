#ifndef EPMC_RNG_HPP
#define EPMC_RNG_HPP

#include <cstdint>

namespace epmc::rng {

// Counter-based random numbers: every draw is a pure function of
// (seed, stream, counter), so path-level parallelism cannot change any
// sampled value and replays are bit-exact.

constexpr std::uint64_t kGamma1 = 0x9E3779B97F4A7C15ull;  // golden ratio
constexpr std::uint64_t kGamma2 = 0xD1B54A32D192ED03ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z += kGamma1;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ (stream * kGamma2));
  h = mix64(h ^ (counter * kGamma1));
  return h;
}

// Derive a sub-seed for a named usage domain. Training, evaluation and
// campaign draws live in disjoint stream namespaces.
enum class Domain : std::uint64_t {
  kTrain = 0x7261696Eull,
  kEval = 0x6576616Cull,
  kCampaignTrain = 0x63747261ull,
  kCampaignEval = 0x63657661ull,
  kProbe = 0x70726F62ull,
};

inline std::uint64_t derive_seed(std::uint64_t seed, Domain domain, std::uint64_t index) {
  return key(seed, static_cast<std::uint64_t>(domain), index);
}

// Uniform in the open interval (0, 1); never returns an exact endpoint.
inline double uniform01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Inverse of the standard normal CDF (Wichura's AS 241, double precision).
double normal_quantile(double p);

inline double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return normal_quantile(uniform01(key(seed, stream, counter)));
}

}  // namespace epmc::rng

#endif  // EPMC_RNG_HPP
