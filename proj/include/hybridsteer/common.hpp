#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hst {

using cxd = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Error categories. The numeric groups map onto CLI exit codes:
/// config/domain problems -> 2, numerical failures -> 3, I/O -> 4.
enum class Errc {
  invalid_argument,
  cutoff_too_small,
  degenerate_cat,
  zero_result,
  dimension_mismatch,
  empty_condition,
  too_many_strategies,
  config_invalid,
  numerical_failure,
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

  /// Process exit code for the CLI contract.
  int exit_code() const {
    switch (code_) {
      case Errc::numerical_failure: return 3;
      case Errc::io_error: return 4;
      default: return 2;
    }
  }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

// ---------------------------------------------------------------------------
// Deterministic random numbers.
//
// All randomness in the library flows from explicit 64-bit seeds through
// SplitMix64 streams. Derived seeds are produced with mix_seed(seed, tag),
// which folds an FNV-1a hash of the tag into the master seed and scrambles
// the result; this is the documented seed-splitting rule used by every
// pipeline stage (stage tag), per-event sampling (event id) and per-chain
// sampling (condition index).
// ---------------------------------------------------------------------------

struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  /// Standard normal via Box-Muller (no cached spare, two uniforms per call).
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  cxd cnormal() { return cxd(normal(), normal()); }
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ULL + salt));
  g.next();
  return g.next();
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
  return mix_seed(seed, fnv1a(tag));
}

}  // namespace hst
