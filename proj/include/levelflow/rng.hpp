#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace levelflow {

//! Deterministic random stream.
//!
//! All draws are defined by explicit formulas on top of std::mt19937_64, whose
//! output sequence is fixed by the C++ standard. Distribution transforms from
//! <random> are implementation-defined, so they are not used here; instead:
//!   - uniform01() maps the top 53 bits of one engine draw to [0, 1),
//!   - normal() applies the Box-Muller transform to two uniform draws and
//!     caches the second variate,
//!   - uniform_index(n) uses rejection sampling on whole engine words.
//! Identically seeded streams therefore produce identical sequences on every
//! conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  //! Uniform draw in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  //! Uniform draw in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  //! Standard normal draw (Box-Muller, second variate cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  void fill_normal(double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = normal();
  }

  //! Uniform integer in [0, n), n >= 1. Rejection on raw 64-bit words keeps
  //! the draw exact and platform-stable.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t word = 0;
    do {
      word = engine_();
    } while (word >= limit);
    return word % n;
  }

  //! Fisher-Yates shuffle driven by uniform_index.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

  //! Derive an independent stream seed from (master, stream_id) by splitmix64
  //! finalization, so parallel work items get reproducible per-item streams.
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
    std::uint64_t x = master + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace levelflow
