#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace jkde {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace detail

//! Derives a child seed from a master seed and a sequence of task keys.
//! The result depends only on the values, never on the order in which
//! tasks are executed.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> keys)
{
  std::uint64_t s = detail::splitmix64(master);
  for (auto k : keys)
    s = detail::splitmix64(s ^ detail::splitmix64(k + 0x632be59bd9b4e019ULL));
  return s;
}

//! Caller-owned random stream.
//!
//! The engine is std::mt19937_64, whose output sequence is fixed by the
//! standard. The mapping to doubles is done here rather than through
//! <random> distributions, which are implementation-defined, so that draws
//! are reproducible across standard libraries.
class RngStream
{
public:
  explicit RngStream(std::uint64_t seed)
    : engine_(seed)
  {}

  RngStream(std::uint64_t master, std::initializer_list<std::uint64_t> keys)
    : engine_(derive_seed(master, keys))
  {}

  std::uint64_t next_u64() { return engine_(); }

  //! Uniform on the open interval (0, 1), on a grid of spacing 2^-52 offset
  //! by half a step. u - 0.5 is computed exactly and stays strictly inside
  //! (-0.5, 0.5), also after adding -1 or +1.
  double uniform01()
  {
    const auto k = engine_() >> 12;
    return (static_cast<double>(k) + 0.5) * 0x1p-52;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  //! Standard normal draw (Box-Muller, one draw per call).
  double normal()
  {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double prob) { return uniform01() < prob; }

  //! Binomial(size, prob) as a sum of Bernoulli trials; intended for the
  //! small category counts used in simulations.
  int binomial(int size, double prob)
  {
    int s = 0;
    for (int i = 0; i < size; ++i)
      s += bernoulli(prob) ? 1 : 0;
    return s;
  }

private:
  std::mt19937_64 engine_;
};

} // namespace jkde
