#pragma once

// Internal seeding helpers. Every seeded feature derives its generator
// from mix(seed, role, index) so unrelated features never share a stream
// and results stay reproducible across worker counts and platforms.

#include <cstdint>
#include <random>
#include <vector>

namespace da::detail {

inline constexpr std::uint64_t role_block_fill = 1;
inline constexpr std::uint64_t role_shuffle_quota = 2;
inline constexpr std::uint64_t role_shuffle_split = 3;
inline constexpr std::uint64_t role_shuffle_merge = 4;
inline constexpr std::uint64_t role_shuffle_dest = 5;
inline constexpr std::uint64_t role_kmeans_init = 6;
inline constexpr std::uint64_t role_kmeans_reseed = 7;
inline constexpr std::uint64_t role_als_init = 8;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t role,
                              std::uint64_t index) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s ^= role * 0xd1342543de82ef95ull;
  std::uint64_t b = splitmix64(s);
  s ^= index * 0xaf251af3b0f025b5ull;
  std::uint64_t c = splitmix64(s);
  return a ^ (b << 1) ^ c;
}

// std::mt19937_64 plus distribution-free draws: the standard distributions
// may differ between library implementations, these cannot
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // uniform in [0, n), n >= 1
  std::size_t bounded(std::size_t n) {
    auto wide = static_cast<unsigned __int128>(next()) *
                static_cast<unsigned __int128>(n);
    return static_cast<std::size_t>(wide >> 64);
  }

  // uniform in [0, 1) with 53 significant bits
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
  std::mt19937_64 gen_;
};

inline std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = i;
  }
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = rng.bounded(i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

// Destination quota per partition of a row shuffle: quota[i][d] rows move
// from partition i to partition d. Built by shuffling a list holding each
// destination once per row it must receive, then dealing that list out to
// sources in contiguous runs of their sizes. Keeps every partition at its
// original size while each row still gets a seeded pseudo-random
// destination.
inline std::vector<std::vector<std::size_t>>
shuffle_quotas(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  std::size_t n = sizes.size();
  std::size_t total = 0;
  for (auto s : sizes) {
    total += s;
  }
  std::vector<std::size_t> slots;
  slots.reserve(total);
  for (std::size_t d = 0; d < n; ++d) {
    slots.insert(slots.end(), sizes[d], d);
  }
  Rng rng(mix_seed(seed, role_shuffle_quota, 0));
  for (std::size_t i = slots.size(); i > 1; --i) {
    std::swap(slots[i - 1], slots[rng.bounded(i)]);
  }
  std::vector<std::vector<std::size_t>> quota(n,
                                              std::vector<std::size_t>(n, 0));
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < sizes[i]; ++k) {
      ++quota[i][slots[pos++]];
    }
  }
  return quota;
}

// k distinct values from [0, n), in draw order
inline std::vector<std::size_t> sample_distinct(std::size_t k, std::size_t n,
                                                Rng& rng) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) {
    pool[i] = i;
  }
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + rng.bounded(n - i);
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

} // namespace da::detail
