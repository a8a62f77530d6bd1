#pragma once

#include <cstdint>

namespace maass {

// Counter-based uniform stream: value(i) is a pure function of (seed, stream,
// i), so parallel consumers get identical draws regardless of scheduling.
// The mix is the splitmix64 finalizer applied to a Weyl sequence.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}

    std::uint64_t bits(std::uint64_t index) const {
        std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (index + 1);
        z ^= stream_ * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1), 53 random bits.
    double uniform(std::uint64_t index) const {
        return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
    }

    CounterRng substream(std::uint64_t stream) const {
        return CounterRng(seed_, stream_ * 0x100000001b3ULL + stream + 1);
    }

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

// Stateful convenience wrapper over a CounterRng stream.
class RngCursor {
  public:
    explicit RngCursor(CounterRng rng) : rng_(rng) {}
    double next_uniform() { return rng_.uniform(next_++); }

  private:
    CounterRng rng_;
    std::uint64_t next_ = 0;
};

}  // namespace maass
