#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace sausage {

/// SplitMix64 finalizer; used to derive independent stream keys.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** generator. Satisfies UniformRandomBitGenerator.
class Xoshiro256
{
  public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t key) noexcept
    {
        std::uint64_t sm = key;
        for (auto& word : s_)
            word = splitmix64(sm);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept
    {
        result_type const result = rotl(s_[1] * 5, 7) * 9;
        result_type const t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    friend bool operator==(Xoshiro256 const&, Xoshiro256 const&) = default;

  private:
    static constexpr result_type rotl(result_type x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

/*!
 * Identifies one random stream of an ensemble.
 *
 * The stream is a pure function of (seed, index): the key is the SplitMix64
 * image of the seed mixed with the index, so workers can construct any
 * path's stream without coordination.
 */
struct RngSpec
{
    std::uint64_t seed = 0;
    std::uint64_t index = 0;

    [[nodiscard]] std::uint64_t key() const noexcept
    {
        std::uint64_t a = seed;
        std::uint64_t const hs = splitmix64(a);
        std::uint64_t b = hs ^ (index * 0xd1b54a32d192ed03ULL);
        return splitmix64(b);
    }

    [[nodiscard]] RngSpec child(std::uint64_t sub) const noexcept
    {
        return RngSpec{key(), sub};
    }
};

/// Engine bundled with the distributions used by the samplers.
class Rng
{
  public:
    explicit Rng(RngSpec const& spec) : engine_(spec.key()) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

    /// Uniform integer in [0, n).
    std::size_t below(std::size_t n)
    {
        boost::random::uniform_int_distribution<std::size_t> dist(0, n - 1);
        return dist(engine_);
    }

    Xoshiro256& engine() noexcept { return engine_; }

  private:
    Xoshiro256 engine_;
    boost::random::normal_distribution<double> normal_{0.0, 1.0};
    boost::random::uniform_01<double> uniform_;
};

}  // namespace sausage
