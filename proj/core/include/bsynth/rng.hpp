#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace bsynth {

/// Deterministic random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. All derived variates are computed here rather than through the
/// <random> distributions (whose algorithms are implementation-defined), so
/// integer-valued results such as splits, shuffles and batch orders are
/// byte-identical across platforms for a given seed:
///
///   engine seed  = splitmix64(seed)
///   below(n)     = rejection sampling: draw x until x >= (2^64 - n) mod n, return x mod n
///   uniform()    = (x >> 11) * 2^-53
///   shuffle      = Fisher-Yates, i = n-1 .. 1, swap(i, below(i + 1))
///   normal()     = Box-Muller cosine branch, u1 = 1 - uniform()
///   gamma(k)     = Marsaglia-Tsang (k >= 1); k < 1 via gamma(k + 1) * u^(1/k)
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next() { return engine_(); }
    double uniform();
    std::uint64_t below(std::uint64_t n);
    double normal();
    double gamma(double shape);

    template <class T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Sub-seed for a named purpose: splitmix64(master ^ fnv1a64(label)).
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

}  // namespace bsynth
