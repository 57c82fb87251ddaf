#pragma once

// Seeded, order-independent random streams and deterministic reductions.

#include <cstdint>
#include <random>
#include <span>

namespace doobkit {

/// Engine for stream `stream` under `seed`. The engine is a Mersenne twister
/// seeded with a splitmix64 hash of (seed, stream), so stream i is the same
/// no matter which worker draws it or in which order streams are consumed.
/// A seed_seq over the pair would cost about 25 us per stream, which
/// dominates simulation at one stream per path.
std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream);

/// Uniform draw in (0, 1), never exactly 0 or 1.
double open_uniform(std::mt19937_64& engine);

/// Fixed-shape pairwise summation: the result depends only on the values and
/// their order, never on how work was split.
double pairwise_sum(std::span<const double> values);

}  // namespace doobkit
