#pragma once

#include <cstddef>
#include <functional>

#include "rarefuse/densities.hpp"
#include "rarefuse/rng.hpp"

namespace rarefuse {

struct SamplingOptions {
    unsigned workers = 1;          // 0 = hardware concurrency
    std::size_t block_size = 1024; // draws per independent stream
};

/// Draws `count` points from `density`, block b using stream.child(b), and
/// calls visit(index, z) for each. Blocks may run concurrently; the point at
/// a given index depends only on (stream, block_size, index).
void for_each_draw(const Density& density, std::size_t count, const RandomStream& stream,
                   const SamplingOptions& options,
                   const std::function<void(std::size_t, const Vector&)>& visit);

}  // namespace rarefuse
