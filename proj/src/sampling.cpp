#include "rarefuse/sampling.hpp"

#include <algorithm>

#include "rarefuse/errors.hpp"
#include "rarefuse/numeric.hpp"

namespace rarefuse {

void for_each_draw(const Density& density, std::size_t count, const RandomStream& stream,
                   const SamplingOptions& options,
                   const std::function<void(std::size_t, const Vector&)>& visit) {
    if (options.block_size == 0) throw InvalidArgument("block_size must be positive");
    const std::size_t blocks = (count + options.block_size - 1) / options.block_size;
    parallel_for(blocks, options.workers, [&](std::size_t b) {
        auto gen = stream.child(b).generator();
        const std::size_t begin = b * options.block_size;
        const std::size_t end = std::min(count, begin + options.block_size);
        for (std::size_t i = begin; i < end; ++i) visit(i, sample_one(density, gen));
    });
}

}  // namespace rarefuse
