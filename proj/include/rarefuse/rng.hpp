#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace rarefuse {

using Generator = std::mt19937_64;

/// A seeded, hierarchically addressable random stream.
///
/// Every (seed, path) pair maps to an independent generator through
/// std::seed_seq, so work can be partitioned into blocks or chains whose
/// draws do not depend on how many threads execute them.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::vector<std::uint64_t> path = {})
        : seed_(seed), path_(std::move(path)) {}

    [[nodiscard]] RandomStream child(std::uint64_t index) const;
    [[nodiscard]] Generator generator() const;

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] const std::vector<std::uint64_t>& path() const { return path_; }

private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> path_;
};

}  // namespace rarefuse
