#include "rarefuse/rng.hpp"

namespace rarefuse {

RandomStream RandomStream::child(std::uint64_t index) const {
    auto path = path_;
    path.push_back(index);
    return RandomStream(seed_, std::move(path));
}

Generator RandomStream::generator() const {
    std::vector<std::uint32_t> words;
    words.reserve(2 * (path_.size() + 1) + 1);
    auto push = [&words](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed_);
    // Length tag keeps {1} and {1, 0} distinct.
    words.push_back(static_cast<std::uint32_t>(path_.size()));
    for (auto p : path_) push(p);
    std::seed_seq seq(words.begin(), words.end());
    return Generator(seq);
}

}  // namespace rarefuse
