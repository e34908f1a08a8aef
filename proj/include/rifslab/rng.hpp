#ifndef RIFSLAB_RNG_HPP
#define RIFSLAB_RNG_HPP

#include <cstdint>
#include <vector>

#include "rifslab/rifs.hpp"

namespace rifslab {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace detail

/// Counter-based source of perturbation draws: the draw vector at a tree node
/// depends only on (master_seed, path), so any traversal order replays the
/// same realization.
class RealizationTree {
public:
    RealizationTree(std::uint64_t master_seed, std::vector<PerturbationLaw> laws)
        : seed_(master_seed), laws_(std::move(laws)) {}

    std::uint64_t master_seed() const { return seed_; }
    const std::vector<PerturbationLaw>& laws() const { return laws_; }
    std::size_t L() const { return laws_.size(); }

    /// Keyed state of the tree root; fold letters with child_state to descend.
    std::uint64_t root_state() const { return detail::splitmix64(seed_ ^ 0x243f6a8885a308d3ULL); }
    static std::uint64_t child_state(std::uint64_t s, int letter) {
        return detail::splitmix64(s ^ (static_cast<std::uint64_t>(letter) * 0x100000001b3ULL));
    }
    std::uint64_t state_at(const Word& word) const {
        std::uint64_t s = root_state();
        for (int letter : word.letters) s = child_state(s, letter);
        return s;
    }

    /// Uniform in the open unit interval for (node state, law index), 1-based index.
    double uniform01_at(std::uint64_t state, int law_index) const {
        std::uint64_t s =
            detail::splitmix64(state ^ (static_cast<std::uint64_t>(law_index) * 0xc2b2ae3d27d4eb4fULL));
        return (static_cast<double>(s >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform01(const Word& word, int law_index) const {
        return uniform01_at(state_at(word), law_index);
    }

    /// Centered offset Y_i drawn at the node with the given state.
    double offset_at(std::uint64_t state, int law_index) const {
        return laws_[static_cast<std::size_t>(law_index - 1)].sample(uniform01_at(state, law_index));
    }

    /// Full translation draw D_i = t_i + Y_i at the node with the given state.
    double draw_at(std::uint64_t state, int law_index) const {
        const auto& law = laws_[static_cast<std::size_t>(law_index - 1)];
        return to_double(law.center) + law.sample(uniform01_at(state, law_index));
    }

    /// Centered offset Y_i drawn at the given node.
    double offset(const Word& word, int law_index) const {
        return offset_at(state_at(word), law_index);
    }

    /// Full translation draw D_i = t_i + Y_i at the node.
    double draw(const Word& word, int law_index) const {
        return draw_at(state_at(word), law_index);
    }

    /// All L draws at a node.
    std::vector<double> draws(const Word& word) const {
        std::vector<double> out(laws_.size());
        for (std::size_t i = 0; i < laws_.size(); ++i)
            out[i] = draw(word, static_cast<int>(i) + 1);
        return out;
    }

private:
    std::uint64_t seed_;
    std::vector<PerturbationLaw> laws_;
};

} // namespace rifslab

#endif
