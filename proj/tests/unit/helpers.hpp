#pragma once

#include "rng.hpp"
#include "tabular_mdp.hpp"

#include <vector>

namespace ilab::test {

/// Dirichlet(1) rows, or uniformly drawn point masses.
inline Policy random_policy(int S, int A, int H, std::uint64_t seed, bool deterministic = false) {
    CounterRng rng(seed);
    std::vector<double> probs(static_cast<std::size_t>(H) * S * A, 0.0);
    for (std::size_t row = 0; row < probs.size(); row += A) {
        if (deterministic) {
            probs[row + rng.below(static_cast<std::uint64_t>(A))] = 1.0;
            continue;
        }
        double sum = 0.0;
        for (int a = 0; a < A; ++a) sum += (probs[row + a] = rng.exponential());
        for (int a = 0; a < A; ++a) probs[row + a] /= sum;
    }
    return Policy(S, A, H, std::move(probs));
}

/// States 0..S-1 in a chain: every action moves s -> min(s+1, S-1); start at 0.
inline TabularMdp chain_mdp(int S, int A, int H) {
    std::vector<double> rho(S, 0.0);
    rho[0] = 1.0;
    std::vector<double> trans(static_cast<std::size_t>(H - 1) * S * A * S, 0.0);
    for (int t = 0; t + 1 < H; ++t)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a)
                trans[((static_cast<std::size_t>(t) * S + s) * A + a) * S + std::min(s + 1, S - 1)] = 1.0;
    std::vector<double> rewards(static_cast<std::size_t>(H) * S * A, 0.0);
    for (int t = 0; t < H; ++t)
        for (int s = 0; s < S; ++s) rewards[(static_cast<std::size_t>(t) * S + s) * A] = 1.0;
    return TabularMdp(S, A, H, std::move(rho), std::move(trans), std::move(rewards));
}

} // namespace ilab::test
