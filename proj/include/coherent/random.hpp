#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "coherent/simplex.hpp"

namespace coherent {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded generator with the draws the property checkers need.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    /// Generator for trial `index` of a run seeded with `seed`; independent of
    /// how many draws earlier trials consumed.
    static Rng for_trial(std::uint64_t seed, std::uint64_t index) {
        return Rng(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
    }

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

    bool coin(double p_true = 0.5) { return uniform() < p_true; }

    /// Flat Dirichlet on the sub-simplex supported by `support`, via
    /// normalized unit-exponential draws.
    Belief dirichlet(std::size_t n, const Event& support) {
        support.check_within(n);
        std::exponential_distribution<double> expo(1.0);
        std::vector<double> w(n, 0.0);
        for (auto i : support) {
            double x = 0.0;
            while (x <= 0.0) x = expo(engine_);
            w[i] = x;
        }
        return Belief::normalized(std::move(w));
    }

    Belief dirichlet(std::size_t n) { return dirichlet(n, Event::all(n)); }

    /// Uniformly random non-empty subset of {0..n-1}.
    Event event(std::size_t n) {
        require(n >= 1 && n <= 62, ErrorCode::InvalidArgument, "random events need 1 <= n <= 62");
        const std::uint64_t full = (std::uint64_t{1} << n) - 1;
        std::uniform_int_distribution<std::uint64_t> pick(1, full);
        return Event::from_mask(pick(engine_));
    }

    /// Random non-empty subset of `within`.
    Event sub_event(const Event& within) {
        std::vector<std::size_t> m;
        while (m.empty()) {
            for (auto i : within) {
                if (coin()) m.push_back(i);
            }
        }
        return Event(std::move(m));
    }

    /// Full-support Dirichlet draw half of the time; otherwise a draw on a
    /// random support of size >= min(2, n), exercising the simplex boundary.
    Belief mixed_belief(std::size_t n) {
        if (n == 1 || coin()) return dirichlet(n);
        Event s = event(n);
        while (s.size() < 2) s = event(n);
        return dirichlet(n, s);
    }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// Deterministic flat-Dirichlet sample with mass exactly on `support`.
inline Belief sample_belief(const StateSpace& space, const Event& support, std::uint64_t seed) {
    Rng rng(seed);
    return rng.dirichlet(space.size(), support);
}

}  // namespace coherent
