#pragma once

// Distortions of beliefs over states: the power-weighted family, an opaque
// distortion handle, and checkers for coherence, the alpha = 1 cross-ratio
// test and Pi-marginality, plus recovery of (psi, alpha) from a black box.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coherent/random.hpp"
#include "coherent/report.hpp"
#include "coherent/simplex.hpp"

namespace coherent {

/// Log-separation of phi(uniform) below which psi is treated as uniform
/// when identifying alpha.
inline constexpr double kUniformPsiSeparation = 1e-8;

/// phi(p)(w) = psi(w) p(w)^alpha / sum over the support of psi p^alpha.
/// psi is stored normalized to sum 1.
class PowerWeighted {
public:
    PowerWeighted(std::vector<double> psi, double alpha) : psi_(std::move(psi)), alpha_(alpha) {
        require(!psi_.empty(), ErrorCode::InvalidArgument, "psi must be non-empty");
        require(std::isfinite(alpha_) && alpha_ > 0.0, ErrorCode::InvalidArgument, "alpha must be positive");
        double sum = 0.0;
        for (double v : psi_) {
            require(std::isfinite(v) && v > 0.0, ErrorCode::InvalidArgument, "psi entries must be positive");
            sum += v;
        }
        log_psi_.resize(psi_.size());
        for (std::size_t i = 0; i < psi_.size(); ++i) {
            psi_[i] /= sum;
            log_psi_[i] = std::log(psi_[i]);
        }
    }

    static PowerWeighted identity(std::size_t n) { return {std::vector<double>(n, 1.0), 1.0}; }

    [[nodiscard]] std::size_t size() const noexcept { return psi_.size(); }
    [[nodiscard]] const std::vector<double>& psi() const noexcept { return psi_; }
    [[nodiscard]] const std::vector<double>& log_psi() const noexcept { return log_psi_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }

    /// Evaluated in the log domain over support(p); zero stays zero.
    [[nodiscard]] Belief operator()(const Belief& p) const {
        require(p.size() == size(), ErrorCode::InvalidArgument, "belief size does not match psi");
        std::vector<double> lw(p.size(), -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] > 0.0) lw[i] = log_psi_[i] + alpha_ * std::log(p[i]);
        }
        return from_log_weights(lw);
    }

private:
    std::vector<double> psi_;
    std::vector<double> log_psi_;
    double alpha_;
};

inline Belief apply_power_weighted(const PowerWeighted& d, const Belief& p) { return d(p); }

/// A distortion Delta(Omega) -> Delta(Omega) over a fixed number of states,
/// either closed-form power-weighted or an arbitrary callable.
class Distortion {
public:
    using Fn = std::function<Belief(const Belief&)>;

    Distortion(std::size_t n, Fn fn, std::string name = "opaque")
        : n_(n), fn_(std::move(fn)), name_(std::move(name)) {
        require(n_ >= 1, ErrorCode::InvalidArgument, "distortion needs at least one state");
    }

    // NOLINTNEXTLINE(google-explicit-constructor)
    Distortion(PowerWeighted pw)
        : n_(pw.size()), fn_([pw](const Belief& p) { return pw(p); }), name_("power_weighted"), closed_form_(pw) {}

    static Distortion identity(std::size_t n) {
        return {n, [](const Belief& p) { return p; }, "identity"};
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const std::optional<PowerWeighted>& closed_form() const noexcept { return closed_form_; }

    Belief operator()(const Belief& p) const {
        require(p.size() == n_, ErrorCode::InvalidArgument, "belief size does not match distortion");
        Belief out = fn_(p);
        require(out.size() == n_, ErrorCode::InvalidArgument, "distortion '" + name_ + "' changed the state count");
        return out;
    }

private:
    std::size_t n_;
    Fn fn_;
    std::string name_;
    std::optional<PowerWeighted> closed_form_;
};

/// Distortions that are positive and continuous but not power-weighted.
namespace incoherent {

/// phi(p)(w) proportional to weight(p(w)) on support(p).
inline Distortion pointwise(std::size_t n, std::function<double(double)> weight, std::string name) {
    return {n,
            [weight = std::move(weight)](const Belief& p) {
                std::vector<double> w(p.size(), 0.0);
                for (std::size_t i = 0; i < p.size(); ++i) {
                    if (p[i] > 0.0) w[i] = weight(p[i]);
                }
                return Belief::normalized(std::move(w));
            },
            std::move(name)};
}

inline Distortion additive_smoothing(std::size_t n, double eps) {
    return pointwise(n, [eps](double x) { return x + eps; }, "additive_smoothing");
}

inline Distortion prelec(std::size_t n, double a) {
    return pointwise(n, [a](double x) { return std::exp(-std::pow(-std::log(x), a)); }, "prelec");
}

inline Distortion tversky_kahneman(std::size_t n, double g) {
    return pointwise(
        n, [g](double x) { return std::pow(x, g) / std::pow(std::pow(x, g) + std::pow(1.0 - x, g), 1.0 / g); },
        "tversky_kahneman");
}

inline Distortion quadratic(std::size_t n, double c) {
    return pointwise(n, [c](double x) { return x + c * x * x; }, "quadratic");
}

inline Distortion softmax(std::size_t n, double beta) {
    return pointwise(n, [beta](double x) { return std::exp(beta * x); }, "softmax");
}

}  // namespace incoherent

struct CoherenceWitness {
    Belief belief;
    Event event;
};
using CoherenceReport = CheckReport<CoherenceWitness>;

/// Commutation gap |phi(p(.|E)) - phi(p)(.|E)|_inf at a single (p, E) with
/// p(E) > 0.  A distorted event of mass zero is a positivity failure and
/// scores 1.
inline double coherence_gap(const Distortion& d, const Belief& p, const Event& e) {
    const Belief cond_first = d(condition(p, e, 0.0));
    const Belief distorted = d(p);
    if (event_prob(distorted, e) <= 0.0) return 1.0;
    return belief_distance(cond_first, condition(distorted, e, 0.0));
}

inline CoherenceReport check_coherence(const Distortion& d, std::size_t trials, std::uint64_t seed,
                                       double tol = kDefaultTolerance) {
    require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
    const std::size_t n = d.size();
    CoherenceReport report(tol);
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, t);
        Belief p = rng.mixed_belief(n);
        Event e = rng.event(n);
        while (event_prob(p, e) <= 0.0) e = rng.event(n);
        report.observe(coherence_gap(d, p, e), t, [&] { return CoherenceWitness{p, e}; });
    }
    return report;
}

/// phi(uniform), normalized.  For a power-weighted map this is psi.
inline std::vector<double> identify_psi(const Distortion& d) {
    const Belief out = d(Belief::uniform(d.size()));
    for (double v : out) {
        require(v > 0.0, ErrorCode::NonPositiveOutput, "phi(uniform) has a zero entry");
    }
    return out.vec();
}

/// Recovers alpha from the uniform belief and its first two images.  When
/// phi(uniform) is (numerically) uniform, falls back to a single probe
/// p proportional to (3, 1, ..., 1).
inline double identify_alpha(const Distortion& d) {
    const std::size_t n = d.size();
    if (n < 2) return 1.0;
    const std::vector<double> psi = identify_psi(d);
    std::size_t hi = 0;
    std::size_t lo = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (psi[i] > psi[hi]) hi = i;
        if (psi[i] < psi[lo]) lo = i;
    }
    const double sep = std::log(psi[hi]) - std::log(psi[lo]);
    if (sep > kUniformPsiSeparation) {
        const Belief twice = d(Belief(psi));
        require(twice[hi] > 0.0 && twice[lo] > 0.0, ErrorCode::NonPositiveOutput, "phi^2(uniform) has a zero entry");
        return (std::log(twice[hi]) - std::log(twice[lo])) / sep - 1.0;
    }
    std::vector<double> w(n, 1.0);
    w[0] = 3.0;
    const Belief probe = Belief::normalized(std::move(w));
    const Belief out = d(probe);
    require(out[0] > 0.0 && out[1] > 0.0, ErrorCode::NonPositiveOutput, "phi(probe) has a zero entry");
    // Residual psi ratio (below the separation threshold) is removed exactly.
    const double alpha = (std::log(out[0] / out[1]) - std::log(psi[0] / psi[1])) / std::log(3.0);
    require(std::isfinite(alpha) && alpha > 0.0, ErrorCode::DegenerateDistortion,
            "no state pair separates under the distortion; alpha is not identified");
    return alpha;
}

struct CrossRatioWitness {
    Belief p;
    Belief q;
    std::size_t i;
    std::size_t j;
};

/// Checks phi(p)_i phi(q)_j / (phi(p)_j phi(q)_i) = p_i q_j / (p_j q_i) on
/// sampled (p, q) and all admissible pairs; deviation is the absolute gap of
/// the log cross-ratios.
inline CheckReport<CrossRatioWitness> check_ratio_test_alpha1(const Distortion& d, std::size_t trials,
                                                              std::uint64_t seed, double tol = kDefaultTolerance) {
    require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
    const std::size_t n = d.size();
    CheckReport<CrossRatioWitness> report(tol);
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, t);
        const Belief p = rng.mixed_belief(n);
        const Belief q = rng.mixed_belief(n);
        const Belief dp = d(p);
        const Belief dq = d(q);
        double worst = 0.0;
        std::size_t wi = 0;
        std::size_t wj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j || p[i] <= 0.0 || p[j] <= 0.0 || q[i] <= 0.0 || q[j] <= 0.0) continue;
                const double lhs = std::log(dp[i]) - std::log(dp[j]) + std::log(dq[j]) - std::log(dq[i]);
                const double rhs = std::log(p[i]) - std::log(p[j]) + std::log(q[j]) - std::log(q[i]);
                const double gap = std::abs(lhs - rhs);
                if (!(gap <= worst)) {
                    worst = gap;
                    wi = i;
                    wj = j;
                }
            }
        }
        report.observe(worst, t, [&] { return CrossRatioWitness{p, q, wi, wj}; });
    }
    return report;
}

struct MarginalityWitness {
    Belief p;
    Belief p_prime;
    std::size_t block;
};

namespace detail {

inline double block_gap(const Distortion& d, const Partition& pi, const Belief& p, const Belief& pp,
                        std::size_t& worst_block) {
    const Belief a = d(p);
    const Belief b = d(pp);
    double worst = 0.0;
    for (std::size_t k = 0; k < pi.blocks().size(); ++k) {
        const double gap = std::abs(event_prob(a, pi.blocks()[k]) - event_prob(b, pi.blocks()[k]));
        if (gap > worst) {
            worst = gap;
            worst_block = k;
        }
    }
    return worst;
}

}  // namespace detail

/// Pi-marginality: beliefs agreeing on every block's mass must be distorted
/// to beliefs that agree on every block's mass.  Probes the two point-mass
/// constructions for each non-singleton block first, then samples pairs
/// that redistribute mass inside blocks.
inline CheckReport<MarginalityWitness> check_pi_marginality(const Distortion& d, const Partition& pi,
                                                            std::size_t trials, std::uint64_t seed,
                                                            double tol = kDefaultTolerance) {
    require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
    const std::size_t n = d.size();
    require(pi.space_size() == n, ErrorCode::InvalidArgument, "partition and distortion sizes differ");
    CheckReport<MarginalityWitness> report(tol);
    std::size_t step = 0;
    auto probe = [&](const Belief& p, const Belief& pp) {
        std::size_t blk = 0;
        const double gap = detail::block_gap(d, pi, p, pp, blk);
        report.observe(gap, step++, [&] { return MarginalityWitness{p, pp, blk}; });
    };

    for (const auto& block : pi.blocks()) {
        if (block.size() < 2 || block.size() == n) continue;
        const std::size_t w = block.members()[0];
        const std::size_t w2 = block.members()[1];
        std::size_t outside = 0;
        while (block.contains(outside)) ++outside;
        auto mix = [n](std::initializer_list<std::pair<std::size_t, double>> mass) {
            std::vector<double> v(n, 0.0);
            for (auto [i, m] : mass) v[i] += m;
            return Belief(std::move(v));
        };
        probe(mix({{w, 0.5}, {outside, 0.5}}), mix({{w2, 0.5}, {outside, 0.5}}));
        probe(mix({{w, 0.25}, {w2, 0.25}, {outside, 0.5}}), mix({{w, 0.5}, {outside, 0.5}}));
    }

    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, t);
        const Belief p = rng.mixed_belief(n);
        std::vector<double> moved(n, 0.0);
        for (const auto& block : pi.blocks()) {
            const double mass = event_prob(p, block);
            if (mass <= 0.0) continue;
            const Belief split = rng.dirichlet(n, rng.sub_event(block));
            for (auto i : block) moved[i] = mass * split[i];
        }
        probe(p, Belief::normalized(std::move(moved)));
    }
    return report;
}

}  // namespace coherent
