#pragma once

// Decision-theoretic uses of distorted beliefs: Chew weighted utility over
// lotteries, motivated beliefs under generalized KL costs, act evaluation
// and dynamic consistency, and the Dutch book against incoherent updating.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coherent/distortion.hpp"

namespace coherent {

/// Real payoff per state.
using Act = std::vector<double>;

/// Finite-support lottery over monetary outcomes.
class Lottery {
public:
    Lottery(std::vector<double> outcomes, std::vector<double> probs)
        : outcomes_(std::move(outcomes)), probs_(std::move(probs)) {
        require(!outcomes_.empty(), ErrorCode::InvalidArgument, "lottery needs at least one outcome");
        require(outcomes_.size() == probs_.size(), ErrorCode::InvalidArgument, "outcomes and probs differ in length");
        for (double x : outcomes_) require(std::isfinite(x), ErrorCode::InvalidArgument, "outcomes must be finite");
        std::vector<double> sorted = outcomes_;
        std::sort(sorted.begin(), sorted.end());
        require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorCode::InvalidArgument,
                "lottery outcomes must be distinct");
        for (double q : probs_) require(q > 0.0, ErrorCode::InvalidArgument, "lottery probabilities must be positive");
        (void)Belief(probs_);
    }

    [[nodiscard]] std::size_t size() const noexcept { return outcomes_.size(); }
    [[nodiscard]] const std::vector<double>& outcomes() const noexcept { return outcomes_; }
    [[nodiscard]] const std::vector<double>& probs() const noexcept { return probs_; }
    [[nodiscard]] Belief belief() const { return Belief(probs_); }

    void check_within(double lo, double hi) const {
        for (double x : outcomes_) {
            require(x >= lo && x <= hi, ErrorCode::InvalidArgument,
                    "outcome " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
    }

private:
    std::vector<double> outcomes_;
    std::vector<double> probs_;
};

/// Strictly positive weight over outcomes.
class WeightFunction {
public:
    using Fn = std::function<double(double)>;

    explicit WeightFunction(Fn fn, std::string name = "custom") : fn_(std::move(fn)), name_(std::move(name)) {}

    static WeightFunction constant(double c = 1.0) {
        require(c > 0.0, ErrorCode::InvalidArgument, "weight must be positive");
        return WeightFunction([c](double) { return c; }, "constant");
    }

    /// Linear interpolation between knots sorted by x; flat beyond the ends.
    static WeightFunction piecewise_linear(std::vector<std::pair<double, double>> knots) {
        require(!knots.empty(), ErrorCode::InvalidArgument, "weight function needs at least one knot");
        std::sort(knots.begin(), knots.end());
        for (std::size_t i = 0; i < knots.size(); ++i) {
            require(std::isfinite(knots[i].first) && std::isfinite(knots[i].second) && knots[i].second > 0.0,
                    ErrorCode::InvalidArgument, "weight knots must be finite and positive");
            require(i == 0 || knots[i].first > knots[i - 1].first, ErrorCode::InvalidArgument,
                    "weight knots must have distinct x");
        }
        return WeightFunction(
            [knots = std::move(knots)](double x) {
                if (x <= knots.front().first) return knots.front().second;
                if (x >= knots.back().first) return knots.back().second;
                auto hi = std::upper_bound(knots.begin(), knots.end(), x,
                                           [](double v, const auto& k) { return v < k.first; });
                auto lo = hi - 1;
                const double t = (x - lo->first) / (hi->first - lo->first);
                return lo->second + t * (hi->second - lo->second);
            },
            "piecewise_linear");
    }

    /// x -> exp(kappa * u(x)).
    static WeightFunction exponential(double kappa, std::function<double(double)> u) {
        return WeightFunction([kappa, u = std::move(u)](double x) { return std::exp(kappa * u(x)); }, "exponential");
    }

    double operator()(double x) const {
        const double w = fn_(x);
        require(std::isfinite(w) && w > 0.0, ErrorCode::NonPositiveOutput,
                "weight function is not positive at " + std::to_string(x));
        return w;
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }

private:
    Fn fn_;
    std::string name_;
};

using UtilityFn = std::function<double(double)>;

/// Sum psi(x) p(x) u(x) / sum psi(x) p(x).
inline double weighted_utility(const Lottery& l, const WeightFunction& psi, const UtilityFn& u) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i) {
        const double w = psi(l.outcomes()[i]) * l.probs()[i];
        num += w * u(l.outcomes()[i]);
        den += w;
    }
    return num / den;
}

/// Sum_w f(w) d(p)(w).
inline double act_value(const Act& f, const Distortion& d, const Belief& p) {
    require(f.size() == p.size(), ErrorCode::InvalidArgument, "act and belief sizes differ");
    const Belief q = d(p);
    double v = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) v += f[i] * q[i];
    return v;
}

/// The weighted (alpha = 1) distortion over a lottery's outcomes.
inline PowerWeighted lottery_distortion(const Lottery& l, const WeightFunction& psi, double alpha = 1.0) {
    std::vector<double> w(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) w[i] = psi(l.outcomes()[i]);
    return {std::move(w), alpha};
}

/// f on E, g elsewhere.
inline Act splice(const Act& f, const Act& g, const Event& e) {
    require(f.size() == g.size(), ErrorCode::InvalidArgument, "spliced acts differ in length");
    e.check_within(f.size());
    Act out = g;
    for (auto i : e) out[i] = f[i];
    return out;
}

// ---------------------------------------------------------------------------
// Allais common-consequence pattern

struct AllaisGrid {
    std::vector<double> slopes;      // psi(x) = 1 + slope * x / x_max, slope > -1
    std::vector<double> curvatures;  // u(x) = x^c, c > 0
    double scale = 1.0;              // outcomes are {0, 1, 5} * scale
};

inline AllaisGrid default_allais_grid() {
    AllaisGrid g;
    for (int i = 0; i <= 38; ++i) g.slopes.push_back(-0.95 + 0.1 * i);
    for (int i = 1; i <= 30; ++i) g.curvatures.push_back(0.05 * i);
    return g;
}

struct AllaisConfig {
    double slope = 0.0;
    double curvature = 1.0;
    /// A: 1 for sure; B: 5 w.p. .10, 1 w.p. .89, 0 w.p. .01;
    /// C: 1 w.p. .11, 0 w.p. .89; D: 5 w.p. .10, 0 w.p. .90.
    std::array<Lottery, 4> lotteries;
    std::array<double, 4> values{};
};

inline std::array<Lottery, 4> allais_lotteries(double scale) {
    const double lo = 0.0;
    const double mid = 1.0 * scale;
    const double hi = 5.0 * scale;
    return {Lottery({mid}, {1.0}), Lottery({hi, mid, lo}, {0.10, 0.89, 0.01}), Lottery({mid, lo}, {0.11, 0.89}),
            Lottery({hi, lo}, {0.10, 0.90})};
}

inline std::array<double, 4> allais_values(const std::array<Lottery, 4>& ls, const WeightFunction& psi,
                                           const UtilityFn& u) {
    return {weighted_utility(ls[0], psi, u), weighted_utility(ls[1], psi, u), weighted_utility(ls[2], psi, u),
            weighted_utility(ls[3], psi, u)};
}

/// First (slope, curvature) on the grid with A > B and D > C, or none.
inline std::optional<AllaisConfig> find_allais_config(const AllaisGrid& grid, double margin = 1e-12) {
    require(grid.scale > 0.0, ErrorCode::InvalidArgument, "Allais scale must be positive");
    const auto ls = allais_lotteries(grid.scale);
    const double x_max = 5.0 * grid.scale;
    for (double slope : grid.slopes) {
        if (!(slope > -1.0)) continue;
        const WeightFunction psi([slope, x_max](double x) { return 1.0 + slope * x / x_max; }, "affine");
        for (double c : grid.curvatures) {
            if (!(c > 0.0)) continue;
            const UtilityFn u = [c](double x) { return x <= 0.0 ? 0.0 : std::pow(x, c); };
            const auto v = allais_values(ls, psi, u);
            if (v[0] > v[1] + margin && v[3] > v[2] + margin) {
                return AllaisConfig{slope, c, ls, v};
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Motivated beliefs: max_q u.q - (1/K) sum q (ln q - Lambda ln p)

struct MotivatedProblem {
    Act u;
    double K;
    double Lambda;
    Belief p;

    MotivatedProblem(Act utilities, double k, double lambda, Belief prior)
        : u(std::move(utilities)), K(k), Lambda(lambda), p(std::move(prior)) {
        require(u.size() == p.size(), ErrorCode::InvalidArgument, "utilities and prior differ in length");
        for (double v : u) require(std::isfinite(v), ErrorCode::InvalidArgument, "utilities must be finite");
        require(std::isfinite(K) && K > 0.0, ErrorCode::InvalidArgument, "K must be positive");
        require(std::isfinite(Lambda) && Lambda > 0.0, ErrorCode::InvalidArgument, "Lambda must be positive");
        require(p.full_support(), ErrorCode::InvalidArgument, "motivated prior must have full support");
    }
};

inline double motivated_objective(const MotivatedProblem& mp, const Belief& q) {
    require(q.size() == mp.p.size(), ErrorCode::InvalidArgument, "belief size does not match problem");
    double v = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        v += mp.u[i] * q[i];
        if (q[i] > 0.0) v -= q[i] * (std::log(q[i]) - mp.Lambda * std::log(mp.p[i])) / mp.K;
    }
    return v;
}

/// q proportional to exp(K u) p^Lambda.
inline Belief solve_motivated_closed_form(const MotivatedProblem& mp) {
    std::vector<double> lw(mp.p.size());
    for (std::size_t i = 0; i < lw.size(); ++i) lw[i] = mp.K * mp.u[i] + mp.Lambda * std::log(mp.p[i]);
    return from_log_weights(lw);
}

/// Max-norm of the gradient minus its q-weighted mean.
inline double motivated_residual(const MotivatedProblem& mp, const Belief& q) {
    const std::size_t n = q.size();
    std::vector<double> grad(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        grad[i] = mp.u[i] - (std::log(q[i]) + 1.0 - mp.Lambda * std::log(mp.p[i])) / mp.K;
        mean += q[i] * grad[i];
    }
    double r = 0.0;
    for (double g : grad) r = std::max(r, std::abs(g - mean));
    return r;
}

struct MotivatedSolution {
    Belief q;
    std::size_t iterations;
    double residual;
};

/// Entropic mirror ascent from q = p with step K/2, halving the step when
/// the objective drops.
inline MotivatedSolution solve_motivated_numerical_detailed(const MotivatedProblem& mp, std::size_t max_iters = 10000,
                                                            double tol = 1e-11) {
    const std::size_t n = mp.p.size();
    Belief q = mp.p;
    double obj = motivated_objective(mp, q);
    double eta = mp.K / 2.0;
    for (std::size_t it = 0; it <= max_iters; ++it) {
        const double res = motivated_residual(mp, q);
        if (res <= tol) return {q, it, res};
        if (it == max_iters) break;
        for (int halvings = 0;; ++halvings) {
            std::vector<double> lw(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double grad = mp.u[i] - (std::log(q[i]) + 1.0 - mp.Lambda * std::log(mp.p[i])) / mp.K;
                lw[i] = std::log(q[i]) + eta * grad;
            }
            Belief next = from_log_weights(lw);
            const double next_obj = motivated_objective(mp, next);
            if (next_obj >= obj - 1e-15 * (1.0 + std::abs(obj)) || halvings >= 60) {
                q = std::move(next);
                obj = next_obj;
                break;
            }
            eta /= 2.0;
        }
    }
    throw Error(ErrorCode::NoConvergence, "mirror ascent residual " + std::to_string(motivated_residual(mp, q)) +
                                              " above " + std::to_string(tol) + " after " +
                                              std::to_string(max_iters) + " iterations");
}

inline Belief solve_motivated_numerical(const MotivatedProblem& mp, std::size_t max_iters = 10000, double tol = 1e-11) {
    return solve_motivated_numerical_detailed(mp, max_iters, tol).q;
}

// ---------------------------------------------------------------------------
// Dynamic consistency

/// Differences within this band count as ties.
inline constexpr double kPreferenceTieBand = 1e-9;

struct ConsistencyWitness {
    Belief p;
    Event event;
    Act f;
    Act g;
    Act h;
    double ex_ante;   // V(f_E g; p) - V(h_E g; p)
    double ex_post;   // same under p(.|E)
};

/// Deviation is 0 when the ex-ante and ex-post comparisons agree, else the
/// smaller of the two magnitudes.
inline CheckReport<ConsistencyWitness> check_dynamic_consistency(const Distortion& d, std::size_t trials,
                                                                 std::uint64_t seed,
                                                                 double band = kPreferenceTieBand) {
    require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
    const std::size_t n = d.size();
    CheckReport<ConsistencyWitness> report(band);
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, t);
        const Belief p = rng.dirichlet(n);
        const Event e = rng.event(n);
        Act f(n);
        Act g(n);
        Act h(n);
        for (std::size_t i = 0; i < n; ++i) {
            f[i] = rng.uniform(-1.0, 1.0);
            g[i] = rng.uniform(-1.0, 1.0);
            h[i] = rng.uniform(-1.0, 1.0);
        }
        const Act fe = splice(f, g, e);
        const Act he = splice(h, g, e);
        const Belief pe = condition(p, e, 0.0);
        const double ante = act_value(fe, d, p) - act_value(he, d, p);
        const double post = act_value(fe, d, pe) - act_value(he, d, pe);
        const bool flip = (ante > band && post < -band) || (ante < -band && post > band);
        const double dev = flip ? std::min(std::abs(ante), std::abs(post)) : 0.0;
        report.observe(dev, t, [&] { return ConsistencyWitness{p, e, f, g, h, ante, post}; });
    }
    return report;
}

// ---------------------------------------------------------------------------
// Dutch book

struct DutchBook {
    Event event;
    std::size_t win_state;
    std::size_t lose_state;
    double stake;
    double loss_rate;
    double alpha_bet;
    /// Risk-neutral value on E when beliefs are conditioned, then distorted.
    double value_condition_first;
    /// Same, when beliefs are distorted, then conditioned.
    double value_distort_first;
};

/// Bet paying `stake` on win_state and losing loss_rate * stake on
/// lose_state, priced between the two timings: the condition-first timing
/// values it positively, the distort-first timing negatively.  None when the
/// timings agree on E within tol.
inline std::optional<DutchBook> construct_dutch_book(const Distortion& d, const Belief& p, const Event& e,
                                                     double stake, double tol = kDefaultTolerance) {
    require(e.size() >= 2, ErrorCode::InvalidArgument, "Dutch book needs an event with at least two states");
    require(stake > 0.0 && std::isfinite(stake), ErrorCode::InvalidArgument, "stake must be positive");
    // The bet is settled only on E, so both timings are compared as beliefs on E.
    const Belief cond_distorted = d(condition(p, e, 0.0));
    require(event_prob(cond_distorted, e) > 0.0, ErrorCode::NonPositiveOutput,
            "distorted conditional gives the event zero mass");
    const Belief cond_first = condition(cond_distorted, e, 0.0);
    const Belief dp = d(p);
    require(event_prob(dp, e) > 0.0, ErrorCode::NonPositiveOutput, "distorted belief gives the event zero mass");
    const Belief dist_first = condition(dp, e, 0.0);

    // Win on the state the condition-first timing overweights most, lose on
    // the one it underweights most.  Both beliefs sum to 1 on E, so the two
    // exist whenever the timings differ.
    std::size_t w1 = e.members().front();
    std::size_t w2 = e.members().front();
    for (auto i : e) {
        const double gap = cond_first[i] - dist_first[i];
        if (gap > cond_first[w1] - dist_first[w1]) w1 = i;
        if (gap < cond_first[w2] - dist_first[w2]) w2 = i;
    }
    if (cond_first[w1] - dist_first[w1] <= tol && dist_first[w2] - cond_first[w2] <= tol) return std::nullopt;

    const double a1 = cond_first[w1];
    const double a2 = cond_first[w2];
    const double b1 = dist_first[w1];
    const double b2 = dist_first[w2];
    const double alpha_bet = 0.5 * (a1 / (a1 + a2) + b1 / (b1 + b2));
    const double loss_rate = alpha_bet / (1.0 - alpha_bet);
    return DutchBook{e,
                     w1,
                     w2,
                     stake,
                     loss_rate,
                     alpha_bet,
                     stake * (a1 - loss_rate * a2),
                     stake * (b1 - loss_rate * b2)};
}

// ---------------------------------------------------------------------------
// Weak continuity along merging outcomes

struct ContinuityDiagnostic {
    double alpha;
    std::vector<double> offsets;
    /// distorted mass of {x_n, x*} minus the limit's distorted mass of x*.
    std::vector<double> gaps;
    /// gap as the offset vanishes.
    double limit_gap;
    bool converges;
};

/// Sequence q_n = 1/3 on each of x', x* + offset, x*, whose weak limit puts
/// 1/3 on x' and 2/3 on x*.  Compares the distorted mass of the merging pair
/// against the distorted mass of x* under the limit lottery.
inline ContinuityDiagnostic continuity_diagnostic(const WeightFunction& psi, double alpha, double x_prime,
                                                  double x_star, const std::vector<double>& offsets,
                                                  double tol = 1e-9) {
    require(alpha > 0.0 && std::isfinite(alpha), ErrorCode::InvalidArgument, "alpha must be positive");
    require(x_prime != x_star, ErrorCode::InvalidArgument, "x' and x* must differ");
    const double third = std::pow(1.0 / 3.0, alpha);
    const double limit_mass =
        psi(x_star) * std::pow(2.0 / 3.0, alpha) / (psi(x_prime) * third + psi(x_star) * std::pow(2.0 / 3.0, alpha));
    auto merged_mass = [&](double x_n) {
        const double pair = (psi(x_n) + psi(x_star)) * third;
        return pair / (psi(x_prime) * third + pair);
    };
    ContinuityDiagnostic out{alpha, offsets, {}, merged_mass(x_star) - limit_mass, true};
    for (double off : offsets) {
        require(off != 0.0 && x_star + off != x_prime, ErrorCode::InvalidArgument,
                "offsets must keep the three outcomes distinct");
        out.gaps.push_back(merged_mass(x_star + off) - limit_mass);
    }
    out.converges = std::abs(out.limit_gap) <= tol;
    return out;
}

/// True iff the weighted (alpha = 1) lottery distortion built from psi
/// carries the merging sequence to its limit.
inline bool check_weak_continuity_alpha1(const WeightFunction& psi, double x_prime, double x_star,
                                         const std::vector<double>& offsets, double tol = 1e-9) {
    const auto diag = continuity_diagnostic(psi, 1.0, x_prime, x_star, offsets, tol);
    if (!diag.converges) return false;
    // Gaps must shrink as the offset shrinks.
    std::vector<std::pair<double, double>> by_offset;
    for (std::size_t i = 0; i < offsets.size(); ++i) by_offset.emplace_back(std::abs(offsets[i]), std::abs(diag.gaps[i]));
    std::sort(by_offset.begin(), by_offset.end());
    for (std::size_t i = 1; i < by_offset.size(); ++i) {
        if (by_offset[i - 1].second > by_offset[i].second + tol) return false;
    }
    return true;
}

}  // namespace coherent
