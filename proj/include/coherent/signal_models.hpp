#pragma once

// Blackwell experiments, Bayesian posteriors, per-state signal distortions,
// and the Grether update with its coherence checks.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "coherent/distortion.hpp"

namespace coherent {

/// Row-stochastic likelihood matrix: rows are states, columns signals.
class BlackwellExperiment {
public:
    explicit BlackwellExperiment(Matrix rows) : m_(std::move(rows)) {
        require(m_.rows >= 1 && m_.cols >= 1, ErrorCode::InvalidArgument, "experiment must be non-empty");
        for (std::size_t r = 0; r < m_.rows; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < m_.cols; ++c) {
                const double v = m_(r, c);
                require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
                        "likelihoods must be finite and non-negative");
                s += v;
            }
            require(std::abs(s - 1.0) <= kInputSumTolerance, ErrorCode::InvalidArgument,
                    "likelihood row " + std::to_string(r) + " sums to " + std::to_string(s));
            for (std::size_t c = 0; c < m_.cols; ++c) m_(r, c) /= s;
        }
    }

    static BlackwellExperiment from_rows(const std::vector<std::vector<double>>& rows) {
        return BlackwellExperiment(Matrix::from_rows(rows));
    }

    [[nodiscard]] std::size_t states() const noexcept { return m_.rows; }
    [[nodiscard]] std::size_t signals() const noexcept { return m_.cols; }
    [[nodiscard]] double operator()(std::size_t state, std::size_t signal) const { return m_(state, signal); }
    [[nodiscard]] Belief row(std::size_t state) const { return Belief(m_.row(state)); }
    [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

inline Belief bayes_posterior(const Belief& p, const BlackwellExperiment& sigma, std::size_t theta,
                              double tol = kDefaultTolerance) {
    require(p.size() == sigma.states(), ErrorCode::InvalidArgument, "prior and experiment sizes differ");
    require(theta < sigma.signals(), ErrorCode::InvalidArgument, "signal index out of range");
    std::vector<double> w(p.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        w[i] = p[i] * sigma(i, theta);
        total += w[i];
    }
    require(total > tol, ErrorCode::ZeroProbabilitySignal,
            "signal " + std::to_string(theta) + " has probability " + std::to_string(total));
    return Belief::normalized(std::move(w));
}

/// One distortion of Delta(Theta) per state.
using BlackwellDistortion = std::vector<Distortion>;

struct SignalCoherenceWitness {
    std::size_t state;
    Belief likelihood;
    Event signal_event;
};

inline CheckReport<SignalCoherenceWitness> check_blackwell_signal_coherence(const BlackwellDistortion& g,
                                                                            std::size_t trials, std::uint64_t seed,
                                                                            double tol = kDefaultTolerance) {
    require(!g.empty(), ErrorCode::InvalidArgument, "Blackwell distortion needs at least one state");
    CheckReport<SignalCoherenceWitness> report(tol);
    for (std::size_t s = 0; s < g.size(); ++s) {
        const CoherenceReport r = check_coherence(g[s], trials, splitmix64(seed + s), tol);
        if (r.max_deviation > report.max_deviation || (!report.witness && r.witness)) {
            report.max_deviation = r.max_deviation;
            if (r.witness) report.witness = SignalCoherenceWitness{s, r.witness->belief, r.witness->event};
        }
        if (r.first_violation && !report.first_violation) report.first_violation = s * trials + *r.first_violation;
        report.trials += r.trials;
    }
    report.passed = report.max_deviation <= tol;
    return report;
}

/// Distorted likelihood map Delta(Theta) -> non-negative vectors over Theta;
/// outputs need not sum to one.
using SignalMap = std::function<std::vector<double>(const Belief&)>;

inline SignalMap identity_signal_map() {
    return [](const Belief& s) { return s.vec(); };
}

/// theta -> scale[theta] * s(theta)^exponent, zero kept at zero.
inline SignalMap power_signal_map(std::vector<double> scale, double exponent) {
    for (double v : scale) {
        require(std::isfinite(v) && v > 0.0, ErrorCode::InvalidArgument, "signal scale must be positive");
    }
    require(std::isfinite(exponent) && exponent > 0.0, ErrorCode::InvalidArgument, "signal exponent must be positive");
    return [scale = std::move(scale), exponent](const Belief& s) {
        require(s.size() == scale.size(), ErrorCode::InvalidArgument, "signal map size mismatch");
        std::vector<double> out(s.size(), 0.0);
        for (std::size_t t = 0; t < s.size(); ++t) {
            if (s[t] > 0.0) out[t] = scale[t] * std::pow(s[t], exponent);
        }
        return out;
    };
}

inline SignalMap signal_map_from(Distortion d) {
    return [d = std::move(d)](const Belief& s) { return d(s).vec(); };
}

/// Prior distortion f plus one signal map per state.
struct GretherSpec {
    Distortion f;
    std::vector<SignalMap> g;

    GretherSpec(Distortion prior, std::vector<SignalMap> maps) : f(std::move(prior)), g(std::move(maps)) {
        require(g.size() == f.size(), ErrorCode::InvalidArgument, "need one signal map per state");
    }

    /// Same signal map in every state.
    GretherSpec(Distortion prior, const SignalMap& map)
        : GretherSpec(prior, std::vector<SignalMap>(prior.size(), map)) {}
};

namespace detail {

inline std::vector<double> distorted_likelihoods(const GretherSpec& spec, const BlackwellExperiment& sigma,
                                                 std::size_t theta) {
    std::vector<double> out(sigma.states());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::vector<double> gi = spec.g[i](sigma.row(i));
        require(gi.size() == sigma.signals(), ErrorCode::InvalidArgument, "signal map changed the signal count");
        require(std::isfinite(gi[theta]) && gi[theta] >= 0.0, ErrorCode::NonPositiveOutput,
                "signal map produced a negative or non-finite value");
        out[i] = gi[theta];
    }
    return out;
}

}  // namespace detail

inline Belief grether_update(const GretherSpec& spec, const Belief& p, const BlackwellExperiment& sigma,
                             std::size_t theta, double tol = 0.0) {
    require(p.size() == sigma.states() && p.size() == spec.f.size(), ErrorCode::InvalidArgument,
            "prior, experiment and spec sizes differ");
    require(theta < sigma.signals(), ErrorCode::InvalidArgument, "signal index out of range");
    const Belief fp = spec.f(p);
    const std::vector<double> lik = detail::distorted_likelihoods(spec, sigma, theta);
    std::vector<double> w(p.size());
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = fp[i] * lik[i];
        total += w[i];
    }
    require(total > tol, ErrorCode::ZeroProbabilitySignal,
            "distorted signal " + std::to_string(theta) + " has zero weight");
    return Belief::normalized(std::move(w));
}

struct GretherWitness {
    Belief prior;
    Matrix likelihoods;
    std::size_t signal;
};
using GretherReport = CheckReport<GretherWitness>;

inline void require_grether_dimensions(std::size_t n, std::size_t m) {
    require(n >= 3, ErrorCode::Configuration, "Gretherian coherence needs at least 3 states");
    require(m >= 2, ErrorCode::Configuration, "Gretherian coherence needs at least 2 signals");
}

/// Gap between f(Bayes posterior) and the Grether update at one input.  A
/// side that is undefined while the other is defined scores 1.
inline double gretherian_gap(const GretherSpec& spec, const Belief& p, const BlackwellExperiment& sigma,
                             std::size_t theta) {
    const Belief lhs = spec.f(bayes_posterior(p, sigma, theta, 0.0));
    try {
        return belief_distance(lhs, grether_update(spec, p, sigma, theta));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ZeroProbabilitySignal) return 1.0;
        throw;
    }
}

inline GretherReport check_gretherian_coherence(const GretherSpec& spec, std::size_t m, std::size_t trials,
                                                std::uint64_t seed, double tol = kDefaultTolerance) {
    require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
    const std::size_t n = spec.f.size();
    require_grether_dimensions(n, m);
    GretherReport report(tol);
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, t);
        const Belief p = rng.mixed_belief(n);
        Matrix lik(n, m);
        for (std::size_t i = 0; i < n; ++i) {
            const Belief row = rng.mixed_belief(m);
            for (std::size_t c = 0; c < m; ++c) lik(i, c) = row[c];
        }
        const BlackwellExperiment sigma(lik);
        std::size_t theta = rng.index(m);
        auto signal_prob = [&](std::size_t s) {
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i) v += p[i] * sigma(i, s);
            return v;
        };
        while (signal_prob(theta) <= 0.0) theta = (theta + 1) % m;
        report.observe(gretherian_gap(spec, p, sigma, theta), t,
                       [&] { return GretherWitness{p, sigma.matrix(), theta}; });
    }
    return report;
}

/// Deterministic points of Delta(Theta): vertices, edge midpoints, barycenter.
inline std::vector<Belief> simplex_probe_grid(std::size_t m) {
    std::vector<Belief> grid;
    for (std::size_t i = 0; i < m; ++i) grid.push_back(Belief::point_mass(m, i));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) grid.push_back(Belief::uniform_on(m, Event{i, j}));
    }
    grid.push_back(Belief::uniform(m));
    return grid;
}

struct NormalizedGretherReport {
    bool passed = false;
    /// Every signal map output sums to 1 on the probe set.
    bool sums_to_one = false;
    bool coherent = false;
    /// Every signal map is the identity on the probe set.
    bool identity_maps = false;
    /// alpha recovered from f; NaN when f is degenerate.
    double prior_alpha = 0.0;
    double max_sum_gap = 0.0;
    std::optional<std::pair<std::size_t, Belief>> sum_witness;
    GretherReport coherence{};
};

/// True iff the signal maps are normalized and the model is Gretherian
/// coherent; then g must be the identity and f weighted, both asserted.
inline NormalizedGretherReport normalized_grether_check(const GretherSpec& spec, std::size_t m,
                                                        std::size_t trials = 1000, std::uint64_t seed = 0,
                                                        double tol = kDefaultTolerance) {
    const std::size_t n = spec.f.size();
    require_grether_dimensions(n, m);
    std::vector<Belief> probes = simplex_probe_grid(m);
    Rng rng(seed);
    for (int k = 0; k < 32; ++k) probes.push_back(rng.mixed_belief(m));

    NormalizedGretherReport out;
    double id_gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (const Belief& s : probes) {
            const std::vector<double> gi = spec.g[i](s);
            double sum = 0.0;
            for (double v : gi) sum += v;
            const double gap = std::abs(sum - 1.0);
            if (gap > out.max_sum_gap) {
                out.max_sum_gap = gap;
                if (gap > tol) out.sum_witness = std::make_pair(i, s);
            }
            if (gi.size() == s.size()) id_gap = std::max(id_gap, belief_distance(gi, s.probs()));
            else id_gap = std::numeric_limits<double>::infinity();
        }
    }
    out.sums_to_one = out.max_sum_gap <= tol;
    out.identity_maps = id_gap <= tol;
    out.coherence = check_gretherian_coherence(spec, m, trials, seed, tol);
    out.coherent = out.coherence.passed;
    try {
        out.prior_alpha = identify_alpha(spec.f);
    } catch (const Error&) {
        out.prior_alpha = std::numeric_limits<double>::quiet_NaN();
    }
    out.passed = out.sums_to_one && out.coherent && out.identity_maps && std::abs(out.prior_alpha - 1.0) <= 1e-7;
    return out;
}

}  // namespace coherent
