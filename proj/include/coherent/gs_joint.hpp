#pragma once

// Joint state-signal distributions (GS matrices) and their distortions:
// weak and strong signal coherence, marginality, the weighted form and the
// composite constructor built from a signal-level distortion and per-signal
// state distortions.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coherent/distortion.hpp"

namespace coherent {

/// Largest signal count for which every signal event is enumerated.
inline constexpr std::size_t kMaxEnumeratedSignals = 12;

/// Probability distribution over states x signals, stored row-major with
/// states as rows.
class JointDistribution {
public:
    explicit JointDistribution(Matrix cells) : m_(std::move(cells)) {
        require(m_.rows >= 1 && m_.cols >= 1, ErrorCode::InvalidArgument, "joint distribution must be non-empty");
        double s = 0.0;
        for (double v : m_.data) {
            require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
                    "joint cells must be finite and non-negative");
            s += v;
        }
        require(std::abs(s - 1.0) <= kInputSumTolerance, ErrorCode::InvalidArgument,
                "joint cells sum to " + std::to_string(s) + ", not 1");
        if (std::abs(s - 1.0) > kSumDrift) {
            for (double& v : m_.data) v /= s;
        }
    }

    static JointDistribution from_rows(const std::vector<std::vector<double>>& rows) {
        return JointDistribution(Matrix::from_rows(rows));
    }

    /// Normalizes non-negative weights with positive total.
    static JointDistribution normalized(Matrix weights) {
        double s = 0.0;
        for (double v : weights.data) {
            require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument, "weights must be finite and non-negative");
            s += v;
        }
        require(s > 0.0 && std::isfinite(s), ErrorCode::InvalidArgument, "weights have no positive mass");
        for (double& v : weights.data) v /= s;
        return JointDistribution(std::move(weights));
    }

    /// Reshapes a belief over n*m cells (row-major).
    static JointDistribution from_belief(const Belief& b, std::size_t n, std::size_t m) {
        require(b.size() == n * m, ErrorCode::InvalidArgument, "belief size is not n*m");
        Matrix cells(n, m);
        cells.data = b.vec();
        return JointDistribution(std::move(cells));
    }

    [[nodiscard]] std::size_t states() const noexcept { return m_.rows; }
    [[nodiscard]] std::size_t signals() const noexcept { return m_.cols; }
    [[nodiscard]] double operator()(std::size_t w, std::size_t t) const { return m_(w, t); }
    [[nodiscard]] const Matrix& cells() const noexcept { return m_; }

    /// p(theta) summed over states.
    [[nodiscard]] double signal_prob(std::size_t t) const {
        double s = 0.0;
        for (std::size_t w = 0; w < states(); ++w) s += m_(w, t);
        return s;
    }

    [[nodiscard]] double signal_event_prob(const Event& s) const {
        s.check_within(signals());
        double v = 0.0;
        for (auto t : s) v += signal_prob(t);
        return v;
    }

    /// p(. ; theta): the state distribution inside column theta.
    [[nodiscard]] Belief column_conditional(std::size_t t) const {
        require(signal_prob(t) > 0.0, ErrorCode::ZeroProbabilitySignal, "signal has zero probability");
        return Belief::normalized(m_.col(t));
    }

    friend bool operator==(const JointDistribution&, const JointDistribution&) = default;

private:
    Matrix m_;
};

/// Subset of signal indices.
using SignalEvent = Event;

inline Belief state_marginal(const JointDistribution& p) {
    std::vector<double> out(p.states(), 0.0);
    for (std::size_t w = 0; w < p.states(); ++w) {
        for (std::size_t t = 0; t < p.signals(); ++t) out[w] += p(w, t);
    }
    return Belief::normalized(std::move(out));
}

inline Belief signal_marginal(const JointDistribution& p) {
    std::vector<double> out(p.signals(), 0.0);
    for (std::size_t t = 0; t < p.signals(); ++t) out[t] = p.signal_prob(t);
    return Belief::normalized(std::move(out));
}

/// p conditioned on states x S.  Throws ZeroProbabilityEvent when p(S) <= tol.
inline JointDistribution condition_on_signal_event(const JointDistribution& p, const SignalEvent& s,
                                                   double tol = kDefaultTolerance) {
    const double ps = p.signal_event_prob(s);
    require(ps > tol, ErrorCode::ZeroProbabilityEvent, "signal event has probability " + std::to_string(ps));
    Matrix out(p.states(), p.signals());
    for (std::size_t w = 0; w < p.states(); ++w) {
        for (auto t : s) out(w, t) = p(w, t) / ps;
    }
    return JointDistribution::normalized(std::move(out));
}

inline double joint_distance(const JointDistribution& a, const JointDistribution& b) {
    return belief_distance(a.cells().data, b.cells().data);
}

/// A distortion of GS matrices of fixed shape.
class JointDistortion {
public:
    using Fn = std::function<JointDistribution(const JointDistribution&)>;

    JointDistortion(std::size_t n, std::size_t m, Fn fn, std::string name = "opaque")
        : n_(n), m_(m), fn_(std::move(fn)), name_(std::move(name)) {
        require(n_ >= 1 && m_ >= 1, ErrorCode::InvalidArgument, "joint distortion needs states and signals");
    }

    static JointDistortion identity(std::size_t n, std::size_t m) {
        return {n, m, [](const JointDistribution& p) { return p; }, "identity"};
    }

    [[nodiscard]] std::size_t states() const noexcept { return n_; }
    [[nodiscard]] std::size_t signals() const noexcept { return m_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    JointDistribution operator()(const JointDistribution& p) const {
        require(p.states() == n_ && p.signals() == m_, ErrorCode::InvalidArgument,
                "joint distribution shape does not match distortion");
        JointDistribution out = fn_(p);
        require(out.states() == n_ && out.signals() == m_, ErrorCode::InvalidArgument,
                "joint distortion '" + name_ + "' changed the shape");
        return out;
    }

private:
    std::size_t n_;
    std::size_t m_;
    Fn fn_;
    std::string name_;
};

/// Cellwise psi(w) p(w, theta)^alpha, normalized over the support.
inline JointDistribution apply_joint_power(const std::vector<double>& psi, double alpha, const JointDistribution& p) {
    require(psi.size() == p.states(), ErrorCode::InvalidArgument, "psi size does not match state count");
    require(std::isfinite(alpha) && alpha > 0.0, ErrorCode::InvalidArgument, "alpha must be positive");
    std::vector<double> lw(p.states() * p.signals(), -std::numeric_limits<double>::infinity());
    for (std::size_t w = 0; w < p.states(); ++w) {
        require(std::isfinite(psi[w]) && psi[w] > 0.0, ErrorCode::InvalidArgument, "psi entries must be positive");
        for (std::size_t t = 0; t < p.signals(); ++t) {
            if (p(w, t) > 0.0) lw[w * p.signals() + t] = std::log(psi[w]) + alpha * std::log(p(w, t));
        }
    }
    return JointDistribution::from_belief(from_log_weights(lw), p.states(), p.signals());
}

inline JointDistribution apply_weighted_gs(const std::vector<double>& psi, const JointDistribution& p) {
    return apply_joint_power(psi, 1.0, p);
}

inline JointDistortion weighted_gs(std::vector<double> psi, std::size_t m) {
    const std::size_t n = psi.size();
    (void)PowerWeighted(psi, 1.0);
    return {n, m, [psi = std::move(psi)](const JointDistribution& p) { return apply_weighted_gs(psi, p); },
            "weighted_gs"};
}

inline JointDistortion joint_power(std::vector<double> psi, double alpha, std::size_t m) {
    const std::size_t n = psi.size();
    (void)PowerWeighted(psi, alpha);
    return {n, m,
            [psi = std::move(psi), alpha](const JointDistribution& p) { return apply_joint_power(psi, alpha, p); },
            "joint_power"};
}

/// Signal-level distortion: GS matrix -> non-negative weights over signals.
/// Weights at zero-probability signals are ignored.
using SignalLevelMap = std::function<std::vector<double>(const JointDistribution&)>;

inline SignalLevelMap signal_marginal_map() {
    return [](const JointDistribution& p) { return signal_marginal(p).vec(); };
}

/// Per-signal tilt of a column's conditional state distribution.
using ColumnWeight = std::function<double(const Belief&)>;

/// weight(theta) = tilt_theta(p(. ; theta)) * p(theta)^alpha.
inline SignalLevelMap multiplicative_signal_map(std::vector<ColumnWeight> tilt, double alpha) {
    require(std::isfinite(alpha) && alpha > 0.0, ErrorCode::InvalidArgument, "alpha must be positive");
    return [tilt = std::move(tilt), alpha](const JointDistribution& p) {
        require(tilt.size() == p.signals(), ErrorCode::InvalidArgument, "need one tilt per signal");
        std::vector<double> w(p.signals(), 0.0);
        for (std::size_t t = 0; t < p.signals(); ++t) {
            const double pt = p.signal_prob(t);
            if (pt > 0.0) w[t] = tilt[t](p.column_conditional(t)) * std::pow(pt, alpha);
        }
        return w;
    };
}

/// phi(p)(w, theta) = varphi(p)(theta) * h_theta(p(. ; theta))(w), zero on
/// signals of zero probability, renormalized.
inline JointDistortion build_composite_distortion(std::size_t n, std::size_t m, SignalLevelMap varphi,
                                                  std::vector<Distortion> h, std::string name = "composite") {
    require(h.size() == m, ErrorCode::InvalidArgument, "need one state distortion per signal");
    for (const auto& ht : h) {
        require(ht.size() == n, ErrorCode::InvalidArgument, "state distortion size does not match state count");
    }
    return {n, m,
            [varphi = std::move(varphi), h = std::move(h)](const JointDistribution& p) {
                const std::vector<double> sw = varphi(p);
                require(sw.size() == p.signals(), ErrorCode::InvalidArgument, "signal map changed the signal count");
                Matrix out(p.states(), p.signals());
                for (std::size_t t = 0; t < p.signals(); ++t) {
                    if (p.signal_prob(t) <= 0.0) continue;
                    require(std::isfinite(sw[t]) && sw[t] > 0.0, ErrorCode::NonPositiveOutput,
                            "signal map is not positive on a positive-probability signal");
                    const Belief col = h[t](p.column_conditional(t));
                    for (std::size_t w = 0; w < p.states(); ++w) out(w, t) = sw[t] * col[w];
                }
                return JointDistribution::normalized(std::move(out));
            },
            std::move(name)};
}

struct JointCoherenceWitness {
    JointDistribution joint;
    SignalEvent signal_event;
};
using JointCoherenceReport = CheckReport<JointCoherenceWitness>;

/// |phi(p(.|S)) - phi(p)(.|S)|_inf; a distorted event of mass zero scores 1.
inline double signal_coherence_gap(const JointDistortion& d, const JointDistribution& p, const SignalEvent& s) {
    const JointDistribution lhs = d(condition_on_signal_event(p, s, 0.0));
    const JointDistribution dp = d(p);
    if (dp.signal_event_prob(s) <= 0.0) return 1.0;
    return joint_distance(lhs, condition_on_signal_event(dp, s, 0.0));
}

namespace detail {

inline JointDistribution sample_joint(Rng& rng, std::size_t n, std::size_t m) {
    return JointDistribution::from_belief(rng.mixed_belief(n * m), n, m);
}

}  // namespace detail

inline JointCoherenceReport check_weak_signal_coherence(const JointDistortion& d, std::size_t trials,
                                                        std::uint64_t seed, double tol = kDefaultTolerance) {
    require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
    JointCoherenceReport report(tol);
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, t);
        const JointDistribution p = detail::sample_joint(rng, d.states(), d.signals());
        std::size_t theta = rng.index(d.signals());
        while (p.signal_prob(theta) <= 0.0) theta = (theta + 1) % d.signals();
        const SignalEvent s{theta};
        report.observe(signal_coherence_gap(d, p, s), t, [&] { return JointCoherenceWitness{p, s}; });
    }
    return report;
}

/// Quantifies over every non-empty proper signal event of positive mass.
inline JointCoherenceReport check_strong_signal_coherence(const JointDistortion& d, std::size_t trials,
                                                          std::uint64_t seed, double tol = kDefaultTolerance) {
    require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
    const std::size_t m = d.signals();
    require(m <= kMaxEnumeratedSignals, ErrorCode::SignalSpaceTooLarge,
            "strong coherence enumerates signal events only for m <= 12");
    JointCoherenceReport report(tol);
    const std::uint64_t full = (std::uint64_t{1} << m) - 1;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, t);
        const JointDistribution p = detail::sample_joint(rng, d.states(), m);
        double worst = 0.0;
        std::optional<SignalEvent> worst_event;
        for (std::uint64_t mask = 1; mask < full; ++mask) {
            const SignalEvent s = Event::from_mask(mask);
            if (p.signal_event_prob(s) <= 0.0) continue;
            const double gap = signal_coherence_gap(d, p, s);
            if (!(gap <= worst)) {
                worst = gap;
                worst_event = s;
            }
        }
        report.observe(worst, t, [&] { return JointCoherenceWitness{p, *worst_event}; });
    }
    return report;
}

struct JointMarginalityWitness {
    JointDistribution p;
    JointDistribution p_prime;
};

/// Two GS matrices with equal state marginals must map to matrices with
/// equal state marginals.  For n >= 3, m >= 2 the fixed pair
/// [[1/3,0],[1/6,1/6],[0,1/3]] vs its collapse into the first signal is
/// probed first.
inline CheckReport<JointMarginalityWitness> check_marginality(const JointDistortion& d, std::size_t trials,
                                                              std::uint64_t seed, double tol = kDefaultTolerance) {
    require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
    const std::size_t n = d.states();
    const std::size_t m = d.signals();
    CheckReport<JointMarginalityWitness> report(tol);
    std::size_t step = 0;
    auto probe = [&](const JointDistribution& p, const JointDistribution& pp) {
        const double gap = belief_distance(state_marginal(d(p)), state_marginal(d(pp)));
        report.observe(gap, step++, [&] { return JointMarginalityWitness{p, pp}; });
    };

    if (n >= 3 && m >= 2) {
        Matrix a(n, m);
        Matrix b(n, m);
        a(0, 0) = 1.0 / 3.0;
        a(1, 0) = 1.0 / 6.0;
        a(1, 1) = 1.0 / 6.0;
        a(2, 1) = 1.0 / 3.0;
        b(0, 0) = 1.0 / 3.0;
        b(1, 0) = 1.0 / 3.0;
        b(2, 0) = 1.0 / 3.0;
        probe(JointDistribution::normalized(a), JointDistribution::normalized(b));
    }

    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, t);
        const JointDistribution p = detail::sample_joint(rng, n, m);
        Matrix moved(n, m);
        for (std::size_t w = 0; w < n; ++w) {
            double row = 0.0;
            for (std::size_t c = 0; c < m; ++c) row += p(w, c);
            const Belief split = rng.dirichlet(m);
            for (std::size_t c = 0; c < m; ++c) moved(w, c) = row * split[c];
        }
        probe(p, JointDistribution::normalized(std::move(moved)));
    }
    return report;
}

/// Embeds q in column theta_star, distorts, and returns the state marginal.
/// Every other column embedding must agree; otherwise MarginalityViolation.
inline Belief induced_marginal_distortion(const JointDistortion& d, const Belief& q, std::size_t theta_star,
                                          double tol = kDefaultTolerance) {
    require(q.size() == d.states(), ErrorCode::InvalidArgument, "belief size does not match state count");
    require(theta_star < d.signals(), ErrorCode::InvalidArgument, "signal index out of range");
    auto embed = [&](std::size_t t) {
        Matrix cells(d.states(), d.signals());
        for (std::size_t w = 0; w < d.states(); ++w) cells(w, t) = q[w];
        return state_marginal(d(JointDistribution::normalized(std::move(cells))));
    };
    const Belief out = embed(theta_star);
    for (std::size_t t = 0; t < d.signals(); ++t) {
        if (t == theta_star) continue;
        const double gap = belief_distance(out, embed(t));
        require(gap <= tol, ErrorCode::MarginalityViolation,
                "embeddings in signals " + std::to_string(theta_star) + " and " + std::to_string(t) +
                    " differ by " + std::to_string(gap));
    }
    return out;
}

/// Which side condition licenses the full weighted form, and what holds.
struct WeightedFormDiagnostic {
    bool states_cover_signals = false;          // n >= m
    bool strong_with_three_signals = false;     // m >= 3 and strongly coherent
    bool full_form_asserted = false;
    bool weak_coherent = false;
    bool strong_coherent = false;
    bool marginal = false;
    std::vector<double> psi;
    /// max |phi(p)(.|theta) - weighted(p(.|theta))| over samples.
    double conditional_form_gap = 0.0;
    /// max |phi(p) - weighted(p)|; only computed when full_form_asserted.
    std::optional<double> full_form_gap;
};

/// Checks the weighted conclusion for a joint distortion.  The conditional
/// form is always checked; the full matrix form only when n >= m, or when
/// m >= 3 and the distortion is strongly coherent.
inline WeightedFormDiagnostic diagnose_weighted_form(const JointDistortion& d, std::size_t trials, std::uint64_t seed,
                                                     double tol = kDefaultTolerance) {
    const std::size_t n = d.states();
    const std::size_t m = d.signals();
    WeightedFormDiagnostic out;
    out.weak_coherent = check_weak_signal_coherence(d, trials, seed, tol).passed;
    out.strong_coherent = m <= kMaxEnumeratedSignals && check_strong_signal_coherence(d, trials, seed, tol).passed;
    out.marginal = check_marginality(d, trials, seed, tol).passed;
    out.states_cover_signals = n >= m;
    out.strong_with_three_signals = m >= 3 && out.strong_coherent;
    out.full_form_asserted = out.states_cover_signals || out.strong_with_three_signals;
    // A weighted form sends the uniform matrix to psi on the state marginal.
    out.psi = state_marginal(d(JointDistribution::from_belief(Belief::uniform(n * m), n, m))).vec();
    double cond_gap = 0.0;
    double full_gap = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed ^ 0x5eedULL, t);
        const JointDistribution p = detail::sample_joint(rng, n, m);
        const JointDistribution dp = d(p);
        const JointDistribution wp = apply_weighted_gs(out.psi, p);
        for (std::size_t c = 0; c < m; ++c) {
            if (p.signal_prob(c) <= 0.0) continue;
            if (dp.signal_prob(c) <= 0.0) {
                cond_gap = 1.0;
                continue;
            }
            cond_gap = std::max(cond_gap, belief_distance(dp.column_conditional(c), wp.column_conditional(c)));
        }
        full_gap = std::max(full_gap, joint_distance(dp, wp));
    }
    out.conditional_form_gap = cond_gap;
    if (out.full_form_asserted) out.full_form_gap = full_gap;
    return out;
}

}  // namespace coherent
