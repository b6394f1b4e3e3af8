#pragma once

// Repeated application of a power-weighted distortion: closed-form
// iterates, limit beliefs, idempotence and fixed points.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coherent/distortion.hpp"

namespace coherent {

/// alpha is treated as exactly 1 within this band.
inline constexpr double kUnitAlphaBand = 1e-12;
/// Relative tolerance for grouping near-maximal log values.
inline constexpr double kArgmaxRelTolerance = 1e-9;
/// Largest state count for fixed-point enumeration.
inline constexpr std::size_t kMaxEnumeratedStates = 16;

inline bool unit_alpha(double alpha) { return std::abs(alpha - 1.0) <= kUnitAlphaBand; }

/// phi^n(p) proportional to p^(alpha^n) psi^(1 + alpha + ... + alpha^(n-1)).
inline Belief iterate(const PowerWeighted& d, const Belief& p, std::size_t n) {
    require(p.size() == d.size(), ErrorCode::InvalidArgument, "belief size does not match psi");
    if (n == 0) return p;
    const double a = d.alpha();
    const double nd = static_cast<double>(n);
    const double p_exp = std::pow(a, nd);
    const double psi_exp = unit_alpha(a) ? nd : std::expm1(nd * std::log(a)) / (a - 1.0);
    std::vector<double> lw(p.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) lw[i] = p_exp * std::log(p[i]) + psi_exp * d.log_psi()[i];
    }
    return from_log_weights(lw);
}

enum class LimitKind { SupportRule, MaximumLikelihoodRule, LexicographicRule, Identity };

constexpr std::string_view to_string(LimitKind k) noexcept {
    switch (k) {
        case LimitKind::SupportRule: return "support_rule";
        case LimitKind::MaximumLikelihoodRule: return "maximum_likelihood_rule";
        case LimitKind::LexicographicRule: return "lexicographic_rule";
        case LimitKind::Identity: return "identity";
    }
    return "unknown";
}

struct LimitClassification {
    LimitKind kind;
    Belief limit;
    /// Absent for closed-form limits.
    std::optional<std::size_t> iterations_to_tol;
    /// States of the limit's support.
    Event support;
    /// psi level sets in decreasing psi order; filled for the unit-alpha rules.
    std::vector<Event> level_sets;
};

namespace detail {

/// Indices in `candidates` whose value is within the relative band of the max.
inline Event argmax_group(const std::vector<double>& values, const Event& candidates) {
    double mx = -std::numeric_limits<double>::infinity();
    for (auto i : candidates) mx = std::max(mx, values[i]);
    const double band = kArgmaxRelTolerance * std::max(1.0, std::abs(mx));
    std::vector<std::size_t> out;
    for (auto i : candidates) {
        if (mx - values[i] <= band) out.push_back(i);
    }
    return Event(std::move(out));
}

/// psi^(1/(1-alpha)) normalized on E.
inline Belief tilted_on(const PowerWeighted& d, const Event& e) {
    std::vector<double> lw(d.size(), -std::numeric_limits<double>::infinity());
    for (auto i : e) lw[i] = d.log_psi()[i] / (1.0 - d.alpha());
    return from_log_weights(lw);
}

}  // namespace detail

/// Level sets of psi (grouped with the argmax tolerance), highest psi first.
inline std::vector<Event> psi_level_sets(const PowerWeighted& d) {
    std::vector<Event> out;
    std::vector<std::size_t> rest(d.size());
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = i;
    while (!rest.empty()) {
        const Event top = detail::argmax_group(d.log_psi(), Event(rest));
        std::erase_if(rest, [&](std::size_t i) { return top.contains(i); });
        out.push_back(top);
    }
    return out;
}

inline bool is_identity(const PowerWeighted& d, double psi_tol = 1e-9, double alpha_tol = 1e-7) {
    const auto [lo, hi] = std::minmax_element(d.psi().begin(), d.psi().end());
    return *hi - *lo <= psi_tol && std::abs(d.alpha() - 1.0) <= alpha_tol;
}

/// Closed-form limit of phi^n(p).
inline LimitClassification limit_belief(const PowerWeighted& d, const Belief& p) {
    require(p.size() == d.size(), ErrorCode::InvalidArgument, "belief size does not match psi");
    const Event supp = p.support();
    const double a = d.alpha();
    if (unit_alpha(a)) {
        auto levels = psi_level_sets(d);
        if (levels.size() == 1) return {LimitKind::Identity, p, std::nullopt, supp, std::move(levels)};
        const Event top = detail::argmax_group(d.log_psi(), supp);
        const Belief lim = condition(p, top, 0.0);
        return {LimitKind::LexicographicRule, lim, std::nullopt, lim.support(), std::move(levels)};
    }
    if (a < 1.0) return {LimitKind::SupportRule, detail::tilted_on(d, supp), std::nullopt, supp, {}};
    std::vector<double> score(d.size(), -std::numeric_limits<double>::infinity());
    for (auto i : supp) score[i] = (a - 1.0) * std::log(p[i]) + d.log_psi()[i];
    const Event top = detail::argmax_group(score, supp);
    return {LimitKind::MaximumLikelihoodRule, detail::tilted_on(d, top), std::nullopt, top, {}};
}

/// Deterministic beliefs used to test idempotence: uniform, vertices, edge
/// midpoints, (3, 1, ..., 1) and 2^-i weights with their reversals.
inline std::vector<Belief> idempotence_probes(std::size_t n) {
    std::vector<Belief> out{Belief::uniform(n)};
    for (std::size_t i = 0; i < n; ++i) out.push_back(Belief::point_mass(n, i));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) out.push_back(Belief::uniform_on(n, Event{i, j}));
    }
    if (n >= 2) {
        std::vector<double> skew(n, 1.0);
        skew[0] = 3.0;
        out.push_back(Belief::normalized(skew));
        std::reverse(skew.begin(), skew.end());
        out.push_back(Belief::normalized(skew));
        std::vector<double> geo(n);
        for (std::size_t i = 0; i < n; ++i) geo[i] = std::ldexp(1.0, -static_cast<int>(i));
        out.push_back(Belief::normalized(geo));
        std::reverse(geo.begin(), geo.end());
        out.push_back(Belief::normalized(geo));
    }
    return out;
}

/// phi(phi(p)) = phi(p) on every probe.
inline CheckReport<Belief> check_idempotence(const PowerWeighted& d, double tol = kDefaultTolerance) {
    CheckReport<Belief> report(tol);
    const auto probes = idempotence_probes(d.size());
    for (std::size_t k = 0; k < probes.size(); ++k) {
        const Belief once = d(probes[k]);
        report.observe(belief_distance(d(once), once), k, [&] { return probes[k]; });
    }
    return report;
}

struct FixedPoints {
    std::vector<Belief> points;
    /// psi level sets, highest first; only for unit alpha.
    std::vector<Event> level_sets;
};

/// For alpha != 1 the fixed point psi^(1/(1-alpha)) on every non-empty E.
/// For alpha = 1 the vertices plus the uniform belief on each psi level set.
inline FixedPoints enumerate_fixed_points(const PowerWeighted& d) {
    const std::size_t n = d.size();
    require(n <= kMaxEnumeratedStates, ErrorCode::StateSpaceTooLarge,
            "fixed-point enumeration supports at most 16 states");
    FixedPoints out;
    if (!unit_alpha(d.alpha())) {
        const std::uint64_t full = (std::uint64_t{1} << n) - 1;
        for (std::uint64_t mask = 1; mask <= full; ++mask) out.points.push_back(detail::tilted_on(d, Event::from_mask(mask)));
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) out.points.push_back(Belief::point_mass(n, i));
    out.level_sets = psi_level_sets(d);
    for (const auto& level : out.level_sets) {
        if (level.size() > 1) out.points.push_back(Belief::uniform_on(n, level));
    }
    return out;
}

/// Smallest n with |phi^n(p) - limit| <= tol, by repeated application.
inline std::size_t verify_limit_numerically(const PowerWeighted& d, const Belief& p, double tol = 1e-6,
                                            std::size_t max_n = 200) {
    const Belief target = limit_belief(d, p).limit;
    Belief cur = p;
    for (std::size_t n = 0;; ++n) {
        if (belief_distance(cur, target) <= tol) return n;
        if (n == max_n) break;
        cur = d(cur);
    }
    throw Error(ErrorCode::NoConvergence, "iterates still " + std::to_string(belief_distance(cur, target)) +
                                              " from the limit after " + std::to_string(max_n) + " steps");
}

}  // namespace coherent
