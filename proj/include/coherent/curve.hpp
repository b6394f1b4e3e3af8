#pragma once

// Two-state probability weighting curves p -> phi(p)(w1) and their shape.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "coherent/distortion.hpp"

namespace coherent {

/// Distorted probability of the first of two states with weights (psi1, psi2).
inline double two_state_weight(double psi1, double psi2, double alpha, double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    return PowerWeighted({psi1, psi2}, alpha)(Belief({p, 1.0 - p}))[0];
}

struct CurvePoint {
    double p;
    double alpha;
    double phi_p;
};

/// Grid p_k = k / (grid + 1), k = 1..grid, for each alpha.
inline std::vector<CurvePoint> emit_curve(double psi1, double psi2, const std::vector<double>& alphas,
                                          std::size_t grid) {
    require(grid >= 2, ErrorCode::InvalidArgument, "grid size must be >= 2");
    require(!alphas.empty(), ErrorCode::InvalidArgument, "need at least one alpha");
    (void)PowerWeighted({psi1, psi2}, 1.0);
    std::vector<CurvePoint> out;
    out.reserve(alphas.size() * grid);
    for (double a : alphas) {
        (void)PowerWeighted({psi1, psi2}, a);
        for (std::size_t k = 1; k <= grid; ++k) {
            const double p = static_cast<double>(k) / static_cast<double>(grid + 1);
            out.push_back({p, a, two_state_weight(psi1, psi2, a, p)});
        }
    }
    return out;
}

/// Decimal with 17 significant digits.
inline std::string format_g17(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, r.ptr};
}

inline void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& pts) {
    os << "p,alpha,phi_p\n";
    for (const auto& c : pts) os << format_g17(c.p) << ',' << format_g17(c.alpha) << ',' << format_g17(c.phi_p) << '\n';
}

struct CurveShape {
    /// Interior points where phi(p) = p, located by bisection.
    std::vector<double> crossings;
    bool below_then_above = false;  // S-shaped
    bool above_then_below = false;  // inverse S
    bool weakly_above = false;
    bool strictly_increasing = false;
};

/// Shape of one curve on the grid p_k = k / (grid + 1).
inline CurveShape classify_curve(double psi1, double psi2, double alpha, std::size_t grid, double tol = 1e-12) {
    require(grid >= 2, ErrorCode::InvalidArgument, "grid size must be >= 2");
    auto gap = [&](double p) { return two_state_weight(psi1, psi2, alpha, p) - p; };
    CurveShape s;
    std::vector<double> ps;
    std::vector<double> gs;
    for (std::size_t k = 1; k <= grid; ++k) {
        ps.push_back(static_cast<double>(k) / static_cast<double>(grid + 1));
        gs.push_back(gap(ps.back()));
    }
    s.weakly_above = std::all_of(gs.begin(), gs.end(), [&](double g) { return g >= -tol; });
    s.strictly_increasing = true;
    for (std::size_t k = 1; k < ps.size(); ++k) {
        if (!(gs[k] + ps[k] > gs[k - 1] + ps[k - 1])) s.strictly_increasing = false;
    }
    int first_sign = 0;
    int last_sign = 0;
    int prev = 0;
    double prev_p = 0.0;
    for (std::size_t k = 0; k < ps.size(); ++k) {
        const int sg = gs[k] > tol ? 1 : (gs[k] < -tol ? -1 : 0);
        if (sg == 0) {
            s.crossings.push_back(ps[k]);
            prev = 0;
            continue;
        }
        if (first_sign == 0) first_sign = sg;
        if (prev != 0 && sg != prev) {
            double lo = prev_p;
            double hi = ps[k];
            for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((gap(mid) > 0.0 ? 1 : -1) == prev) lo = mid;
                else hi = mid;
            }
            s.crossings.push_back(0.5 * (lo + hi));
        }
        prev = sg;
        prev_p = ps[k];
        last_sign = sg;
    }
    s.below_then_above = first_sign == -1 && last_sign == 1;
    s.above_then_below = first_sign == 1 && last_sign == -1;
    return s;
}

}  // namespace coherent
