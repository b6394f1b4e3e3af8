#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>

namespace coherent {

/// Outcome of a sampled property check.  `witness` holds the input that
/// attained `max_deviation` and is present iff max_deviation > tolerance.
template <class Witness>
struct CheckReport {
    bool passed = true;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    std::size_t trials = 0;
    std::optional<Witness> witness;
    /// Index of the first trial whose deviation exceeded the tolerance.
    std::optional<std::size_t> first_violation;

    explicit CheckReport(double tol = 0.0) : tolerance(tol) {}

    template <class MakeWitness>
    void observe(double deviation, std::size_t trial, MakeWitness&& make) {
        if (std::isnan(deviation)) deviation = std::numeric_limits<double>::infinity();
        ++trials;
        if (deviation > tolerance && !first_violation) first_violation = trial;
        if (deviation > max_deviation) {
            max_deviation = deviation;
            if (deviation > tolerance) witness = make();
        }
        passed = max_deviation <= tolerance;
    }

    explicit operator bool() const noexcept { return passed; }
};

}  // namespace coherent
