#pragma once

// Finite probability simplices: state spaces, beliefs, events, partitions,
// conditioning.  Every other header builds on these value types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "coherent/error.hpp"

namespace coherent {

/// Beliefs are renormalized whenever their sum drifts from 1 by more than this.
inline constexpr double kSumDrift = 1e-12;
/// Largest drift accepted from caller-supplied probability vectors.
inline constexpr double kInputSumTolerance = 1e-9;
/// Default absolute tolerance for comparing probability entries.
inline constexpr double kDefaultTolerance = 1e-9;

class StateSpace {
public:
    explicit StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
        require(!labels_.empty(), ErrorCode::InvalidArgument, "state space needs at least one state");
        std::unordered_set<std::string> seen;
        for (const auto& l : labels_) {
            require(seen.insert(l).second, ErrorCode::InvalidArgument, "duplicate state label '" + l + "'");
        }
    }

    /// States labelled w1..wn.
    static StateSpace indexed(std::size_t n, const std::string& prefix = "w") {
        std::vector<std::string> labels;
        labels.reserve(n);
        for (std::size_t i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i + 1));
        return StateSpace(std::move(labels));
    }

    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
    [[nodiscard]] const std::string& label(std::size_t i) const { return labels_.at(i); }

    [[nodiscard]] std::size_t index_of(const std::string& label) const {
        auto it = std::find(labels_.begin(), labels_.end(), label);
        require(it != labels_.end(), ErrorCode::InvalidArgument, "unknown label '" + label + "'");
        return static_cast<std::size_t>(it - labels_.begin());
    }

    friend bool operator==(const StateSpace&, const StateSpace&) = default;

private:
    std::vector<std::string> labels_;
};

/// Non-empty set of state indices, kept sorted and unique.
class Event {
public:
    explicit Event(std::vector<std::size_t> members) : members_(std::move(members)) {
        std::sort(members_.begin(), members_.end());
        members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
        require(!members_.empty(), ErrorCode::InvalidArgument, "event must be non-empty");
    }
    Event(std::initializer_list<std::size_t> members) : Event(std::vector<std::size_t>(members)) {}

    static Event all(std::size_t n) {
        std::vector<std::size_t> m(n);
        std::iota(m.begin(), m.end(), std::size_t{0});
        return Event(std::move(m));
    }

    /// Bit i of `mask` selects index i.
    static Event from_mask(std::uint64_t mask) {
        std::vector<std::size_t> m;
        for (std::size_t i = 0; i < 64; ++i) {
            if (mask & (std::uint64_t{1} << i)) m.push_back(i);
        }
        return Event(std::move(m));
    }

    [[nodiscard]] const std::vector<std::size_t>& members() const noexcept { return members_; }
    [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
    [[nodiscard]] bool contains(std::size_t i) const {
        return std::binary_search(members_.begin(), members_.end(), i);
    }
    [[nodiscard]] bool is_subset_of(const Event& other) const {
        return std::includes(other.members_.begin(), other.members_.end(), members_.begin(), members_.end());
    }
    [[nodiscard]] std::size_t max_index() const noexcept { return members_.back(); }

    void check_within(std::size_t n) const {
        require(max_index() < n, ErrorCode::InvalidArgument,
                "event index " + std::to_string(max_index()) + " outside space of size " + std::to_string(n));
    }

    [[nodiscard]] auto begin() const noexcept { return members_.begin(); }
    [[nodiscard]] auto end() const noexcept { return members_.end(); }

    friend bool operator==(const Event&, const Event&) = default;

private:
    std::vector<std::size_t> members_;
};

/// Probability vector over a finite state space.
class Belief {
public:
    /// Entries must be finite and non-negative and sum to 1 within kInputSumTolerance.
    explicit Belief(std::vector<double> probs) : probs_(std::move(probs)) {
        require(!probs_.empty(), ErrorCode::InvalidArgument, "belief over empty state space");
        double sum = 0.0;
        for (double v : probs_) {
            require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
                    "belief entries must be finite and non-negative");
            sum += v;
        }
        require(std::abs(sum - 1.0) <= kInputSumTolerance, ErrorCode::InvalidArgument,
                "belief entries sum to " + std::to_string(sum) + ", not 1");
        if (std::abs(sum - 1.0) > kSumDrift) {
            for (double& v : probs_) v /= sum;
        }
    }

    /// Normalizes non-negative weights with positive total.
    static Belief normalized(std::vector<double> weights) {
        double sum = 0.0;
        for (double v : weights) {
            require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
                    "weights must be finite and non-negative");
            sum += v;
        }
        require(sum > 0.0 && std::isfinite(sum), ErrorCode::InvalidArgument, "weights have no positive mass");
        for (double& v : weights) v /= sum;
        return Belief(std::move(weights));
    }

    static Belief uniform(std::size_t n) { return Belief(std::vector<double>(n, 1.0 / static_cast<double>(n))); }

    static Belief uniform_on(std::size_t n, const Event& e) {
        e.check_within(n);
        std::vector<double> w(n, 0.0);
        for (auto i : e) w[i] = 1.0;
        return normalized(std::move(w));
    }

    static Belief point_mass(std::size_t n, std::size_t i) {
        require(i < n, ErrorCode::InvalidArgument, "point mass index out of range");
        std::vector<double> v(n, 0.0);
        v[i] = 1.0;
        return Belief(std::move(v));
    }

    [[nodiscard]] std::size_t size() const noexcept { return probs_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return probs_[i]; }
    [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
    [[nodiscard]] const std::vector<double>& vec() const noexcept { return probs_; }
    [[nodiscard]] auto begin() const noexcept { return probs_.begin(); }
    [[nodiscard]] auto end() const noexcept { return probs_.end(); }

    [[nodiscard]] Event support() const {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            if (probs_[i] > 0.0) s.push_back(i);
        }
        return Event(std::move(s));
    }

    [[nodiscard]] bool full_support() const {
        return std::all_of(probs_.begin(), probs_.end(), [](double v) { return v > 0.0; });
    }

    friend bool operator==(const Belief&, const Belief&) = default;

private:
    std::vector<double> probs_;
};

/// Row-major dense matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rs) {
        require(!rs.empty() && !rs.front().empty(), ErrorCode::InvalidArgument, "matrix must be non-empty");
        Matrix m(rs.size(), rs.front().size());
        for (std::size_t i = 0; i < rs.size(); ++i) {
            require(rs[i].size() == m.cols, ErrorCode::InvalidArgument, "ragged matrix rows");
            std::copy(rs[i].begin(), rs[i].end(), m.data.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
        }
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    [[nodiscard]] std::vector<double> row(std::size_t r) const {
        return {data.begin() + static_cast<std::ptrdiff_t>(r * cols),
                data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)};
    }
    [[nodiscard]] std::vector<double> col(std::size_t c) const {
        std::vector<double> out(rows);
        for (std::size_t r = 0; r < rows; ++r) out[r] = (*this)(r, c);
        return out;
    }
    [[nodiscard]] double sum() const { return std::accumulate(data.begin(), data.end(), 0.0); }

    [[nodiscard]] std::vector<std::vector<double>> to_rows() const {
        std::vector<std::vector<double>> out;
        for (std::size_t r = 0; r < rows; ++r) out.push_back(row(r));
        return out;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

inline double event_prob(const Belief& p, const Event& e) {
    e.check_within(p.size());
    double s = 0.0;
    for (auto i : e) s += p[i];
    return s;
}

/// p(.|E).  Throws ZeroProbabilityEvent when p(E) <= tol.
inline Belief condition(const Belief& p, const Event& e, double tol = kDefaultTolerance) {
    const double pe = event_prob(p, e);
    require(pe > tol, ErrorCode::ZeroProbabilityEvent,
            "conditioning event has probability " + std::to_string(pe));
    std::vector<double> out(p.size(), 0.0);
    for (auto i : e) out[i] = p[i] / pe;
    return Belief::normalized(std::move(out));
}

/// Max-norm distance.
inline double belief_distance(std::span<const double> p, std::span<const double> q) {
    require(p.size() == q.size(), ErrorCode::InvalidArgument, "beliefs live on different state spaces");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) d = std::max(d, std::abs(p[i] - q[i]));
    return d;
}

inline double belief_distance(const Belief& p, const Belief& q) { return belief_distance(p.probs(), q.probs()); }

/// Normalizes exp(log_weights); -inf entries are zero mass.
inline Belief from_log_weights(const std::vector<double>& log_weights) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : log_weights) mx = std::max(mx, v);
    require(std::isfinite(mx), ErrorCode::InvalidArgument, "log weights have no finite entry");
    std::vector<double> w(log_weights.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::isinf(log_weights[i]) ? 0.0 : std::exp(log_weights[i] - mx);
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return Belief(std::move(w));
}

class Partition {
public:
    Partition(std::size_t n, std::vector<Event> blocks) : n_(n), blocks_(std::move(blocks)) {
        std::vector<int> hit(n, 0);
        for (const auto& b : blocks_) {
            b.check_within(n);
            for (auto i : b) ++hit[i];
        }
        require(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }), ErrorCode::InvalidArgument,
                "partition blocks must be disjoint and cover the state space");
    }

    [[nodiscard]] std::size_t space_size() const noexcept { return n_; }
    [[nodiscard]] const std::vector<Event>& blocks() const noexcept { return blocks_; }

    /// Some block E has 1 < |E| < n.
    [[nodiscard]] bool is_nontrivial() const {
        return std::any_of(blocks_.begin(), blocks_.end(),
                           [&](const Event& b) { return b.size() > 1 && b.size() < n_; });
    }

    /// Every function in `values` is constant on each block (within tol).
    [[nodiscard]] bool measurable(std::span<const double> values, double tol) const {
        for (const auto& b : blocks_) {
            const double first = values[b.members().front()];
            for (auto i : b) {
                if (std::abs(values[i] - first) > tol) return false;
            }
        }
        return true;
    }

private:
    std::size_t n_;
    std::vector<Event> blocks_;
};

}  // namespace coherent
