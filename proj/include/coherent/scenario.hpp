#pragma once

// JSON scenario runner behind the `coherent` command-line tool.  A scenario
// names a kind and its parameters; the runner validates them, calls the
// library and produces a report with the scenario echo, results,
// provenance and timing.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coherent/coherent.hpp"

namespace coherent::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitPropertyFailure = 1;
inline constexpr int kExitInputError = 2;

inline const std::vector<std::string>& scenario_kinds() {
    static const std::vector<std::string> kinds{"distort",   "condition",  "identify",   "coherence-audit",
                                                "grether",   "gs",         "motivated",  "dynamics",
                                                "dutch-book", "dynamic-consistency", "weighted-utility", "curve"};
    return kinds;
}

/// Invalid or missing scenario input; `field` is the dotted path.
class InputError : public std::runtime_error {
public:
    InputError(std::string field, const std::string& what) : std::runtime_error(what), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

inline std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

/// Command-line values that take precedence over the scenario file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<double> tolerance;
};

struct Outcome {
    json results;
    int status = kExitOk;
    std::optional<std::uint64_t> seed;
    double tolerance = kDefaultTolerance;
    /// CSV body for curve scenarios.
    std::optional<std::string> csv;
};

namespace detail {

/// Read-only view of a JSON object that reports missing or mistyped fields
/// by their full path.
class Node {
public:
    Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    [[nodiscard]] const std::string& path() const noexcept { return path_; }
    [[nodiscard]] const json& raw() const noexcept { return *j_; }

    [[nodiscard]] bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

    [[nodiscard]] Node at(const std::string& key) const {
        const std::string p = join_path(path_, key);
        if (!j_->is_object()) throw InputError(path_, "field '" + path_ + "' must be an object");
        if (!j_->contains(key)) throw InputError(p, "missing required field '" + p + "'");
        return {(*j_)[key], p};
    }

    [[nodiscard]] double number() const {
        if (!j_->is_number()) throw InputError(path_, "field '" + path_ + "' must be a number");
        return j_->get<double>();
    }

    [[nodiscard]] double positive() const {
        const double v = number();
        if (!(v > 0.0) || !std::isfinite(v)) throw InputError(path_, "field '" + path_ + "' must be positive");
        return v;
    }

    [[nodiscard]] std::uint64_t u64() const {
        if (!j_->is_number_unsigned() && !(j_->is_number_integer() && j_->get<std::int64_t>() >= 0)) {
            throw InputError(path_, "field '" + path_ + "' must be a non-negative integer");
        }
        return j_->get<std::uint64_t>();
    }

    [[nodiscard]] bool boolean() const {
        if (!j_->is_boolean()) throw InputError(path_, "field '" + path_ + "' must be a boolean");
        return j_->get<bool>();
    }

    [[nodiscard]] std::string string() const {
        if (!j_->is_string()) throw InputError(path_, "field '" + path_ + "' must be a string");
        return j_->get<std::string>();
    }

    [[nodiscard]] std::vector<Node> array() const {
        if (!j_->is_array()) throw InputError(path_, "field '" + path_ + "' must be an array");
        std::vector<Node> out;
        for (std::size_t i = 0; i < j_->size(); ++i) out.emplace_back((*j_)[i], path_ + "[" + std::to_string(i) + "]");
        return out;
    }

    [[nodiscard]] std::vector<double> numbers() const {
        std::vector<double> out;
        for (const auto& n : array()) out.push_back(n.number());
        return out;
    }

    [[nodiscard]] std::vector<std::string> strings() const {
        std::vector<std::string> out;
        for (const auto& n : array()) out.push_back(n.string());
        return out;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw InputError(path_, "invalid field '" + path_ + "': " + why);
    }

private:
    const json* j_;
    std::string path_;
};

/// Runs `fn`, turning library validation errors into input errors on `node`.
template <class Fn>
auto guarded(const Node& node, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        node.fail(e.what());
    }
}

inline StateSpace parse_labels(const Node& n) {
    return guarded(n, [&] { return StateSpace(n.strings()); });
}

/// label -> value map covering every label exactly.
inline std::vector<double> parse_label_map(const Node& n, const StateSpace& space) {
    if (!n.raw().is_object()) throw InputError(n.path(), "field '" + n.path() + "' must be an object keyed by label");
    for (const auto& [key, _] : n.raw().items()) {
        if (std::find(space.labels().begin(), space.labels().end(), key) == space.labels().end()) {
            throw InputError(join_path(n.path(), key), "unknown label in field '" + join_path(n.path(), key) + "'");
        }
    }
    std::vector<double> out;
    for (const auto& l : space.labels()) out.push_back(n.at(l).number());
    return out;
}

inline Belief parse_belief(const Node& n, const StateSpace& space) {
    auto v = parse_label_map(n, space);
    return guarded(n, [&] { return Belief(std::move(v)); });
}

inline Event parse_event(const Node& n, const StateSpace& space) {
    std::vector<std::size_t> idx;
    for (const auto& e : n.array()) idx.push_back(guarded(e, [&] { return space.index_of(e.string()); }));
    return guarded(n, [&] { return Event(std::move(idx)); });
}

inline Matrix parse_matrix(const Node& n, std::size_t rows, std::size_t cols) {
    std::vector<std::vector<double>> out;
    const auto rs = n.array();
    if (rs.size() != rows) n.fail("expected " + std::to_string(rows) + " rows");
    for (const auto& r : rs) {
        out.push_back(r.numbers());
        if (out.back().size() != cols) r.fail("expected " + std::to_string(cols) + " columns");
    }
    return Matrix::from_rows(out);
}

inline Distortion parse_distortion(const Node& n, const StateSpace& space) {
    const std::string type = n.at("type").string();
    const std::size_t k = space.size();
    if (type == "identity") return Distortion::identity(k);
    if (type == "power_weighted") {
        const Node psi = n.at("psi");
        auto w = parse_label_map(psi, space);
        const double a = n.at("alpha").positive();
        return guarded(psi, [&] { return Distortion(PowerWeighted(std::move(w), a)); });
    }
    if (type == "additive_smoothing") return incoherent::additive_smoothing(k, n.at("epsilon").positive());
    if (type == "prelec") return incoherent::prelec(k, n.at("a").positive());
    if (type == "tversky_kahneman") return incoherent::tversky_kahneman(k, n.at("gamma").positive());
    if (type == "quadratic") return incoherent::quadratic(k, n.at("c").positive());
    if (type == "softmax") return incoherent::softmax(k, n.at("beta").positive());
    n.at("type").fail("unknown distortion type '" + type + "'");
}

inline PowerWeighted parse_power_weighted(const Node& n, const StateSpace& space) {
    const std::string type = n.at("type").string();
    if (type == "identity") return PowerWeighted::identity(space.size());
    if (type != "power_weighted") n.at("type").fail("must be 'power_weighted' or 'identity' here");
    const Node psi = n.at("psi");
    auto w = parse_label_map(psi, space);
    const double a = n.at("alpha").positive();
    return guarded(psi, [&] { return PowerWeighted(std::move(w), a); });
}

inline SignalMap parse_signal_map(const Node& n, const StateSpace& signals) {
    const std::string type = n.at("type").string();
    if (type == "identity") return identity_signal_map();
    if (type == "power") {
        const double e = n.at("exponent").positive();
        std::vector<double> scale(signals.size(), 1.0);
        if (n.has("scale")) scale = parse_label_map(n.at("scale"), signals);
        return guarded(n, [&] { return power_signal_map(std::move(scale), e); });
    }
    n.at("type").fail("unknown signal map type '" + type + "'");
}

inline WeightFunction parse_weight(const Node& n, const UtilityFn& u) {
    const std::string type = n.at("type").string();
    if (type == "constant") return WeightFunction::constant(n.has("value") ? n.at("value").positive() : 1.0);
    if (type == "piecewise_linear") {
        std::vector<std::pair<double, double>> knots;
        for (const auto& k : n.at("knots").array()) {
            const auto xy = k.numbers();
            if (xy.size() != 2) k.fail("knot must be [x, weight]");
            knots.emplace_back(xy[0], xy[1]);
        }
        return guarded(n.at("knots"), [&] { return WeightFunction::piecewise_linear(std::move(knots)); });
    }
    if (type == "exponential") return WeightFunction::exponential(n.at("kappa").number(), u);
    n.at("type").fail("unknown weight type '" + type + "'");
}

inline UtilityFn parse_utility(const Node& n) {
    const std::string type = n.at("type").string();
    if (type == "linear") return [](double x) { return x; };
    if (type == "power") {
        const double c = n.at("exponent").positive();
        return [c](double x) { return x <= 0.0 ? 0.0 : std::pow(x, c); };
    }
    n.at("type").fail("unknown utility type '" + type + "'");
}

// Serialization -------------------------------------------------------------

inline json to_json(const Belief& b, const StateSpace& space) {
    json j = json::object();
    for (std::size_t i = 0; i < b.size(); ++i) j[space.label(i)] = b[i];
    return j;
}

inline json to_json(const Event& e, const StateSpace& space) {
    json j = json::array();
    for (auto i : e) j.push_back(space.label(i));
    return j;
}

inline json to_json(const Matrix& m) {
    json j = json::array();
    for (const auto& r : m.to_rows()) j.push_back(r);
    return j;
}

template <class W, class F>
json report_json(const CheckReport<W>& r, F&& witness_json) {
    json j;
    j["passed"] = r.passed;
    j["max_deviation"] = r.max_deviation;
    j["tolerance"] = r.tolerance;
    j["trials"] = r.trials;
    j["first_violation"] = r.first_violation ? json(*r.first_violation) : json(nullptr);
    j["witness"] = r.witness ? witness_json(*r.witness) : json(nullptr);
    return j;
}

// Kind runners --------------------------------------------------------------

struct Context {
    Node root;
    Overrides over;
    Outcome out;

    [[nodiscard]] std::uint64_t seed() {
        if (over.seed) {
            out.seed = over.seed;
            return *over.seed;
        }
        out.seed = root.at("seed").u64();
        return *out.seed;
    }

    [[nodiscard]] std::size_t trials(std::size_t fallback) const {
        if (over.trials) return *over.trials;
        if (root.has("trials")) {
            const auto t = root.at("trials").u64();
            if (t < 1) root.at("trials").fail("must be >= 1");
            return t;
        }
        return fallback;
    }

    [[nodiscard]] double tolerance(double fallback) {
        double t = fallback;
        if (over.tolerance) t = *over.tolerance;
        else if (root.has("tolerance")) t = root.at("tolerance").positive();
        out.tolerance = t;
        return t;
    }

    void fail_if(bool failed) {
        if (failed) out.status = kExitPropertyFailure;
    }
};

inline StateSpace states_of(const Context& c) { return parse_labels(c.root.at("states")); }

inline void run_distort(Context& c) {
    const auto space = states_of(c);
    const auto d = parse_distortion(c.root.at("distortion"), space);
    const auto p = parse_belief(c.root.at("belief"), space);
    c.out.results["distorted"] = to_json(d(p), space);
}

inline void run_condition(Context& c) {
    const auto space = states_of(c);
    const auto p = parse_belief(c.root.at("belief"), space);
    const Node en = c.root.at("event");
    const auto e = parse_event(en, space);
    const double tol = c.tolerance(kDefaultTolerance);
    c.out.results["conditioned"] = to_json(guarded(en, [&] { return condition(p, e, tol); }), space);
}

inline void run_identify(Context& c) {
    const auto space = states_of(c);
    const Node dn = c.root.at("distortion");
    const auto d = parse_distortion(dn, space);
    c.out.results["psi"] = to_json(Belief(guarded(dn, [&] { return identify_psi(d); })), space);
    c.out.results["alpha"] = guarded(dn, [&] { return identify_alpha(d); });
}

inline void run_coherence_audit(Context& c) {
    const auto space = states_of(c);
    const auto d = parse_distortion(c.root.at("distortion"), space);
    const std::uint64_t seed = c.seed();
    const std::size_t trials = c.trials(1000);
    const double tol = c.tolerance(kDefaultTolerance);
    std::vector<std::string> checks{"coherence"};
    if (c.root.has("checks")) checks = c.root.at("checks").strings();
    json out = json::object();
    bool all = true;
    for (std::size_t k = 0; k < checks.size(); ++k) {
        const std::string& name = checks[k];
        json r;
        if (name == "coherence") {
            r = report_json(check_coherence(d, trials, seed, tol), [&](const CoherenceWitness& w) {
                return json{{"belief", to_json(w.belief, space)}, {"event", to_json(w.event, space)}};
            });
        } else if (name == "ratio_test_alpha1") {
            r = report_json(check_ratio_test_alpha1(d, trials, seed, tol), [&](const CrossRatioWitness& w) {
                return json{{"p", to_json(w.p, space)},
                            {"q", to_json(w.q, space)},
                            {"states", {space.label(w.i), space.label(w.j)}}};
            });
        } else if (name == "pi_marginality") {
            const Node pn = c.root.at("partition");
            std::vector<Event> blocks;
            for (const auto& b : pn.array()) blocks.push_back(parse_event(b, space));
            const Partition pi = guarded(pn, [&] { return Partition(space.size(), std::move(blocks)); });
            r = report_json(check_pi_marginality(d, pi, trials, seed, tol), [&](const MarginalityWitness& w) {
                return json{{"p", to_json(w.p, space)},
                            {"p_prime", to_json(w.p_prime, space)},
                            {"block", to_json(pi.blocks()[w.block], space)}};
            });
        } else if (name == "dynamic_consistency") {
            r = report_json(check_dynamic_consistency(d, trials, seed), [&](const ConsistencyWitness& w) {
                return json{{"belief", to_json(w.p, space)}, {"event", to_json(w.event, space)},
                            {"f", w.f}, {"g", w.g}, {"h", w.h}, {"ex_ante", w.ex_ante}, {"ex_post", w.ex_post}};
            });
        } else {
            Node(c.root.at("checks").raw()[k], "checks[" + std::to_string(k) + "]")
                .fail("unknown check '" + name + "'");
        }
        all = all && r["passed"].get<bool>();
        out[name] = std::move(r);
    }
    c.out.results["checks"] = std::move(out);
    c.out.results["passed"] = all;
    c.fail_if(!all);
}

inline void run_grether(Context& c) {
    const auto space = states_of(c);
    const auto signals = parse_labels(c.root.at("signals"));
    const Node en = c.root.at("experiment");
    const BlackwellExperiment sigma =
        guarded(en, [&] { return BlackwellExperiment(parse_matrix(en, space.size(), signals.size())); });
    const auto f = parse_distortion(c.root.at("distortion"), space);
    const Node gn = c.root.at("signal_map");
    std::vector<SignalMap> g;
    if (gn.has("type")) {
        g.assign(space.size(), parse_signal_map(gn, signals));
    } else {
        for (const auto& l : space.labels()) g.push_back(parse_signal_map(gn.at(l), signals));
    }
    const GretherSpec spec(f, std::move(g));
    const auto p = parse_belief(c.root.at("belief"), space);
    const Node tn = c.root.at("signal");
    const std::size_t theta = guarded(tn, [&] { return signals.index_of(tn.string()); });
    c.out.results["bayes_posterior"] = to_json(guarded(tn, [&] { return bayes_posterior(p, sigma, theta); }), space);
    c.out.results["grether_posterior"] =
        to_json(guarded(tn, [&] { return grether_update(spec, p, sigma, theta); }), space);
    if (c.root.has("audit") && c.root.at("audit").boolean()) {
        const std::uint64_t seed = c.seed();
        const std::size_t trials = c.trials(1000);
        const double tol = c.tolerance(kDefaultTolerance);
        const Node audit = c.root.at("audit");
        auto witness = [&](const GretherWitness& w) {
            return json{{"prior", to_json(w.prior, space)},
                        {"experiment", to_json(w.likelihoods)},
                        {"signal", signals.label(w.signal)}};
        };
        const auto coh = guarded(audit, [&] { return check_gretherian_coherence(spec, signals.size(), trials, seed, tol); });
        const auto norm =
            guarded(audit, [&] { return normalized_grether_check(spec, signals.size(), trials, seed, tol); });
        c.out.results["gretherian_coherence"] = report_json(coh, witness);
        c.out.results["normalized"] = json{{"passed", norm.passed},
                                           {"sums_to_one", norm.sums_to_one},
                                           {"identity_maps", norm.identity_maps},
                                           {"prior_alpha", std::isfinite(norm.prior_alpha) ? json(norm.prior_alpha)
                                                                                           : json(nullptr)},
                                           {"max_sum_gap", norm.max_sum_gap}};
        c.fail_if(!coh.passed);
    }
}

inline void run_gs(Context& c) {
    const auto space = states_of(c);
    const auto signals = parse_labels(c.root.at("signals"));
    const std::size_t n = space.size();
    const std::size_t m = signals.size();
    const Node jn = c.root.at("joint");
    const JointDistribution p = guarded(jn, [&] { return JointDistribution(parse_matrix(jn, n, m)); });
    const Node dn = c.root.at("distortion");
    const std::string type = dn.at("type").string();
    std::optional<JointDistortion> d;
    if (type == "identity") {
        d = JointDistortion::identity(n, m);
    } else if (type == "weighted_gs" || type == "joint_power") {
        const Node psi = dn.at("psi");
        auto w = parse_label_map(psi, space);
        const double a = type == "joint_power" ? dn.at("alpha").positive() : 1.0;
        d = guarded(psi, [&] { return joint_power(std::move(w), a, m); });
    } else {
        dn.at("type").fail("unknown joint distortion type '" + type + "'");
    }
    const JointDistribution dp = (*d)(p);
    c.out.results["distorted"] = to_json(dp.cells());
    c.out.results["state_marginal"] = to_json(state_marginal(dp), space);
    if (c.root.has("signal_event")) {
        const Node sn = c.root.at("signal_event");
        const auto s = parse_event(sn, signals);
        c.out.results["conditioned"] = to_json(guarded(sn, [&] { return condition_on_signal_event(p, s); }).cells());
        c.out.results["distorted_conditioned"] =
            to_json(guarded(sn, [&] { return condition_on_signal_event(dp, s); }).cells());
    }
    if (c.root.has("audit") && c.root.at("audit").boolean()) {
        const std::uint64_t seed = c.seed();
        const std::size_t trials = c.trials(200);
        const double tol = c.tolerance(kDefaultTolerance);
        auto coh_witness = [&](const JointCoherenceWitness& w) {
            return json{{"joint", to_json(w.joint.cells())}, {"signal_event", to_json(w.signal_event, signals)}};
        };
        const auto weak = check_weak_signal_coherence(*d, trials, seed, tol);
        const auto strong = guarded(c.root.at("signals"), [&] { return check_strong_signal_coherence(*d, trials, seed, tol); });
        const auto marg = check_marginality(*d, trials, seed, tol);
        c.out.results["weak_signal_coherence"] = report_json(weak, coh_witness);
        c.out.results["strong_signal_coherence"] = report_json(strong, coh_witness);
        c.out.results["marginality"] = report_json(marg, [&](const JointMarginalityWitness& w) {
            return json{{"p", to_json(w.p.cells())}, {"p_prime", to_json(w.p_prime.cells())}};
        });
        c.fail_if(!(weak.passed && strong.passed && marg.passed));
    }
}

inline void run_motivated(Context& c) {
    const auto space = states_of(c);
    const auto u = parse_label_map(c.root.at("utilities"), space);
    const double k = c.root.at("K").positive();
    const double lambda = c.root.at("Lambda").positive();
    const Node bn = c.root.at("belief");
    const auto p = parse_belief(bn, space);
    const MotivatedProblem mp = guarded(bn, [&] { return MotivatedProblem(u, k, lambda, p); });
    const double tol = c.tolerance(1e-11);
    const Belief closed = solve_motivated_closed_form(mp);
    const auto num = solve_motivated_numerical_detailed(mp, 10000, tol);
    c.out.results["closed_form"] = to_json(closed, space);
    c.out.results["numerical"] = to_json(num.q, space);
    c.out.results["iterations"] = num.iterations;
    c.out.results["residual"] = num.residual;
    c.out.results["max_gap"] = belief_distance(closed, num.q);
    c.out.results["objective_closed_form"] = motivated_objective(mp, closed);
    c.out.results["objective_numerical"] = motivated_objective(mp, num.q);
    c.out.results["objective_prior"] = motivated_objective(mp, p);
}

inline void run_dynamics(Context& c) {
    const auto space = states_of(c);
    const auto d = parse_power_weighted(c.root.at("distortion"), space);
    const auto p = parse_belief(c.root.at("belief"), space);
    const std::size_t steps = c.root.has("iterations") ? c.root.at("iterations").u64() : 1;
    const double tol = c.tolerance(1e-6);
    const std::size_t max_n = c.root.has("max_iterations") ? c.root.at("max_iterations").u64() : 200;
    c.out.results["iterate"] = to_json(iterate(d, p, steps), space);
    const auto lim = limit_belief(d, p);
    json lj;
    lj["kind"] = std::string(to_string(lim.kind));
    lj["belief"] = to_json(lim.limit, space);
    lj["support"] = to_json(lim.support, space);
    json levels = json::array();
    for (const auto& l : lim.level_sets) levels.push_back(to_json(l, space));
    lj["level_sets"] = std::move(levels);
    try {
        lj["steps_to_tolerance"] = verify_limit_numerically(d, p, tol, max_n);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoConvergence) throw;
        lj["steps_to_tolerance"] = nullptr;
        c.out.status = kExitPropertyFailure;
    }
    c.out.results["limit"] = std::move(lj);
    c.out.results["idempotent"] = check_idempotence(d).passed;
    if (c.root.has("fixed_points") && c.root.at("fixed_points").boolean()) {
        const auto fp = guarded(c.root.at("states"), [&] { return enumerate_fixed_points(d); });
        json pts = json::array();
        for (const auto& b : fp.points) pts.push_back(to_json(b, space));
        c.out.results["fixed_points"] = std::move(pts);
    }
}

inline void run_dutch_book(Context& c) {
    const auto space = states_of(c);
    const auto d = parse_distortion(c.root.at("distortion"), space);
    const auto p = parse_belief(c.root.at("belief"), space);
    const Node en = c.root.at("event");
    const auto e = parse_event(en, space);
    const double stake = c.root.at("stake").positive();
    const double tol = c.tolerance(kDefaultTolerance);
    const auto book = guarded(en, [&] { return construct_dutch_book(d, p, e, stake, tol); });
    if (!book) {
        c.out.results["book"] = nullptr;
        return;
    }
    c.out.results["book"] = json{{"event", to_json(book->event, space)},
                                 {"win_state", space.label(book->win_state)},
                                 {"lose_state", space.label(book->lose_state)},
                                 {"stake", book->stake},
                                 {"loss_rate", book->loss_rate},
                                 {"alpha_bet", book->alpha_bet},
                                 {"value_condition_first", book->value_condition_first},
                                 {"value_distort_first", book->value_distort_first}};
    c.fail_if(true);
}

inline void run_dynamic_consistency(Context& c) {
    const auto space = states_of(c);
    const auto d = parse_distortion(c.root.at("distortion"), space);
    const std::uint64_t seed = c.seed();
    const std::size_t trials = c.trials(1000);
    const double band = c.tolerance(kPreferenceTieBand);
    const auto r = check_dynamic_consistency(d, trials, seed, band);
    c.out.results["dynamic_consistency"] = report_json(r, [&](const ConsistencyWitness& w) {
        return json{{"belief", to_json(w.p, space)}, {"event", to_json(w.event, space)},
                    {"f", w.f}, {"g", w.g}, {"h", w.h}, {"ex_ante", w.ex_ante}, {"ex_post", w.ex_post}};
    });
    c.fail_if(!r.passed);
}

inline void run_weighted_utility(Context& c) {
    const auto outcomes = c.root.at("outcomes").numbers();
    const Node pn = c.root.at("probs");
    const auto probs = pn.numbers();
    const Lottery l = guarded(pn, [&] { return Lottery(outcomes, probs); });
    const UtilityFn u = parse_utility(c.root.at("utility"));
    const Node wn = c.root.at("weight");
    const WeightFunction psi = parse_weight(wn, u);
    c.out.results["weighted_utility"] = guarded(wn, [&] { return weighted_utility(l, psi, u); });
    c.out.results["expected_utility"] = weighted_utility(l, WeightFunction::constant(), u);
    const Belief dq = guarded(wn, [&] { return lottery_distortion(l, psi)(l.belief()); });
    c.out.results["distorted_probs"] = dq.vec();
    if (c.root.has("allais") && c.root.at("allais").boolean()) {
        const auto cfg = find_allais_config(default_allais_grid());
        if (cfg) {
            c.out.results["allais"] = json{{"slope", cfg->slope},
                                           {"curvature", cfg->curvature},
                                           {"values", {cfg->values[0], cfg->values[1], cfg->values[2], cfg->values[3]}}};
        } else {
            c.out.results["allais"] = nullptr;
        }
    }
}

inline void run_curve(Context& c) {
    const Node psin = c.root.at("psi");
    const auto psi = psin.numbers();
    if (psi.size() != 2) psin.fail("curves need exactly two state weights");
    const auto alphas = c.root.at("alphas").numbers();
    const Node gn = c.root.at("grid");
    const std::size_t grid = gn.u64();
    const auto pts = guarded(gn, [&] { return emit_curve(psi[0], psi[1], alphas, grid); });
    std::ostringstream csv;
    write_curve_csv(csv, pts);
    c.out.csv = csv.str();
    json shapes = json::array();
    for (double a : alphas) {
        const auto s = classify_curve(psi[0], psi[1], a, grid);
        shapes.push_back(json{{"alpha", a},
                              {"crossings", s.crossings},
                              {"s_shaped", s.below_then_above},
                              {"inverse_s_shaped", s.above_then_below},
                              {"weakly_above_diagonal", s.weakly_above},
                              {"strictly_increasing", s.strictly_increasing}});
    }
    c.out.results["curves"] = std::move(shapes);
}

}  // namespace detail

/// Validates and executes a parsed scenario.  Throws InputError on invalid
/// input; property failures are reported through Outcome::status.
inline Outcome execute(const json& scenario, const Overrides& over = {}) {
    detail::Context c{detail::Node(scenario, ""), over, {}};
    if (!scenario.is_object()) throw InputError("", "scenario must be a JSON object");
    const std::string kind = c.root.at("kind").string();
    c.out.results = json::object();
    try {
        if (kind == "distort") detail::run_distort(c);
        else if (kind == "condition") detail::run_condition(c);
        else if (kind == "identify") detail::run_identify(c);
        else if (kind == "coherence-audit") detail::run_coherence_audit(c);
        else if (kind == "grether") detail::run_grether(c);
        else if (kind == "gs") detail::run_gs(c);
        else if (kind == "motivated") detail::run_motivated(c);
        else if (kind == "dynamics") detail::run_dynamics(c);
        else if (kind == "dutch-book") detail::run_dutch_book(c);
        else if (kind == "dynamic-consistency") detail::run_dynamic_consistency(c);
        else if (kind == "weighted-utility") detail::run_weighted_utility(c);
        else if (kind == "curve") detail::run_curve(c);
        else c.root.at("kind").fail("unknown kind '" + kind + "'");
    } catch (const Error& e) {
        // Library errors not tied to a single field (e.g. a zero-probability
        // event discovered mid-computation) are still input errors.
        throw InputError(kind, std::string("invalid scenario: ") + e.what());
    }
    return c.out;
}

struct RunOptions {
    std::string scenario_path;
    std::optional<std::string> out_path;
    Overrides overrides;
    bool quiet = false;
    /// Set by per-kind subcommands; the scenario's kind must match or be absent.
    std::optional<std::string> kind;
};

inline json build_report(const json& scenario, const Outcome& o, double elapsed_ms) {
    json report;
    report["scenario"] = scenario;
    report["results"] = o.results;
    report["provenance"] = json{{"seed", o.seed ? json(*o.seed) : json(nullptr)},
                                {"tolerance", o.tolerance},
                                {"version", kVersion}};
    report["timing"] = json{{"elapsed_ms", elapsed_ms}};
    return report;
}

/// Whole command: read, execute, write.  Returns the process exit code.
inline int run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
    json scenario;
    try {
        std::ifstream in(opts.scenario_path);
        if (!in) throw InputError("scenario", "cannot open scenario file '" + opts.scenario_path + "'");
        try {
            scenario = json::parse(in);
        } catch (const json::parse_error& e) {
            throw InputError("scenario", std::string("scenario is not valid JSON: ") + e.what());
        }
        if (opts.kind) {
            if (!scenario.is_object()) throw InputError("", "scenario must be a JSON object");
            if (!scenario.contains("kind")) scenario["kind"] = *opts.kind;
            else if (scenario["kind"] != *opts.kind) {
                throw InputError("kind", "field 'kind' does not match subcommand '" + *opts.kind + "'");
            }
        }
        const auto t0 = std::chrono::steady_clock::now();
        const Outcome o = execute(scenario, opts.overrides);
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        const json report = build_report(scenario, o, ms);

        auto write_to = [&](const std::string& body) {
            if (opts.out_path) {
                std::ofstream f(*opts.out_path, std::ios::binary);
                if (!f) throw InputError("out", "cannot write '" + *opts.out_path + "'");
                f << body;
            } else {
                out << body;
            }
        };
        if (o.csv) {
            write_to(*o.csv);
            if (!opts.quiet && opts.out_path) out << report.dump(2) << '\n';
        } else {
            write_to(report.dump(2) + "\n");
            if (!opts.quiet && opts.out_path) {
                out << scenario["kind"].get<std::string>() << ": "
                    << (o.status == kExitOk ? "ok" : "property failure (see report)") << '\n';
            }
        }
        if (o.status != kExitOk && !opts.quiet) err << "property check failed; witness recorded in report\n";
        return o.status;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    }
}

}  // namespace coherent::cli
