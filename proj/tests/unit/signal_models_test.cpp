#include "test_support.hpp"

using namespace coherent;
using coherent::testing::error_code_of;
using coherent::testing::near;

namespace {

BlackwellExperiment two_by_two() { return BlackwellExperiment::from_rows({{0.8, 0.2}, {0.4, 0.6}}); }

}  // namespace

TEST(BlackwellExperiment, ValidatesRows) {
    EXPECT_EQ(error_code_of([] { BlackwellExperiment::from_rows({{0.5, 0.6}}); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(error_code_of([] { BlackwellExperiment::from_rows({{1.5, -0.5}}); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(error_code_of([] { BlackwellExperiment::from_rows({{0.5, 0.5}, {1.0}}); }), ErrorCode::InvalidArgument);
}

TEST(BayesPosterior, Examples) {
    EXPECT_TRUE(near(bayes_posterior(Belief({0.5, 0.5}), two_by_two(), 0), {2.0 / 3, 1.0 / 3}, 1e-15));
    const auto flat = BlackwellExperiment::from_rows({{0.3, 0.7}, {0.3, 0.7}, {0.3, 0.7}});
    const Belief p({0.2, 0.5, 0.3});
    EXPECT_TRUE(near(bayes_posterior(p, flat, 1), p.vec(), 1e-15));
    EXPECT_TRUE(near(bayes_posterior(Belief({1.0, 0.0}), two_by_two(), 1), {1.0, 0.0}, 0.0));
}

TEST(BayesPosterior, ZeroProbabilitySignalRaises) {
    const auto sigma = BlackwellExperiment::from_rows({{1.0, 0.0}, {0.5, 0.5}});
    EXPECT_EQ(error_code_of([&] { (void)bayes_posterior(Belief({1.0, 0.0}), sigma, 1); }),
              ErrorCode::ZeroProbabilitySignal);
}

TEST(BlackwellSignalCoherence, Examples) {
    const BlackwellDistortion pw{PowerWeighted({1, 2, 3}, 0.4), PowerWeighted({5, 1, 1}, 2.5),
                                 PowerWeighted({1, 1, 1}, 1.0)};
    EXPECT_TRUE(check_blackwell_signal_coherence(pw, 300, 1).passed);

    const BlackwellDistortion smooth{Distortion::identity(3), incoherent::additive_smoothing(3, 0.1),
                                     Distortion::identity(3)};
    const auto r = check_blackwell_signal_coherence(smooth, 300, 1);
    EXPECT_FALSE(r.passed);
    ASSERT_TRUE(r.witness);
    EXPECT_EQ(r.witness->state, 1u);

    const BlackwellDistortion id(4, Distortion::identity(3));
    const auto ri = check_blackwell_signal_coherence(id, 300, 1);
    EXPECT_TRUE(ri.passed);
    EXPECT_EQ(ri.max_deviation, 0.0);
}

TEST(GretherUpdate, IdentityIsBayes) {
    const GretherSpec spec(Distortion::identity(2), identity_signal_map());
    const Belief p({0.5, 0.5});
    EXPECT_TRUE(near(grether_update(spec, p, two_by_two(), 0), bayes_posterior(p, two_by_two(), 0).vec(), 1e-15));
}

TEST(GretherUpdate, WeightedPriorExample) {
    const GretherSpec spec(PowerWeighted({2, 1}, 1.0), identity_signal_map());
    EXPECT_TRUE(near(grether_update(spec, Belief({0.5, 0.5}), two_by_two(), 0), {0.8, 0.2}, 1e-15));
}

TEST(GretherUpdate, ClassicParametrization) {
    // f(p) ~ p^a and g(s)(theta) = s(theta)^b: posterior ~ p^a sigma^b.
    const double a = 0.6;
    const double b = 1.7;
    const GretherSpec spec(PowerWeighted({1, 1, 1}, a), power_signal_map({1, 1}, b));
    const auto sigma = BlackwellExperiment::from_rows({{0.9, 0.1}, {0.5, 0.5}, {0.2, 0.8}});
    const Belief p({0.2, 0.3, 0.5});
    std::vector<double> w;
    for (std::size_t i = 0; i < 3; ++i) w.push_back(std::pow(p[i], a) * std::pow(sigma(i, 0), b));
    EXPECT_TRUE(near(grether_update(spec, p, sigma, 0), Belief::normalized(w).vec(), 1e-14));
}

TEST(GretherUpdate, VanishingDistortedSignalRaises) {
    const SignalMap kill = [](const Belief& s) { return std::vector<double>(s.size(), 0.0); };
    const GretherSpec spec(Distortion::identity(2), kill);
    EXPECT_EQ(error_code_of([&] { (void)grether_update(spec, Belief({0.5, 0.5}), two_by_two(), 0); }),
              ErrorCode::ZeroProbabilitySignal);
}

TEST(GretherianCoherence, Examples) {
    const std::vector<double> gamma{1.0, 3.0, 0.5};
    const GretherSpec good(PowerWeighted({2, 1, 4}, 1.8), power_signal_map(gamma, 1.8));
    const auto r = check_gretherian_coherence(good, 3, 500, 2);
    EXPECT_TRUE(r.passed);
    EXPECT_LT(r.max_deviation, 1e-10);

    const GretherSpec mismatch(PowerWeighted({2, 1, 4}, 1.0), power_signal_map({1, 1, 1}, 2.0));
    const auto rm = check_gretherian_coherence(mismatch, 3, 500, 2);
    EXPECT_FALSE(rm.passed);
    EXPECT_TRUE(rm.witness);

    std::vector<SignalMap> per_state{power_signal_map({1, 1, 1}, 1.0), power_signal_map({2, 1, 1}, 1.0),
                                     power_signal_map({1, 1, 1}, 1.0)};
    const GretherSpec dependent(PowerWeighted({1, 1, 1}, 1.0), per_state);
    EXPECT_FALSE(check_gretherian_coherence(dependent, 3, 500, 2).passed);
}

TEST(GretherianCoherence, SmallSpacesAreConfigurationErrors) {
    const GretherSpec two(Distortion::identity(2), identity_signal_map());
    EXPECT_EQ(error_code_of([&] { (void)check_gretherian_coherence(two, 2, 10, 0); }), ErrorCode::Configuration);
    const GretherSpec three(Distortion::identity(3), identity_signal_map());
    EXPECT_EQ(error_code_of([&] { (void)check_gretherian_coherence(three, 1, 10, 0); }), ErrorCode::Configuration);
}

TEST(NormalizedGrether, Examples) {
    EXPECT_TRUE(normalized_grether_check(GretherSpec(PowerWeighted({3, 1, 2}, 1.0), identity_signal_map()), 2).passed);

    const auto sq = normalized_grether_check(GretherSpec(PowerWeighted({1, 1, 1}, 2.0), power_signal_map({1, 1}, 2.0)), 2);
    EXPECT_FALSE(sq.passed);
    EXPECT_FALSE(sq.sums_to_one);
    EXPECT_TRUE(sq.coherent);
    ASSERT_TRUE(sq.sum_witness);
    EXPECT_NEAR(sq.max_sum_gap, 0.5, 1e-15);

    EXPECT_TRUE(normalized_grether_check(GretherSpec(Distortion::identity(3), identity_signal_map()), 3).passed);
}

TEST(NormalizedGrether, MidpointProbeDetectsEveryNonUnitExponent) {
    for (double a : {0.2, 0.5, 0.9, 0.99, 1.01, 1.5, 3.0}) {
        const SignalMap g = power_signal_map({1, 1}, a);
        const auto v = g(Belief({0.5, 0.5}));
        EXPECT_NEAR(v[0] + v[1], 2.0 * std::pow(0.5, a), 1e-15);
        const auto r = normalized_grether_check(GretherSpec(PowerWeighted({1, 2, 1}, a), g), 2);
        EXPECT_FALSE(r.sums_to_one) << a;
        EXPECT_FALSE(r.passed) << a;
    }
}

// Properties ----------------------------------------------------------------

TEST(SignalModelsProperty, GretherianCoherenceIffMatchedExponentAndCommonScale) {
    const std::vector<std::vector<double>> psis{{1, 1, 1}, {3, 1, 2}, {1, 4, 2, 0.5}};
    for (const auto& psi : psis) {
        const std::size_t n = psi.size();
        for (double af : {0.5, 1.0, 2.0}) {
            for (double ag : {0.5, 1.0, 2.0}) {
                for (bool dependent : {false, true}) {
                    std::vector<SignalMap> g;
                    for (std::size_t i = 0; i < n; ++i) {
                        std::vector<double> gamma{1.0, 2.5};
                        if (dependent && i == 1) gamma[1] = 4.0;
                        g.push_back(power_signal_map(gamma, ag));
                    }
                    const GretherSpec spec(PowerWeighted(psi, af), g);
                    const bool expected = std::abs(af - ag) <= 1e-7 && !dependent;
                    EXPECT_EQ(check_gretherian_coherence(spec, 2, 200, 41).passed, expected)
                        << "af=" << af << " ag=" << ag << " dep=" << dependent;
                }
            }
        }
    }
}

TEST(SignalModelsProperty, UndistortedGretherEqualsBayes) {
    const GretherSpec spec(Distortion::identity(4), identity_signal_map());
    for (std::uint64_t t = 0; t < 10000; ++t) {
        Rng rng = Rng::for_trial(43, t);
        const Belief p = rng.mixed_belief(4);
        Matrix lik(4, 3);
        for (std::size_t i = 0; i < 4; ++i) {
            const Belief r = rng.mixed_belief(3);
            for (std::size_t c = 0; c < 3; ++c) lik(i, c) = r[c];
        }
        const BlackwellExperiment sigma(lik);
        const std::size_t theta = rng.index(3);
        double mass = 0.0;
        for (std::size_t i = 0; i < 4; ++i) mass += p[i] * sigma(i, theta);
        if (mass <= kDefaultTolerance) continue;
        ASSERT_LE(belief_distance(grether_update(spec, p, sigma, theta), bayes_posterior(p, sigma, theta)), 1e-12);
    }
}

TEST(SignalModelsProperty, CoherentUpdateCommutesWithFurtherConditioning) {
    const PowerWeighted f({2, 1, 3, 1}, 1.7);
    const GretherSpec spec(f, power_signal_map({1.0, 0.4, 2.0}, 1.7));
    for (std::uint64_t t = 0; t < 300; ++t) {
        Rng rng = Rng::for_trial(44, t);
        const Belief p = rng.dirichlet(4);
        Matrix lik(4, 3);
        for (std::size_t i = 0; i < 4; ++i) {
            const Belief r = rng.dirichlet(3);
            for (std::size_t c = 0; c < 3; ++c) lik(i, c) = r[c];
        }
        const BlackwellExperiment sigma(lik);
        const std::size_t theta = rng.index(3);
        const Event e = rng.event(4);
        const Belief updated_then_conditioned = condition(grether_update(spec, p, sigma, theta), e);
        const Belief distorted_double = f(condition(bayes_posterior(p, sigma, theta), e));
        EXPECT_LE(belief_distance(updated_then_conditioned, distorted_double), 1e-12);
    }
}
