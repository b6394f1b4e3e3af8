#include "test_support.hpp"

using namespace coherent;
using coherent::testing::error_code_of;
using coherent::testing::incoherent_family;
using coherent::testing::near;

TEST(PowerWeighted, ValidatesParameters) {
    EXPECT_EQ(error_code_of([] { PowerWeighted({1.0, 0.0}, 1.0); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(error_code_of([] { PowerWeighted({1.0, 1.0}, 0.0); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(error_code_of([] { PowerWeighted({}, 1.0); }), ErrorCode::InvalidArgument);
    EXPECT_TRUE(near(PowerWeighted({2, 1, 1}, 1.0).psi(), {0.5, 0.25, 0.25}, 1e-16));
}

TEST(ApplyPowerWeighted, Examples) {
    EXPECT_TRUE(near(apply_power_weighted({{2, 1, 1}, 1.0}, Belief({0.5, 0.25, 0.25})), {2.0 / 3, 1.0 / 6, 1.0 / 6},
                     1e-15));
    const Belief p({0.1, 0.7, 0.2});
    EXPECT_TRUE(near(apply_power_weighted(PowerWeighted::identity(3), p), p.vec(), 1e-15));
    EXPECT_TRUE(near(apply_power_weighted({{2, 1, 1}, 2.0}, Belief::uniform(3)), {0.5, 0.25, 0.25}, 1e-15));
}

TEST(ApplyPowerWeighted, ZeroStaysZeroAndLargeAlphaIsFinite) {
    const Belief out = apply_power_weighted({{1, 5, 2}, 0.3}, Belief({0.0, 0.4, 0.6}));
    EXPECT_EQ(out[0], 0.0);
    EXPECT_GT(out[1], 0.0);
    const Belief big = apply_power_weighted({{1, 1}, 50.0}, Belief({1e-8, 1.0 - 1e-8}));
    EXPECT_TRUE(std::isfinite(big[0]));
    EXPECT_EQ(big[1], 1.0);
}

TEST(CheckCoherence, Examples) {
    const auto pw = check_coherence(Distortion(PowerWeighted({3, 1, 2, 5}, 2.7)), 1000, 1);
    EXPECT_TRUE(pw.passed);
    EXPECT_LT(pw.max_deviation, 1e-10);
    EXPECT_FALSE(pw.witness);

    const auto smooth = check_coherence(incoherent::additive_smoothing(3, 0.1), 1000, 1);
    EXPECT_FALSE(smooth.passed);
    ASSERT_TRUE(smooth.witness);
    EXPECT_GT(smooth.max_deviation, smooth.tolerance);
    EXPECT_TRUE(smooth.first_violation);

    const auto id = check_coherence(Distortion::identity(4), 1000, 1);
    EXPECT_TRUE(id.passed);
    EXPECT_EQ(id.max_deviation, 0.0);
}

TEST(CheckCoherence, SmoothingGapAtHandExample) {
    const auto d = incoherent::additive_smoothing(3, 0.1);
    const Belief p({0.6, 0.2, 0.2});
    const Event e{0, 1};
    EXPECT_NEAR(condition(d(p), e)[0], 0.7, 1e-15);
    EXPECT_NEAR(d(condition(p, e))[0], 17.0 / 24, 1e-15);
    EXPECT_NEAR(coherence_gap(d, p, e), 17.0 / 24 - 0.7, 1e-15);
}

TEST(CheckCoherence, DeterministicGivenSeed) {
    const auto d = incoherent::prelec(4, 0.65);
    const auto a = check_coherence(d, 300, 9);
    const auto b = check_coherence(d, 300, 9);
    EXPECT_EQ(a.max_deviation, b.max_deviation);
    EXPECT_EQ(a.first_violation, b.first_violation);
    ASSERT_TRUE(a.witness && b.witness);
    EXPECT_EQ(a.witness->belief, b.witness->belief);
}

TEST(IdentifyPsi, Examples) {
    EXPECT_TRUE(near(identify_psi(PowerWeighted({2, 1, 1}, 3.3)), {0.5, 0.25, 0.25}, 1e-15));
    EXPECT_TRUE(near(identify_psi(Distortion::identity(4)), Belief::uniform(4).vec(), 1e-15));
    EXPECT_TRUE(near(identify_psi(PowerWeighted({1, 1}, 3.0)), {0.5, 0.5}, 1e-15));
}

TEST(IdentifyPsi, ZeroOutputRaises) {
    const Distortion collapse(2, [](const Belief&) { return Belief({1.0, 0.0}); }, "collapse");
    EXPECT_EQ(error_code_of([&] { (void)identify_psi(collapse); }), ErrorCode::NonPositiveOutput);
}

TEST(IdentifyAlpha, Examples) {
    EXPECT_NEAR(identify_alpha(PowerWeighted({2, 1, 1}, 2.0)), 2.0, 1e-12);
    EXPECT_NEAR(identify_alpha(Distortion::identity(3)), 1.0, 1e-12);
    EXPECT_NEAR(identify_alpha(PowerWeighted({1, 1, 1}, 0.5)), 0.5, 1e-12);
    EXPECT_EQ(identify_alpha(Distortion::identity(1)), 1.0);
}

TEST(IdentifyAlpha, FallbackOnTwoStates) {
    EXPECT_NEAR(identify_alpha(PowerWeighted({1, 1}, 4.5)), 4.5, 1e-12);
}

TEST(IdentifyAlpha, DegenerateMapRaises) {
    // Constant output: no pair separates, the implied exponent is 0.
    const Distortion flat(3, [](const Belief& p) { return Belief::uniform_on(p.size(), p.support()); }, "flat");
    EXPECT_EQ(error_code_of([&] { (void)identify_alpha(flat); }), ErrorCode::DegenerateDistortion);
}

TEST(RatioTest, Examples) {
    EXPECT_TRUE(check_ratio_test_alpha1(PowerWeighted({5, 1, 2}, 1.0), 500, 3).passed);
    const auto sq = check_ratio_test_alpha1(PowerWeighted({1, 1, 1}, 2.0), 500, 3);
    EXPECT_FALSE(sq.passed);
    EXPECT_TRUE(sq.witness);
    EXPECT_TRUE(check_ratio_test_alpha1(Distortion::identity(3), 500, 3).passed);
}

TEST(PiMarginality, Examples) {
    const Partition pi(3, {Event{0}, Event{1, 2}});
    EXPECT_TRUE(check_pi_marginality(PowerWeighted({3, 1, 1}, 1.0), pi, 500, 5).passed);

    const auto sq = check_pi_marginality(PowerWeighted({1, 1, 1}, 2.0), pi, 500, 5);
    EXPECT_FALSE(sq.passed);
    ASSERT_TRUE(sq.witness);
    // The second fixed probe, (1/2,1/4,1/4) vs (1/2,1/2,0), is the first to fail.
    EXPECT_EQ(sq.first_violation, 1u);
    const PowerWeighted d({1, 1, 1}, 2.0);
    EXPECT_NEAR(d(Belief({0.5, 0.25, 0.25}))[0] - d(Belief({0.5, 0.5, 0.0}))[0], 2.0 / 3 - 0.5, 1e-15);
    EXPECT_GE(sq.max_deviation, 2.0 / 3 - 0.5 - 1e-12);

    EXPECT_FALSE(check_pi_marginality(PowerWeighted({2, 1, 3}, 1.0), pi, 500, 5).passed);
}

TEST(PiMarginality, SplitVersusLumpedMasses) {
    const PowerWeighted d({1, 1, 1}, 2.0);
    const Event block{1, 2};
    // (1/2, 1/4, 1/4) vs (1/2, 1/2, 0): the block keeps mass 1/2 but distorts differently.
    EXPECT_NEAR(event_prob(d(Belief({0.5, 0.25, 0.25})), block), 1.0 / 3, 1e-15);
    EXPECT_NEAR(event_prob(d(Belief({0.5, 0.5, 0.0})), block), 0.5, 1e-15);
}

// Properties ----------------------------------------------------------------

TEST(DistortionProperty, RoundTripIdentification) {
    for (std::uint64_t t = 0; t < 500; ++t) {
        Rng rng = Rng::for_trial(21, t);
        const std::size_t n = 2 + rng.index(7);
        std::vector<double> psi(n);
        for (auto& v : psi) v = rng.uniform(0.05, 5.0);
        const double alpha = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
        const PowerWeighted d(psi, alpha);
        EXPECT_TRUE(near(identify_psi(d), d.psi(), 1e-9));
        EXPECT_NEAR(identify_alpha(d) / alpha, 1.0, 1e-7) << "n=" << n << " alpha=" << alpha;
    }
}

TEST(DistortionProperty, CoherenceAndPositivity) {
    for (std::uint64_t t = 0; t < 200; ++t) {
        Rng rng = Rng::for_trial(22, t);
        const std::size_t n = 2 + rng.index(7);
        std::vector<double> psi(n);
        for (auto& v : psi) v = rng.uniform(0.05, 5.0);
        const PowerWeighted d(psi, rng.uniform(0.1, 10.0));
        EXPECT_LE(check_coherence(d, 20, t).max_deviation, 1e-10);
        for (int k = 0; k < 20; ++k) {
            const Belief p = rng.mixed_belief(n);
            EXPECT_EQ(d(p).support(), p.support());
        }
    }
}

namespace {

struct GridCase {
    std::vector<double> psi;
    double alpha;
};

std::vector<GridCase> parameter_grid(const std::vector<std::vector<double>>& psis) {
    std::vector<GridCase> out;
    for (const auto& psi : psis) {
        for (double a : {0.3, 0.8, 0.999, 1.0, 1.001, 1.5, 4.0}) out.push_back({psi, a});
    }
    return out;
}

bool block_constant(const std::vector<double>& psi, const Partition& pi) {
    double s = 0.0;
    for (double v : psi) s += v;
    std::vector<double> norm;
    for (double v : psi) norm.push_back(v / s);
    return pi.measurable(norm, 1e-9);
}

}  // namespace

TEST(DistortionProperty, PiMarginalityIffWeightedAndMeasurable) {
    const std::vector<Partition> partitions{Partition(3, {Event{0}, Event{1, 2}}),
                                            Partition(4, {Event{0, 3}, Event{1, 2}}),
                                            Partition(4, {Event{0}, Event{1}, Event{2, 3}}),
                                            Partition(5, {Event{0, 1, 2}, Event{3, 4}})};
    for (const auto& pi : partitions) {
        const std::size_t n = pi.space_size();
        std::vector<std::vector<double>> psis{std::vector<double>(n, 1.0)};
        std::vector<double> measurable(n);
        std::vector<double> rough(n);
        for (std::size_t b = 0; b < pi.blocks().size(); ++b) {
            for (auto i : pi.blocks()[b]) measurable[i] = 1.0 + static_cast<double>(b);
        }
        for (std::size_t i = 0; i < n; ++i) rough[i] = 1.0 + 0.5 * static_cast<double>(i);
        psis.push_back(measurable);
        psis.push_back(rough);
        for (const auto& c : parameter_grid(psis)) {
            const PowerWeighted d(c.psi, c.alpha);
            const bool expected = std::abs(c.alpha - 1.0) <= 1e-7 && block_constant(c.psi, pi);
            EXPECT_EQ(check_pi_marginality(d, pi, 200, 17).passed, expected)
                << "alpha=" << c.alpha << " n=" << n;
        }
    }
}

TEST(DistortionProperty, RatioTestIffUnitAlpha) {
    const std::vector<std::vector<double>> psis{{1, 1, 1}, {2, 1, 1}, {0.3, 4, 1, 2}, {1, 2, 3, 4, 5}};
    for (const auto& c : parameter_grid(psis)) {
        const PowerWeighted d(c.psi, c.alpha);
        const bool unit = std::abs(identify_alpha(d) - 1.0) <= 1e-7;
        EXPECT_EQ(check_ratio_test_alpha1(d, 200, 23).passed, unit) << "alpha=" << c.alpha;
    }
}

TEST(DistortionProperty, NonPowerWeightedFailCoherence) {
    for (std::size_t n : {3u, 5u}) {
        for (const auto& d : incoherent_family(n)) {
            const auto r = check_coherence(d, 1000, 31);
            EXPECT_FALSE(r.passed) << d.name();
            EXPECT_TRUE(r.witness) << d.name();
        }
    }
}
