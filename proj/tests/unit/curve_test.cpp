#include <sstream>

#include "test_support.hpp"

using namespace coherent;
using coherent::testing::error_code_of;

TEST(Curve, EqualWeightsCrossAtHalf) {
    for (double a : {0.3, 0.5, 2.0, 4.0}) {
        const auto s = classify_curve(1.0, 1.0, a, 99);
        ASSERT_EQ(s.crossings.size(), 1u) << a;
        EXPECT_NEAR(s.crossings[0], 0.5, 1e-9);
    }
}

TEST(Curve, Shapes) {
    EXPECT_TRUE(classify_curve(1.0, 1.0, 2.0, 99).below_then_above);
    EXPECT_TRUE(classify_curve(1.0, 1.0, 0.5, 99).above_then_below);
    const auto w = classify_curve(3.0, 1.0, 1.0, 99);
    EXPECT_TRUE(w.weakly_above);
    EXPECT_TRUE(w.crossings.empty());
    EXPECT_EQ(two_state_weight(3.0, 1.0, 1.0, 0.0), 0.0);
    EXPECT_EQ(two_state_weight(3.0, 1.0, 1.0, 1.0), 1.0);
    const auto diag = classify_curve(1.0, 1.0, 1.0, 9);
    EXPECT_EQ(diag.crossings.size(), 9u);
}

TEST(Curve, UnequalWeightsMoveTheCrossing) {
    const auto s = classify_curve(2.0, 1.0, 2.0, 99);
    ASSERT_EQ(s.crossings.size(), 1u);
    const double c = s.crossings[0];
    EXPECT_LT(c, 0.5);
    EXPECT_NEAR(two_state_weight(2.0, 1.0, 2.0, c), c, 1e-12);
    // Closed form: 2 c^2 (1 - c)... crossing solves 2 c = 1 - c, i.e. c = 1/3.
    EXPECT_NEAR(c, 1.0 / 3, 1e-12);
}

TEST(Curve, CsvFormat) {
    const auto pts = emit_curve(1.0, 1.0, {2.0}, 3);
    std::ostringstream os;
    write_curve_csv(os, pts);
    EXPECT_EQ(os.str(), "p,alpha,phi_p\n"
                        "0.25,2," + format_g17(two_state_weight(1.0, 1.0, 2.0, 0.25)) + "\n"
                        "0.5,2,0.5\n"
                        "0.75,2," + format_g17(two_state_weight(1.0, 1.0, 2.0, 0.75)) + "\n");
    EXPECT_NEAR(two_state_weight(1.0, 1.0, 2.0, 0.25), 0.1, 1e-15);
    EXPECT_EQ(format_g17(0.1), "0.10000000000000001");
    EXPECT_EQ(format_g17(1.0 / 3), "0.33333333333333331");
    EXPECT_EQ(format_g17(1e-20), "9.9999999999999995e-21");
}

TEST(Curve, RejectsBadParameters) {
    EXPECT_EQ(error_code_of([] { (void)emit_curve(1.0, 1.0, {2.0}, 1); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(error_code_of([] { (void)emit_curve(0.0, 1.0, {2.0}, 5); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(error_code_of([] { (void)emit_curve(1.0, 1.0, {-1.0}, 5); }), ErrorCode::InvalidArgument);
}

TEST(CurveProperty, StrictlyIncreasing) {
    for (std::uint64_t t = 0; t < 200; ++t) {
        Rng rng(900 + t);
        const double psi1 = rng.uniform(0.1, 10.0);
        const double psi2 = rng.uniform(0.1, 10.0);
        // Beyond alpha = 5 the grid's last points round to exactly 1 in double.
        const double a = std::exp(rng.uniform(std::log(0.1), std::log(5.0)));
        EXPECT_TRUE(classify_curve(psi1, psi2, a, 199).strictly_increasing) << psi1 << " " << psi2 << " " << a;
    }
}
