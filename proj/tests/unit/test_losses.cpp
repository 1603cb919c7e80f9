#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "sassseg/losses.hpp"
#include "test_support.hpp"

using namespace sass;

namespace {

ProbMask prob_row(std::vector<double> v) {
    const int w = static_cast<int>(v.size());
    return ProbMask(w, 1, std::move(v));
}
BinaryMask mask_row(std::vector<std::uint8_t> v) {
    const int w = static_cast<int>(v.size());
    return BinaryMask(w, 1, std::move(v));
}

using LossFn = std::function<LossValue(const ProbMask&, const BinaryMask&)>;

struct NamedLoss {
    const char* name;
    LossFn fn;
};

std::vector<NamedLoss> all_losses() {
    return {
        {"bce", [](const ProbMask& p, const BinaryMask& y) { return bce_loss(p, y); }},
        {"focal", [](const ProbMask& p, const BinaryMask& y) { return focal_loss(p, y, 0.25, 2.0); }},
        {"dice", [](const ProbMask& p, const BinaryMask& y) { return dice_loss(p, y, 1e-6); }},
        {"tversky", [](const ProbMask& p, const BinaryMask& y) { return tversky_loss(p, y, 0.7, 0.3, 1e-6); }},
        {"focal_tversky",
         [](const ProbMask& p, const BinaryMask& y) { return focal_tversky_loss(p, y, 0.7, 0.3, 0.75, 1e-6); }},
    };
}

}  // namespace

TEST(SoftConfusion, HardPredictionCountsClasses) {
    Rng rng(51);
    const BinaryMask y = test::random_mask(rng, 8, 8);
    ProbMask p(8, 8);
    for (std::size_t i = 0; i < y.size(); ++i) p.data[i] = y.data[i];
    const auto c = soft_confusion(p, y);
    EXPECT_EQ(c.fp, 0.0);
    EXPECT_EQ(c.fn, 0.0);
    EXPECT_EQ(c.tp, static_cast<double>(y.count_foreground()));
    EXPECT_EQ(c.tn, static_cast<double>(y.size() - y.count_foreground()));
}

TEST(SoftConfusion, HalfEverywhere) {
    Rng rng(52);
    const BinaryMask y = test::random_mask(rng, 10, 10);
    const auto c = soft_confusion(ProbMask(10, 10, 0.5), y);
    const double fg = static_cast<double>(y.count_foreground());
    EXPECT_DOUBLE_EQ(c.tp, fg / 2);
    EXPECT_DOUBLE_EQ(c.fn, fg / 2);
    EXPECT_DOUBLE_EQ(c.fp, (100 - fg) / 2);
    EXPECT_DOUBLE_EQ(c.tn, (100 - fg) / 2);
}

TEST(SoftConfusion, TwoPixelExample) {
    const auto c = soft_confusion(prob_row({0.2, 0.8}), mask_row({0, 1}));
    EXPECT_DOUBLE_EQ(c.tp, 0.8);
    EXPECT_DOUBLE_EQ(c.fp, 0.2);
    EXPECT_NEAR(c.fn, 0.2, 1e-15);
    EXPECT_NEAR(c.tn, 0.8, 1e-15);
}

TEST(SoftConfusion, SumsToPixelCount) {
    Rng rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        const auto c = soft_confusion(test::random_prob(rng, 16, 16, 0, 1), test::random_mask(rng, 16, 16));
        EXPECT_NEAR(c.tp + c.fp + c.fn + c.tn, 256.0, 1e-9);
    }
}

TEST(SoftConfusion, ComplementSwapsCells) {
    Rng rng(54);
    const ProbMask p = test::random_prob(rng, 16, 16, 0, 1);
    const BinaryMask y = test::random_mask(rng, 16, 16);
    ProbMask q = p;
    for (auto& v : q.data) v = 1.0 - v;
    BinaryMask z = y;
    for (auto& v : z.data) v = static_cast<std::uint8_t>(1 - v);
    const auto a = soft_confusion(p, y);
    const auto b = soft_confusion(q, z);
    EXPECT_NEAR(a.tp, b.tn, 1e-12);
    EXPECT_NEAR(a.tn, b.tp, 1e-12);
    EXPECT_NEAR(a.fp, b.fn, 1e-12);
    EXPECT_NEAR(a.fn, b.fp, 1e-12);
}

TEST(SoftConfusion, DimensionMismatchThrows) {
    EXPECT_THROW(soft_confusion(ProbMask(2, 2), BinaryMask(2, 3)), std::invalid_argument);
    for (const auto& l : all_losses()) EXPECT_THROW(l.fn(ProbMask(2, 2), BinaryMask(3, 2)), std::invalid_argument) << l.name;
}

TEST(Bce, HalfIsLn2) { EXPECT_NEAR(bce_loss(ProbMask(4, 4, 0.5), BinaryMask(4, 4)).value, std::log(2.0), 1e-15); }

TEST(Bce, ComplementInvariant) {
    Rng rng(55);
    const ProbMask p = test::random_prob(rng, 16, 16);
    const BinaryMask y = test::random_mask(rng, 16, 16);
    ProbMask q = p;
    for (auto& v : q.data) v = 1.0 - v;
    BinaryMask z = y;
    for (auto& v : z.data) v = static_cast<std::uint8_t>(1 - v);
    EXPECT_NEAR(bce_loss(p, y).value, bce_loss(q, z).value, 1e-12);
}

TEST(Focal, HandEvaluatedPixel) {
    const double expect = 0.25 * 0.1 * 0.1 * -std::log(0.9);
    EXPECT_NEAR(expect, 2.634e-4, 5e-8);
    EXPECT_NEAR(focal_loss(prob_row({0.9}), mask_row({1}), 0.25, 2.0).value, expect, 1e-15);
}

TEST(Focal, PerfectPredictionIsZero) {
    EXPECT_NEAR(focal_loss(prob_row({1.0, 0.0}), mask_row({1, 0}), 0.25, 2.0).value, 0.0, 1e-12);
}

TEST(Tversky, HandEvaluatedExample) {
    // tp=0.8, fp=0.2, fn=0.2: 1 - 0.8 / (0.8 + 0.7*0.2 + 0.3*0.2) = 0.2
    const double v = tversky_loss(prob_row({0.2, 0.8}), mask_row({0, 1}), 0.7, 0.3, 1e-6).value;
    EXPECT_NEAR(v, 0.2, 1e-6);
}

TEST(FocalTversky, HandEvaluatedExample) {
    const double v = focal_tversky_loss(prob_row({0.2, 0.8}), mask_row({0, 1}), 0.7, 0.3, 0.75, 1e-6).value;
    EXPECT_NEAR(std::pow(0.2, 0.75), 0.29907, 5e-6);
    EXPECT_NEAR(v, std::pow(0.2, 0.75), 1e-5);
}

TEST(FocalTversky, RejectsNonPositiveExponent) {
    EXPECT_THROW(focal_tversky_loss(prob_row({0.5}), mask_row({1}), 0.7, 0.3, 0.0, 1e-6), std::invalid_argument);
}

TEST(Dice, DisjointMasksNearOne) {
    const double v = dice_loss(prob_row({1, 1, 0, 0}), mask_row({0, 0, 1, 1}), 1e-6).value;
    EXPECT_NEAR(v, 1.0 - 1e-6 / (4 + 1e-6), 1e-15);
}

TEST(Losses, ZeroAtHardTarget) {
    Rng rng(56);
    for (const auto& l : all_losses()) {
        for (int trial = 0; trial < 10; ++trial) {
            const BinaryMask y = test::random_mask(rng, 16, 16);
            ProbMask p(16, 16);
            for (std::size_t i = 0; i < y.size(); ++i) p.data[i] = y.data[i];
            const double v = l.fn(p, y).value;
            EXPECT_GE(v, 0.0) << l.name;
            EXPECT_LE(v, 1e-5) << l.name;
        }
    }
}

TEST(Losses, NonNegativeOnRandomInputs) {
    Rng rng(57);
    for (const auto& l : all_losses()) {
        for (int trial = 0; trial < 20; ++trial) {
            EXPECT_GE(l.fn(test::random_prob(rng, 16, 16, 0, 1), test::random_mask(rng, 16, 16)).value, 0.0) << l.name;
        }
    }
}

TEST(Losses, IdentitiesHoldTo1e12) {
    Rng rng(58);
    for (int trial = 0; trial < 50; ++trial) {
        const ProbMask p = test::random_prob(rng, 16, 16, 0.0, 1.0);
        const BinaryMask y = test::random_mask(rng, 16, 16, rng.uniform(0.05, 0.6));
        const double eps = 1e-6;
        // Dice's 2tp+eps numerator equals Tversky's (tp+eps/2) scaled by two.
        EXPECT_NEAR(tversky_loss(p, y, 0.5, 0.5, eps / 2).value, dice_loss(p, y, eps).value, 1e-12);
        EXPECT_NEAR(focal_tversky_loss(p, y, 0.7, 0.3, 1.0, eps).value, tversky_loss(p, y, 0.7, 0.3, eps).value, 1e-12);
        EXPECT_NEAR(focal_loss(p, y, 0.5, 0.0).value, 0.5 * bce_loss(p, y).value, 1e-12);
    }
}

TEST(Losses, GradientsMatchFiniteDifferences) {
    Rng rng(59);
    for (const auto& l : all_losses()) {
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const ProbMask p = test::random_prob(rng, 16, 16, 0.05, 0.95);
            const BinaryMask y = test::random_mask(rng, 16, 16, rng.uniform(0.1, 0.6));
            const LossValue lv = l.fn(p, y);
            auto f = [&](std::span<const double> x) {
                return l.fn(ProbMask(16, 16, std::vector<double>(x.begin(), x.end())), y).value;
            };
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double fd = test::central_difference(f, p.data, i, 1e-4);
                worst = std::max(worst, test::rel_err(lv.grad[i], fd));
            }
        }
        EXPECT_LE(worst, 1e-5) << l.name;
    }
}

TEST(Losses, GradientZeroWhereClamped) {
    const ProbMask p = prob_row({0.0, 1.0, 1e-9, 1.0 - 1e-9, 0.5});
    const BinaryMask y = mask_row({1, 0, 1, 0, 1});
    for (const auto& l : {all_losses()[0], all_losses()[1]}) {
        const LossValue lv = l.fn(p, y);
        for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(lv.grad[i], 0.0) << l.name << " pixel " << i;
        EXPECT_NE(lv.grad[4], 0.0);
        EXPECT_TRUE(std::isfinite(lv.value));
    }
}

TEST(Losses, PermutationInvariant) {
    Rng rng(60);
    const ProbMask p = test::random_prob(rng, 16, 16);
    const BinaryMask y = test::random_mask(rng, 16, 16);
    const auto perm = permutation(p.size(), rng);
    ProbMask pp(16, 16);
    BinaryMask yp(16, 16);
    for (std::size_t i = 0; i < p.size(); ++i) {
        pp.data[i] = p.data[perm[i]];
        yp.data[i] = y.data[perm[i]];
    }
    for (const auto& l : all_losses()) EXPECT_NEAR(l.fn(p, y).value, l.fn(pp, yp).value, 1e-12) << l.name;
}

TEST(LossSpec, DispatchAndNames) {
    Rng rng(61);
    const ProbMask p = test::random_prob(rng, 8, 8);
    const BinaryMask y = test::random_mask(rng, 8, 8);
    const auto losses = all_losses();
    for (const auto& l : losses) {
        const LossSpec spec = loss_from_name(l.name);
        EXPECT_EQ(spec.name(), l.name);
        EXPECT_EQ(compute_loss(spec, p, y).value, l.fn(p, y).value);
    }
    EXPECT_EQ(loss_from_name("ftl").name(), "focal_tversky");
    EXPECT_EQ(LossSpec{}.name(), "focal_tversky");
    EXPECT_THROW(loss_from_name("hinge"), std::invalid_argument);
}

TEST(LossSpec, ValidatesRanges) {
    EXPECT_THROW((LossSpec{FocalLoss{1.5, 2.0}}.validate()), std::invalid_argument);
    EXPECT_THROW((LossSpec{FocalLoss{0.5, -1.0}}.validate()), std::invalid_argument);
    EXPECT_THROW((LossSpec{DiceLoss{0.0}}.validate()), std::invalid_argument);
    EXPECT_THROW((LossSpec{TverskyLoss{-0.1, 0.3, 1e-6}}.validate()), std::invalid_argument);
    EXPECT_THROW((LossSpec{FocalTverskyLoss{0.7, 0.3, 0.0, 1e-6}}.validate()), std::invalid_argument);
    EXPECT_NO_THROW(LossSpec{}.validate());
}
