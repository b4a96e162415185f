#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace adjustkit;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::Usage;
}

struct HardnessRow {
    double p_a1, alpha_a, delta, t_a, t_ab, gap;
};

// Closed forms worked out by hand from the CPTs.
HardnessRow hardness_closed_form(double eps, double a) {
    const double r = std::sqrt(eps);
    HardnessRow row{};
    row.p_a1 = eps / (4 * a) * (a - eps / 4) / (1 - r / 2);
    row.alpha_a = a - eps / 4;
    row.delta = eps - std::pow(eps, 1.5) / 2;
    row.t_a = eps / 4;
    row.t_ab = eps / 4 - eps * eps / (16 * a);
    row.gap = eps * eps / (16 * a);
    return row;
}

bool same_table(const JointDistribution& p, const JointDistribution& q) {
    return p.variables() == q.variables() &&
           std::equal(p.probabilities().begin(), p.probabilities().end(), q.probabilities().begin(),
                      q.probabilities().end());
}

}  // namespace

TEST(Hardness, TableColumns) {
    const Event x0{{"X", 0}}, y1{{"Y", 1}};
    for (auto [eps, a] : {std::pair{0.04, 0.4}, {0.01, 0.25}, {0.09, 0.5}}) {
        const auto d = gallery_hardness(eps, a);
        const auto want = hardness_closed_form(eps, a);
        EXPECT_NEAR(probability(d, {{"A", 1}}), want.p_a1, 1e-15);
        EXPECT_NEAR(support::alpha(d, x0, {"A"}), want.alpha_a, 1e-12);
        EXPECT_NEAR(alpha(d, x0, {"A"}), want.alpha_a, 1e-12);
        EXPECT_NEAR(support::delta(d, {"X"}, {"B"}, {"A"}), want.delta, 1e-12);
        EXPECT_NEAR(support::adjustment(d, x0, y1, {"A"}), want.t_a, 1e-12);
        EXPECT_NEAR(support::adjustment(d, x0, y1, {"A", "B"}), want.t_ab, 1e-12);
        EXPECT_NEAR(exact_adjustment(d, {x0, y1, {"A"}}) - exact_adjustment(d, {x0, y1, {"A", "B"}}), want.gap,
                    1e-12);
    }
    EXPECT_NEAR(hardness_closed_form(0.04, 0.4).alpha_a, 0.39, 1e-15);
    EXPECT_NEAR(hardness_closed_form(0.04, 0.4).gap, 0.00025, 1e-15);
}

TEST(Hardness, AOneMassIsAProbability) {
    CounterRng rng(77);
    for (int i = 0; i < 10000; ++i) {
        const double a = 0.5 * rng.uniform() + 1e-9;
        const double eps = a * a * rng.uniform() + 1e-18;
        if (!(std::sqrt(eps) <= a)) continue;
        const double p = probability(gallery_hardness(eps, a), {{"A", 1}});
        ASSERT_GE(p, 0.0);
        ASSERT_LE(p, 1.0);
    }
}

TEST(Hardness, RejectsBadParameters) {
    EXPECT_EQ(code_of([] { gallery_hardness(0.04, 0.1); }), ErrorCode::ParamRange);
    EXPECT_EQ(code_of([] { gallery_hardness(0.04, 0.6); }), ErrorCode::ParamRange);
    EXPECT_EQ(code_of([] { gallery_hardness(0.0, 0.4); }), ErrorCode::ParamRange);
}

TEST(WeakEdge, Values) {
    for (double eps : {0.0, 0.01, 0.2, 0.9}) {
        const auto d = gallery_weak_edge(eps);
        EXPECT_NEAR(conditional_prob(d, {{"Y", 1}}, {{"X", 0}}), (1 - eps) / 2, 1e-12);
        EXPECT_NEAR(exact_adjustment(d, {{{"X", 0}}, {{"Y", 1}}, {"Z"}}), 0.5, 1e-12);
        EXPECT_NEAR(support::delta(d, {"X"}, {"Z"}, {}), eps, 1e-12);
    }
    EXPECT_EQ(code_of([] { gallery_weak_edge(1.0); }), ErrorCode::ParamRange);
    EXPECT_EQ(code_of([] { gallery_weak_edge(-0.1); }), ErrorCode::ParamRange);
}

TEST(Xor, ParentsLookIndependentOneAtATime) {
    const auto d = gallery_xor(0.1);
    EXPECT_NEAR(support::delta(d, {"X"}, {"A"}, {}), 0.1, 1e-12);
    EXPECT_NEAR(support::delta(d, {"X"}, {"B"}, {}), 0.1, 1e-12);
    EXPECT_NEAR(support::delta(d, {"A"}, {"B"}, {}), 0.0, 1e-15);
    EXPECT_NEAR(support::delta(d, {"X"}, {"A", "B"}, {}), 0.8, 1e-12);
    EXPECT_EQ(code_of([] { gallery_xor(0.0); }), ErrorCode::ParamRange);
    EXPECT_EQ(code_of([] { gallery_xor(0.6); }), ErrorCode::ParamRange);
}

TEST(Backdoor, Structure) {
    for (std::size_t k = 1; k <= 4; ++k) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const auto d = gallery_backdoor(k, seed);
            const auto parents = backdoor_parents(k);
            ASSERT_EQ(d.variables().size(), k + 3);
            EXPECT_EQ(d.variables().front().name, "B");
            EXPECT_LE(support::delta(d, {"X"}, {"B"}, parents), 1e-12);
            EXPECT_LE(support::delta(d, {"Y"}, parents, {"X", "B"}), 1e-12);
            EXPECT_GE(support::delta(d, {"Y"}, {"B"}, {"X"}), 1e-3);
            for (const auto& p : parents) {
                const auto rest = support::unite({"B"}, support::minus(parents, {p}));
                EXPECT_GE(support::delta(d, {"X"}, {p}, rest), 1e-3);
            }
            EXPECT_TRUE(same_table(d, gallery_backdoor(k, seed)));
        }
    }
    EXPECT_FALSE(same_table(gallery_backdoor(3, 1), gallery_backdoor(3, 2)));
    EXPECT_EQ(code_of([] { gallery_backdoor(0, 1); }), ErrorCode::ParamRange);
    EXPECT_EQ(code_of([] { gallery_backdoor(9, 1); }), ErrorCode::ParamRange);
}

TEST(Backdoor, AdjustmentSetsAgree) {
    const auto d = gallery_backdoor(3, 2);
    const Event x{{"X", 1}}, y{{"Y", 1}};
    const double full = support::adjustment(d, x, y, {"B", "A1", "A2", "A3"});
    EXPECT_NEAR(support::adjustment(d, x, y, {"A1", "A2", "A3"}), full, 1e-12);
    EXPECT_NEAR(support::adjustment(d, x, y, {"B"}), full, 1e-12);
}

TEST(Random, DeterministicAndSeeded) {
    EXPECT_TRUE(same_table(gallery_random(4, 3, 5), gallery_random(4, 3, 5)));
    EXPECT_FALSE(same_table(gallery_random(4, 3, 5), gallery_random(4, 3, 6)));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto d = gallery_random(5, 4, seed);
        for (const auto& v : d.variables()) {
            EXPECT_GE(v.cardinality, 2U);
            EXPECT_LE(v.cardinality, 4U);
        }
        EXPECT_NO_THROW(validate(d));
    }
}

TEST(Random, PositivityFloor) {
    for (double floor : {0.1, 0.5, 1.0}) {
        const auto d = gallery_random(4, 3, 9, floor);
        const double cells = static_cast<double>(d.size());
        for (double p : d.probabilities()) EXPECT_GE(p, floor / cells - 1e-15);
    }
    const auto flat = gallery_random(3, 2, 1, 1.0);
    for (double p : flat.probabilities()) EXPECT_NEAR(p, 1.0 / static_cast<double>(flat.size()), 1e-15);
}

TEST(Random, RejectsBadParameters) {
    EXPECT_EQ(code_of([] { gallery_random(0, 2, 1); }), ErrorCode::ParamRange);
    EXPECT_EQ(code_of([] { gallery_random(7, 2, 1); }), ErrorCode::ParamRange);
    EXPECT_EQ(code_of([] { gallery_random(3, 5, 1); }), ErrorCode::ParamRange);
    EXPECT_EQ(code_of([] { gallery_random(3, 2, 1, 1.5); }), ErrorCode::ParamRange);
}

TEST(MakeGallery, Dispatch) {
    EXPECT_TRUE(same_table(make_gallery({"hardness", {{"eps", 0.04}, {"alpha", 0.4}}, 0}), gallery_hardness(0.04, 0.4)));
    EXPECT_TRUE(same_table(make_gallery({"xor-compositionality", {{"eps", 0.1}}, 0}), gallery_xor(0.1)));
    EXPECT_TRUE(same_table(make_gallery({"xor", {{"eps", 0.1}}, 0}), gallery_xor(0.1)));
    EXPECT_TRUE(same_table(make_gallery({"backdoor", {{"k", 2}}, 4}), gallery_backdoor(2, 4)));
    EXPECT_TRUE(same_table(make_gallery({"random", {{"vars", 3}, {"card", 3}, {"floor", 0.2}}, 8}),
                           gallery_random(3, 3, 8, 0.2)));
    EXPECT_EQ(code_of([] { make_gallery({"nope", {}, 0}); }), ErrorCode::Usage);
    EXPECT_EQ(code_of([] { make_gallery({"hardness", {{"eps", 0.04}}, 0}); }), ErrorCode::Usage);
    EXPECT_EQ(code_of([] { make_gallery({"backdoor", {{"k", 2.5}}, 0}); }), ErrorCode::ParamRange);
}
