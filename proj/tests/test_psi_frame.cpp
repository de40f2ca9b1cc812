#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "hilfer/psi_frame.hpp"

using namespace hilfer;

TEST(PsiFunction, CatalogInversesAndChecks) {
    for (const auto& psi : {PsiFunction::identity(), PsiFunction::power(2.0), PsiFunction::power(0.5),
                            PsiFunction::expm1(), PsiFunction::log1p()}) {
        EXPECT_TRUE(psi.check_on(2.0).empty()) << psi.name();
        for (double t : {0.1, 0.7, 1.9}) {
            EXPECT_NEAR(psi.inverse(psi(t)), t, 1e-13) << psi.name();
        }
    }
    EXPECT_EQ(PsiFunction::power(2.0).name(), "power:2");
    EXPECT_EQ(PsiFunction::power(1.5).name(), "power:1.5");
    EXPECT_THROW((void)PsiFunction::power(0.0), DomainError);
}

TEST(PsiFunction, BisectionInverseAndBadPsi) {
    const PsiFunction cubic("cubic", [](double t) { return t * t * t + t; }, [](double t) { return 3 * t * t + 1; });
    EXPECT_FALSE(cubic.has_inverse());
    EXPECT_NEAR(cubic.inverse(10.0), 2.0, 1e-11);
    EXPECT_TRUE(cubic.check_on(3.0).empty());

    const PsiFunction bump("bump", [](double t) { return std::sin(3.0 * t); },
                           [](double t) { return 3.0 * std::cos(3.0 * t); });
    EXPECT_FALSE(bump.check_on(2.0).empty());
}

TEST(Orders, GammaAndIssues) {
    const Orders o{0.6, 0.5, 1.0};
    EXPECT_DOUBLE_EQ(o.gamma_w(), 0.8);
    EXPECT_DOUBLE_EQ((Orders{0.5, 1.0, 1.0}.gamma_w()), 1.0);
    EXPECT_DOUBLE_EQ((Orders{0.5, 0.0, 1.0}.gamma_w()), 0.5);
    EXPECT_TRUE(o.issues().empty());
    EXPECT_EQ((Orders{1.5, 0.5, 1.0}.issues().size()), 1u);
    EXPECT_EQ((Orders{0.5, -0.1, 0.0}.issues().size()), 2u);
}

TEST(SubGrid, UniformInPsiWithExactEndpoints) {
    const auto psi = PsiFunction::expm1();
    const auto g = make_subgrid(psi, 0.3, 0.65, 33);
    ASSERT_EQ(g.size(), 33u);
    EXPECT_EQ(g.t.front(), 0.3);
    EXPECT_EQ(g.t.back(), 0.65);
    for (std::size_t j = 1; j < g.size(); ++j) {
        EXPECT_NEAR(g.u[j] - g.u[j - 1], g.step(), 1e-14);
        EXPECT_NEAR(psi(g.t[j]), g.u[j], 1e-14);
    }
    EXPECT_THROW((void)make_subgrid(psi, 0.0, 1.0, 1), ShapeError);
    EXPECT_THROW((void)make_subgrid(psi, 1.0, 1.0, 5), DomainError);
}

TEST(Kernel, ValueAndDomain) {
    const auto psi = PsiFunction::power(2.0);
    EXPECT_NEAR(kernel(psi, 0.5, 1.0, 0.5), 2 * 0.5 * std::pow(0.75, -0.5), 1e-14);
    EXPECT_EQ(kernel(psi, 0.5, 1.0, 0.0), 0.0); // psi'(0) = 0
    EXPECT_THROW((void)kernel(psi, 0.5, 0.5, 0.5), DomainError);
}

TEST(Norms, WeightedSupSkipsSingularOrigin) {
    const auto psi = PsiFunction::identity();
    const Orders o{0.5, 0.0, 1.0}; // gamma = 1/2
    const auto g = make_subgrid(psi, 0.0, 1.0, 5);
    std::vector<double> x = {std::numeric_limits<double>::infinity(), 2.0, 2.0 / std::sqrt(2.0),
                             2.0 / std::sqrt(3.0), 1.0};
    // weighted values are sqrt(t) x(t) = 1, 1/sqrt(2)*sqrt(2)=1 ...
    EXPECT_NEAR(weighted_sup_norm(g, x, psi, o), 1.0, 1e-14);
    EXPECT_NEAR(psi_weight(psi, o, 0.25), 0.5, 1e-15);
    EXPECT_EQ(psi_weight(psi, o, 0.0), 0.0);
    EXPECT_NEAR(delta_norm(-0.25, 0.5), 0.5, 1e-15);
}

TEST(Norms, DistanceTreatsNaNAsInfinite) {
    const auto psi = PsiFunction::identity();
    const Orders o{0.5, 1.0, 1.0};
    GridSolution a;
    Branch b;
    b.grid = make_subgrid(psi, 0.0, 1.0, 3);
    b.x = {0.0, 1.0, 2.0};
    b.weighted = b.x;
    a.branches.push_back(b);
    GridSolution c = a;
    EXPECT_EQ(weighted_sup_distance(a, c, psi, o), 0.0);
    c.branches[0].x[1] = std::nan("");
    EXPECT_TRUE(std::isinf(weighted_sup_distance(a, c, psi, o)));
    c.branches[0].x.push_back(1.0);
    EXPECT_THROW((void)weighted_sup_distance(a, c, psi, o), ShapeError);
}
