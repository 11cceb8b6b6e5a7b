#include <gtest/gtest.h>

#include <random>

#include "masslab/regimes.hpp"

using namespace masslab;

TEST(CriticalExponent, KnownValues) {
    EXPECT_NEAR(critical_exponent(Family::PME_FDE, 3), 1.0 / 3, 1e-15);
    EXPECT_NEAR(critical_exponent(Family::PLE, 2), 4.0 / 3, 1e-15);
    EXPECT_NEAR(critical_exponent(Family::FPME, 1, 0.5), 0.0, 1e-15);
    EXPECT_NEAR(critical_exponent(Family::FPLE, 2, 0.5), 2.0 * 2 / 2.5, 1e-15);
}

TEST(CriticalExponent, NoCriticalValue) {
    EXPECT_TRUE(std::isnan(critical_exponent(Family::HE, 2)));
    EXPECT_TRUE(std::isnan(critical_exponent(Family::TVF, 1)));
    EXPECT_THROW(critical_exponent(Family::DNLE, 2), NotApplicable);
    EXPECT_THROW(critical_exponent(Family::ANISO_PME, 2), NotApplicable);
}

TEST(SimilarityExponents, HeatAndPme) {
    auto e = similarity_exponents(EquationSpec::heat(2));
    EXPECT_DOUBLE_EQ(e.alpha, 1.0);
    EXPECT_DOUBLE_EQ(e.beta, 0.5);
    e = similarity_exponents(EquationSpec::pme(2, 1));
    EXPECT_NEAR(e.alpha, 1.0 / 3, 1e-15);
    EXPECT_NEAR(e.beta, 1.0 / 3, 1e-15);
    EXPECT_THROW(similarity_exponents(EquationSpec::pme(1.0 / 3, 3)), NoFiniteMassSelfSimilar);
}

TEST(SimilarityExponents, FractionalHeat) {
    const auto e = similarity_exponents(EquationSpec::fhe(0.5, 1));
    EXPECT_DOUBLE_EQ(e.alpha, 1.0);
    EXPECT_DOUBLE_EQ(e.beta, 1.0);
}

TEST(SimilarityExponents, AlphaDecreasesInM) {
    for (int N : {3, 4, 6}) {
        const double mc = (N - 2.0) / N;
        double prev = INFINITY;
        for (int k = 1; k <= 200; ++k) {
            const double m = mc + 3.0 * k / 200;
            const double a = similarity_exponents(EquationSpec::pme(m, N)).alpha;
            EXPECT_LT(a, prev) << "N=" << N << " m=" << m;
            prev = a;
        }
    }
}

TEST(SimilarityExponents, ScalingIdentities) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.01, 0.99);
    for (int k = 0; k < 500; ++k) {
        const int N = 1 + k % 5;
        const double mc = std::max(0.0, (N - 2.0) / N);
        const double m = mc + (3 - mc) * U(rng);
        auto e = similarity_exponents(EquationSpec::pme(m, N));
        EXPECT_NEAR(e.alpha, N * e.beta, 1e-12);
        EXPECT_NEAR(e.alpha * (m - 1) + 2 * e.beta, 1.0, 1e-12);
        const double pc = 2.0 * N / (N + 1);
        const double p = pc + (4 - pc) * U(rng);
        e = similarity_exponents(EquationSpec::ple(p, N));
        EXPECT_NEAR(e.alpha, N * e.beta, 1e-12);
        EXPECT_NEAR(e.alpha * (p - 2) + p * e.beta, 1.0, 1e-12);
    }
}

TEST(Classify, Examples) {
    auto r = classify(EquationSpec::pme(0.75, 3));
    EXPECT_EQ(r.regime, Regime::GoodFast);
    EXPECT_TRUE(r.conserves_mass);
    r = classify(EquationSpec::ple(4.0 / 3, 2));
    EXPECT_EQ(r.regime, Regime::Critical);
    EXPECT_TRUE(r.conserves_mass);
    r = classify(EquationSpec::pme(0.2, 3));
    EXPECT_EQ(r.regime, Regime::VeryFast);
    EXPECT_FALSE(r.conserves_mass);
    EXPECT_EQ(classify(EquationSpec::pme(2, 1)).regime, Regime::Slow);
    EXPECT_EQ(classify(EquationSpec::pme(1, 2)).regime, Regime::Linear);
    EXPECT_EQ(classify(EquationSpec::pme(0.1, 1)).regime, Regime::GoodFast);
}

TEST(Classify, SingularFamilies) {
    for (const auto& spec : {EquationSpec::logdiff(), EquationSpec::tvf()}) {
        const auto r = classify(spec);
        EXPECT_EQ(r.regime, Regime::Critical);
        EXPECT_FALSE(r.conserves_mass);
        EXPECT_THROW(similarity_exponents(spec), NoFiniteMassSelfSimilar);
    }
}

TEST(Classify, BoundariesMatchCriticalExponent) {
    for (int N = 1; N <= 6; ++N) {
        const double mc = critical_exponent(Family::PME_FDE, N);
        if (mc > 0) {
            EXPECT_EQ(classify(EquationSpec::pme(mc, N)).regime, Regime::Critical);
            EXPECT_EQ(classify(EquationSpec::pme(std::nextafter(mc, 1.0) * (1 + 1e-12), N)).regime, Regime::GoodFast);
            EXPECT_EQ(classify(EquationSpec::pme(mc * (1 - 1e-12), N)).regime, Regime::VeryFast);
        }
        const double pc = critical_exponent(Family::PLE, N);
        if (pc > 1) {
            EXPECT_EQ(classify(EquationSpec::ple(pc, N)).regime, Regime::Critical);
            EXPECT_EQ(classify(EquationSpec::ple(pc * (1 + 1e-12), N)).regime, Regime::GoodFast);
            EXPECT_EQ(classify(EquationSpec::ple(pc * (1 - 1e-12), N)).regime, Regime::VeryFast);
        }
    }
}

TEST(Classify, CriticalFplePartialConservation) {
    // critical FPLE conserves only when s p_c < 1
    const int N = 1;
    for (double s : {0.3, 0.9}) {
        const double pc = critical_exponent(Family::FPLE, N, s);
        const auto r = classify(EquationSpec::fple(pc, s, N));
        EXPECT_EQ(r.regime, Regime::Critical);
        EXPECT_EQ(r.conserves_mass, s * pc < 1) << "s=" << s;
    }
}

TEST(Dnle, Examples) {
    for (int N : {1, 2, 5}) {
        const auto e = dnle_exponents(1, 2, N);
        EXPECT_NEAR(e.alpha, N / 2.0, 1e-14);
        EXPECT_NEAR(e.beta, 0.5, 1e-14);
    }
    const auto e = dnle_exponents(2, 2, 1);
    EXPECT_NEAR(e.alpha, 1.0 / 3, 1e-14);
    EXPECT_NEAR(e.beta, 1.0 / 3, 1e-14);
    EXPECT_THROW(dnle_exponents(0.5, 1.5, 4), NoFiniteMassSelfSimilar);
}

TEST(Dnle, ReducesToPle) {
    for (double p : {1.6, 2.5, 3.0}) {
        const auto a = dnle_exponents(1, p, 2);
        const auto b = similarity_exponents(EquationSpec::ple(p, 2));
        EXPECT_NEAR(a.alpha, b.alpha, 1e-13);
        EXPECT_NEAR(a.beta, b.beta, 1e-13);
    }
}

TEST(Anisotropic, IsotropicPme) {
    const std::vector<double> m = {0.8, 0.8};
    const auto e = anisotropic_exponents(AnisoKind::PME, m, 2);
    EXPECT_NEAR(e.alpha, 2 / (2 * (0.8 - 1) + 2), 1e-14);
    ASSERT_TRUE(e.sigmas);
    EXPECT_NEAR((*e.sigmas)[0], 0.5, 1e-14);
    EXPECT_NEAR((*e.sigmas)[1], 0.5, 1e-14);
    const auto iso = similarity_exponents(EquationSpec::pme(0.8, 2));
    EXPECT_NEAR(e.alpha, iso.alpha, 1e-14);
}

TEST(Anisotropic, ThreeDirections) {
    const std::vector<double> m = {0.6, 0.9, 0.9};
    const auto e = anisotropic_exponents(AnisoKind::PME, m, 3);
    EXPECT_NEAR(e.alpha, 15.0 / 7, 1e-13);
    const auto& s = *e.sigmas;
    EXPECT_NEAR(s[0], 1.0 / 3 + 0.1, 1e-13);
    EXPECT_NEAR(s[1], 1.0 / 3 - 0.05, 1e-13);
    EXPECT_NEAR(s[2], 1.0 / 3 - 0.05, 1e-13);
    double sum = 0;
    for (int i = 0; i < 3; ++i) {
        sum += s[i];
        EXPECT_NEAR(e.alpha * (m[i] - 1) + 2 * s[i] * e.alpha, 1.0, 1e-13);
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
}

TEST(Anisotropic, PreconditionNamed) {
    const std::vector<double> m = {0.2, 0.2, 0.2};
    try {
        anisotropic_exponents(AnisoKind::PME, m, 3);
        FAIL() << "expected PreconditionFailed";
    } catch (const PreconditionFailed& e) {
        EXPECT_EQ(e.condition, "H2");
    }
}

TEST(Anisotropic, PleIdentitiesAndIsotropicLimit) {
    const std::vector<double> p = {1.7, 1.9, 1.8};
    const auto e = anisotropic_exponents(AnisoKind::PLE, p, 3);
    double sum = 0;
    for (int i = 0; i < 3; ++i) {
        sum += (*e.sigmas)[i];
        EXPECT_NEAR(e.alpha * (p[i] - 2) + p[i] * (*e.sigmas)[i] * e.alpha, 1.0, 1e-13);
    }
    EXPECT_NEAR(sum, 1.0, 1e-13);
    const std::vector<double> q = {1.8, 1.8};
    const auto a = anisotropic_exponents(AnisoKind::PLE, q, 2);
    const auto b = similarity_exponents(EquationSpec::ple(1.8, 2));
    EXPECT_NEAR(a.alpha, b.alpha, 1e-13);
    EXPECT_NEAR((*a.sigmas)[0] * a.alpha, b.beta, 1e-13);
}

TEST(EquationSpec, Validation) {
    EXPECT_THROW(EquationSpec::pme(-1, 2).validate(), ValidationError);
    EXPECT_THROW(EquationSpec::ple(1.0, 2).validate(), ValidationError);
    EXPECT_THROW(EquationSpec::fhe(1.2, 1).validate(), ValidationError);
    EquationSpec e = EquationSpec::pme(2, 1);
    e.p = 3;
    EXPECT_THROW(e.validate(), ValidationError);
    EXPECT_THROW(family_from_string("nope"), ValidationError);
    EXPECT_EQ(family_from_string("FDE"), Family::PME_FDE);
}
