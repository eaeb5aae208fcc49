#include <cmath>

#include <gtest/gtest.h>
#include <json.hpp>

#include "gsd/error.hpp"
#include "gsd/spectral.hpp"
#include "oracles.hpp"

namespace gsd {
namespace {

void expect_first_entry_positive(const Vector& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::abs(v[k]) > 1e-12) {
            EXPECT_GT(v[k], 0.0);
            return;
        }
    }
}

TEST(ExtremeEigenpairs, TwoNodeClosedForm) {
    const ExtremePairs p = extreme_eigenpairs(Graph(2, {{0, 1, 1.0}}));
    EXPECT_NEAR(p.second.value, 2.0, 1e-12);
    EXPECT_NEAR(p.largest.value, 2.0, 1e-12);
    EXPECT_NEAR(p.second.vector[0], 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(p.second.vector[1], -1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(p.largest.vector[0], 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(ExtremeEigenpairs, ThreeNodePath) {
    const ExtremePairs p = extreme_eigenpairs(Graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}));
    EXPECT_NEAR(p.second.value, 1.0, 1e-8);
    EXPECT_NEAR(p.largest.value, 3.0, 1e-8);
}

TEST(ExtremeEigenpairs, MatchesDenseOracleWithContract) {
    Rng rng(61);
    for (int t = 0; t < 40; ++t) {
        const Index n = 2 + rng.below(60);
        const Graph g = testing::random_graph(rng, n, rng.uniform(0.02, 0.4));
        const auto dense = testing::dense_spectrum(g);
        const ExtremePairs p = extreme_eigenpairs(g);
        const double l2 = dense.values[1];
        const double ln = dense.values[static_cast<Eigen::Index>(n) - 1];
        EXPECT_LT(testing::relative_error(p.second.value, l2), 1e-6) << "n=" << n;
        EXPECT_LT(testing::relative_error(p.largest.value, ln), 1e-6) << "n=" << n;

        for (const EigenPair* pair : {&p.second, &p.largest}) {
            EXPECT_NEAR(pair->vector.norm(), 1.0, 1e-10);
            EXPECT_LT(std::abs(pair->vector.sum()), 1e-8);
            const Vector r = laplacian_matvec(g, pair->vector) - pair->value * pair->vector;
            EXPECT_LE(r.norm(), 1e-8 * p.largest.value);
            EXPECT_NEAR(pair->residual, r.norm(), 1e-12 * (1.0 + p.largest.value));
            expect_first_entry_positive(pair->vector);
        }
        const double max_degree = degree_stats(g).max_weighted_degree;
        EXPECT_GE(p.second.value, 0.0);
        EXPECT_LE(p.second.value, p.largest.value * (1 + 1e-12));
        EXPECT_LE(p.largest.value, 2.0 * max_degree * (1 + 1e-12));
    }
}

TEST(ExtremeEigenpairs, DeterministicForFixedSeed) {
    Rng rng(62);
    const Graph g = testing::random_graph(rng, 150, 0.03);
    const ExtremePairs a = extreme_eigenpairs(g);
    const ExtremePairs b = extreme_eigenpairs(g);
    EXPECT_EQ(a.second.value, b.second.value);
    EXPECT_EQ(a.largest.vector, b.largest.vector);
}

TEST(ExtremeEigenpairs, Errors) {
    EXPECT_THROW(extreme_eigenpairs(Graph(1, {})), Error);
    try {
        extreme_eigenpairs(Graph(4, {{0, 1, 1.0}, {2, 3, 1.0}}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DisconnectedGraph);
    }
    try {
        extreme_eigenpairs(Graph(3, {}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DisconnectedGraph);
    }
    Rng rng(63);
    const Graph g = testing::random_graph(rng, 300, 0.01);
    EigenConfig starved;
    starved.max_iter = 3;
    starved.basis_size = 2;
    try {
        extreme_eigenpairs(g, starved);
        FAIL();
    } catch (const ConvergenceError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Convergence);
        EXPECT_GT(e.residual(), 0.0);
    }
}

TEST(SpectralEnergies, Examples) {
    const Graph g(3, {{0, 1, 1.0}, {1, 2, 1.0}});
    const ExtremePairs p = extreme_eigenpairs(g);
    const SpectralEnergies unit = spectral_energies(p.second.vector, p.second.vector, p.largest.vector, 0.0);
    EXPECT_NEAR(unit.alpha2_sq, 1.0, 1e-12);
    EXPECT_EQ(unit.alphaN_sq, unit.floor);
    EXPECT_DOUBLE_EQ(unit.floor, 1e-12 * p.second.vector.squaredNorm());

    // The constant vector is orthogonal to both eigenvectors.
    const SpectralEnergies flat = spectral_energies(Vector::Ones(3), p.second.vector, p.largest.vector, 0.0);
    EXPECT_EQ(flat.alphaN_sq, flat.floor);
    EXPECT_DOUBLE_EQ(flat.floor, 3e-12);

    const SpectralEnergies zero = spectral_energies(Vector::Zero(3), p.second.vector, p.largest.vector, 0.0);
    EXPECT_GT(zero.floor, 0.0);
}

TEST(SpectralEnergies, RawVersusDebiasedAndSignInvariance) {
    Rng rng(64);
    const Graph g = testing::random_graph(rng, 20, 0.2);
    const ExtremePairs p = extreme_eigenpairs(g);
    const Vector y = testing::random_vector(rng, 20) + 4.0 * p.second.vector;
    const SpectralEnergies raw = spectral_energies(y, p.second.vector, p.largest.vector, 0.5, EnergyEstimator::Raw);
    const SpectralEnergies deb = spectral_energies(y, p.second.vector, p.largest.vector, 0.5);
    EXPECT_NEAR(raw.alpha2_sq - deb.alpha2_sq, 0.5, 1e-12);
    const SpectralEnergies flipped = spectral_energies(y, -p.second.vector, -p.largest.vector, 0.5);
    EXPECT_EQ(flipped.alpha2_sq, deb.alpha2_sq);
    EXPECT_EQ(flipped.alphaN_sq, deb.alphaN_sq);
    EXPECT_THROW(spectral_energies(Vector::Zero(3), p.second.vector, p.largest.vector, 0.0), DimensionError);
}

TEST(SpectralEnergies, DebiasedPlugInIsUnbiasedMonteCarlo) {
    Rng rng(65);
    const Graph g = testing::random_graph(rng, 30, 0.15);
    const ExtremePairs p = extreme_eigenpairs(g);
    const auto dense = testing::dense_spectrum(g);
    Vector truth = 3.0 * p.second.vector + 2.0 * p.largest.vector;
    // Some energy in the middle of the spectrum as well.
    truth += 1.5 * dense.vectors.col(10);
    const double a2 = std::pow(p.second.vector.dot(truth), 2);
    const double an = std::pow(p.largest.vector.dot(truth), 2);
    double sum2 = 0.0;
    double sumn = 0.0;
    constexpr int kTrials = 1000;
    for (int t = 0; t < kTrials; ++t) {
        const Vector y = truth + testing::random_vector(rng, 30);
        const SpectralEnergies e = spectral_energies(y, p.second.vector, p.largest.vector, 1.0);
        sum2 += e.alpha2_sq;
        sumn += e.alphaN_sq;
    }
    EXPECT_LT(std::abs(sum2 / kTrials - a2) / a2, 0.10);
    EXPECT_LT(std::abs(sumn / kTrials - an) / an, 0.10);
}

TEST(SpectralJson, Fields) {
    const ExtremePairs p = extreme_eigenpairs(Graph(2, {{0, 1, 1.0}}));
    const SpectralSummary s = summarize(p, SpectralEnergies{0.25, 0.5, 1e-12});
    const auto j = nlohmann::json::parse(spectral_to_json(s, true));
    EXPECT_NEAR(j["lambda2"].get<double>(), 2.0, 1e-12);
    EXPECT_EQ(j["alphaN_sq"].get<double>(), 0.5);
    EXPECT_EQ(j["v2"].size(), 2u);
    EXPECT_FALSE(nlohmann::json::parse(spectral_to_json(s)).contains("v2"));
}

}  // namespace
}  // namespace gsd
