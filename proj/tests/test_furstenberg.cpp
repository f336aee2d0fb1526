// Copyright 2026 The andloc Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "andloc/furstenberg.hpp"

using namespace andloc;

namespace {

SymmetricMatrix random_symmetric(RandomStream& rng, Index n, double amp = 1.0) {
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.uniform(-amp, amp);
    return SymmetricMatrix(m);
}

ModelParams model(const SymmetricMatrix& v, double ell = 0.1) {
    return ModelParams::make(v, std::vector<double>(v.order(), 1.0), ell);
}

// Independent closure oracle: work on full 2N x 2N matrices, take every
// pairwise bracket of the current spanning set, and read the dimension off the
// numerical rank of the stacked flattened matrices.
Index oracle_closure_dim(const std::vector<Matrix>& gens) {
    auto rank_of = [](const std::vector<Matrix>& ms) {
        const Index len = ms.front().size();
        Matrix stack(len, static_cast<Index>(ms.size()));
        for (std::size_t k = 0; k < ms.size(); ++k)
            stack.col(static_cast<Index>(k)) = Eigen::Map<const Vector>(ms[k].data(), len) / ms[k].norm();
        Eigen::JacobiSVD<Matrix> svd(stack);
        const auto& s = svd.singularValues();
        Index r = 0;
        for (Index i = 0; i < s.size(); ++i)
            if (s[i] > 1e-9 * s[0]) ++r;
        return r;
    };
    auto basis_of = [](const std::vector<Matrix>& ms) {
        const Index len = ms.front().size();
        Matrix stack(len, static_cast<Index>(ms.size()));
        for (std::size_t k = 0; k < ms.size(); ++k)
            stack.col(static_cast<Index>(k)) = Eigen::Map<const Vector>(ms[k].data(), len) / ms[k].norm();
        Eigen::JacobiSVD<Matrix> svd(stack, Eigen::ComputeThinU);
        const auto& s = svd.singularValues();
        std::vector<Matrix> out;
        const Index side = ms.front().rows();
        for (Index i = 0; i < s.size(); ++i) {
            if (s[i] > 1e-9 * s[0]) out.push_back(Eigen::Map<const Matrix>(svd.matrixU().col(i).data(), side, side));
        }
        return out;
    };
    std::vector<Matrix> span = basis_of(gens);
    for (;;) {
        std::vector<Matrix> next = span;
        for (std::size_t i = 0; i < span.size(); ++i)
            for (std::size_t j = i + 1; j < span.size(); ++j) {
                Matrix br = span[i] * span[j] - span[j] * span[i];
                if (br.norm() > 1e-8) next.push_back(br);
            }
        const Index r = rank_of(next);
        if (r == static_cast<Index>(span.size())) return r;
        span = basis_of(next);
    }
}

std::vector<Matrix> as_matrices(const std::vector<SpElement>& g) {
    std::vector<Matrix> out;
    for (const auto& x : g) out.push_back(x.matrix());
    return out;
}

}  // namespace

TEST(LieClosure, SingleGeneratorSpansALine) {
    const auto g = generator(model(SymmetricMatrix::identity(2)), {{0.0, 0.0}}, 0.3);
    const std::vector<SpElement> gens{g};
    const auto rep = lie_closure(gens);
    EXPECT_EQ(rep.dim_reached, 1);
    EXPECT_EQ(rep.target_dim, 10);
    EXPECT_FALSE(rep.full());
}

TEST(LieClosure, ScalarCaseIsFull) {
    const auto p = model(SymmetricMatrix::zero(1));
    for (double e : {-3.0, 0.0, 0.5, 2.0}) {
        const auto rep = lie_closure(binary_generators(p, e));
        EXPECT_EQ(rep.dim_reached, 3) << e;
    }
}

TEST(LieClosure, WitnessIsFullAtGenericEnergies) {
    const auto p2 = model(witness_V0(2));
    EXPECT_EQ(lie_closure(binary_generators(p2, 0.37)).dim_reached, 10);
    const auto p3 = model(witness_V0(3));
    EXPECT_EQ(lie_closure(binary_generators(p3, 0.37)).dim_reached, 21);
}

TEST(LieClosure, DecoupledChannelsStayDeficient) {
    // V = 0 splits into two scalar problems: sp_1 + sp_1 has dimension 6.
    const auto p = model(SymmetricMatrix::zero(2));
    for (double e : {-1.0, 0.2, 3.0}) {
        const auto rep = lie_closure(binary_generators(p, e));
        EXPECT_EQ(rep.dim_reached, 6) << e;
        EXPECT_FALSE(rep.depth_exceeded);
    }
}

TEST(LieClosure, MatchesRankOracle) {
    RandomStream rng(11);
    for (int k = 0; k < 12; ++k) {
        const Index n = 1 + k % 3;
        auto p = model(random_symmetric(rng, n));
        if (k % 4 == 3) p = model(SymmetricMatrix(Matrix(random_symmetric(rng, n).matrix().diagonal().asDiagonal())));
        const double e = rng.uniform(-2, 2);
        const auto gens = binary_generators(p, e);
        EXPECT_EQ(lie_closure(gens).dim_reached, oracle_closure_dim(as_matrices(gens))) << k;
    }
}

TEST(LieClosure, BasisIsOrthonormal) {
    const auto rep = lie_closure(binary_generators(model(witness_V0(2)), 0.1));
    for (std::size_t i = 0; i < rep.basis.size(); ++i)
        for (std::size_t j = 0; j < rep.basis.size(); ++j)
            EXPECT_NEAR(rep.basis[i].dot(rep.basis[j]), i == j ? 1.0 : 0.0, 1e-12);
}

TEST(LieClosure, InvariantUnderChannelPermutation) {
    RandomStream rng(12);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(3);
    perm.indices() << 1, 2, 0;
    for (int k = 0; k < 5; ++k) {
        const auto v = random_symmetric(rng, 3);
        const Matrix pv = perm * v.matrix() * perm.transpose();
        const double e = rng.uniform(-1, 1);
        EXPECT_EQ(lie_closure(binary_generators(model(v), e)).dim_reached,
                  lie_closure(binary_generators(model(SymmetricMatrix(pv)), e)).dim_reached);
    }
    // Also for the deficient diagonal case.
    const SymmetricMatrix d(Matrix(Vector::LinSpaced(3, 0.1, 0.7).asDiagonal()));
    const Matrix pd = perm * d.matrix() * perm.transpose();
    EXPECT_EQ(lie_closure(binary_generators(model(d), 0.2)).dim_reached,
              lie_closure(binary_generators(model(SymmetricMatrix(pd)), 0.2)).dim_reached);
}

TEST(LieClosure, InvariantUnderGeneratorScaling) {
    for (const auto& v : {witness_V0(2), SymmetricMatrix::zero(2)}) {
        auto gens = binary_generators(model(v), 0.4);
        const auto base = lie_closure(gens).dim_reached;
        const double scales[] = {1e-3, 7.0, -2.0, 0.5};
        for (std::size_t i = 0; i < gens.size(); ++i) gens[i] = scales[i] * gens[i];
        EXPECT_EQ(lie_closure(gens).dim_reached, base);
    }
}

TEST(LieClosure, InvariantUnderSymplecticConjugation) {
    RandomStream rng(13);
    for (const auto& v : {witness_V0(2), SymmetricMatrix::zero(2)}) {
        const auto gens = binary_generators(model(v), -0.3);
        const auto base = lie_closure(gens).dim_reached;
        // S = exp(Y) for a random Hamiltonian Y of modest norm.
        Matrix a(2, 2), b(2, 2), c(2, 2);
        for (Index i = 0; i < 4; ++i) {
            a.data()[i] = rng.uniform(-0.5, 0.5);
            b.data()[i] = rng.uniform(-0.5, 0.5);
            c.data()[i] = rng.uniform(-0.5, 0.5);
        }
        const Matrix s = exp_matrix(SpElement(a, b, c).matrix());
        const Matrix sinv = s.inverse();
        std::vector<SpElement> conj;
        for (const auto& g : gens) conj.push_back(SpElement::from_matrix(s * g.matrix() * sinv));
        EXPECT_EQ(lie_closure(conj).dim_reached, base);
    }
}

TEST(LieClosure, MonotoneInGeneratorSet) {
    RandomStream rng(14);
    auto gens = binary_generators(model(SymmetricMatrix(Matrix(Vector::LinSpaced(2, 0.0, 1.0).asDiagonal()))), 0.3);
    const auto base = lie_closure(gens).dim_reached;
    Matrix a(2, 2), b(2, 2), c(2, 2);
    for (Index i = 0; i < 4; ++i) {
        a.data()[i] = rng.uniform(-1, 1);
        b.data()[i] = rng.uniform(-1, 1);
        c.data()[i] = rng.uniform(-1, 1);
    }
    gens.emplace_back(a, b, c);
    EXPECT_GE(lie_closure(gens).dim_reached, base);
    EXPECT_EQ(lie_closure(gens).dim_reached, 10);
}

TEST(LieClosure, Errors) {
    EXPECT_THROW(lie_closure(std::vector<SpElement>{}), InvalidArgument);
    const std::vector<SpElement> mixed{SpElement::zero(1), SpElement::zero(2)};
    EXPECT_THROW(lie_closure(mixed), DimensionError);
    const std::vector<SpElement> one{SpElement::zero(1)};
    EXPECT_THROW(lie_closure(one, 0.0), InvalidArgument);
}

TEST(LieClosure, DepthLimitIsFlagged) {
    const auto gens = binary_generators(model(witness_V0(3)), 0.37);
    const auto rep = lie_closure(gens, kDefaultClosureTol, 1);
    EXPECT_EQ(rep.depth_used, 1);
    EXPECT_TRUE(rep.depth_exceeded);
    EXPECT_LT(rep.dim_reached, 21);
}

TEST(DensityCertificate, Examples) {
    const auto p = model(SymmetricMatrix::zero(1));
    const auto cert = density_certificate(p, 0.0);
    EXPECT_TRUE(cert.norm_condition);
    EXPECT_TRUE(cert.closure_full);
    EXPECT_TRUE(cert.certified);
    EXPECT_EQ(cert.closure_dim, 3);
    ASSERT_EQ(cert.per_config_norms.size(), 2u);
    EXPECT_DOUBLE_EQ(cert.per_config_norms[0], 1.0);
    EXPECT_DOUBLE_EQ(cert.per_config_norms[1], 1.0);

    // Far outside the interval the norm condition fails.
    const auto far = density_certificate(p, 100.0);
    EXPECT_FALSE(far.norm_condition);
    EXPECT_TRUE(far.closure_full);
    EXPECT_FALSE(far.certified);

    const auto dec = density_certificate(model(SymmetricMatrix::zero(2)), 0.0);
    EXPECT_TRUE(dec.norm_condition);
    EXPECT_FALSE(dec.closure_full);
    EXPECT_EQ(dec.closure_dim, 6);
}

TEST(DensityCertificate, WitnessHoldsAcrossInterval) {
    const auto p = model(witness_V0(2));
    const auto iv = energy_interval(p);
    for (int k = 0; k <= 10; ++k) {
        const double e = iv.lo + iv.length() * (k + 0.123) / 10.3;
        EXPECT_TRUE(density_certificate(p, e).certified) << e;
    }
}

TEST(WitnessV0, Shape) {
    EXPECT_EQ(witness_V0(1).matrix(), Matrix::Zero(1, 1));
    Matrix want(3, 3);
    want << 0, 1, 0, 1, 0, 1, 0, 1, 0;
    EXPECT_EQ(witness_V0(3).matrix(), want);
    EXPECT_THROW(witness_V0(0), InvalidArgument);
}

TEST(ScanGrid, IncludesEndpoints) {
    const auto g = scan_grid({0.0, 1.0}, 0.3);
    ASSERT_EQ(g.size(), 5u);
    EXPECT_DOUBLE_EQ(g[3], 0.9);
    EXPECT_EQ(g.back(), 1.0);
    EXPECT_EQ(scan_grid({0.0, 1.0}, 0.25).size(), 5u);
}

TEST(LocateDeficientRuns, SyntheticIndicator) {
    // Deficient exactly on [0.3137, 0.3137] (a point) and on [0.71, 0.74].
    auto bad = [](double e) { return std::abs(e - 0.3137) < 1e-15 || (e >= 0.71 && e <= 0.74); };
    const auto grid = scan_grid({0.0, 1.0}, 0.01);
    std::vector<char> def(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) def[i] = bad(grid[i]);
    bool all = true;
    const auto runs = locate_deficient_runs(grid, def, 50, bad, all);
    EXPECT_FALSE(all);
    ASSERT_EQ(runs.size(), 1u);  // the isolated point is between grid nodes
    EXPECT_NEAR(runs[0].lo, 0.71, 1e-12);
    EXPECT_NEAR(runs[0].hi, 0.74, 1e-12);
}

TEST(LocateDeficientRuns, EdgesAndAllDeficient) {
    const std::vector<double> grid{0.0, 0.5, 1.0};
    bool all = false;
    auto always = [](double) { return true; };
    EXPECT_TRUE(locate_deficient_runs(grid, {1, 1, 1}, 10, always, all).empty());
    EXPECT_TRUE(all);
    auto left = [](double e) { return e < 0.2; };
    const auto runs = locate_deficient_runs(grid, {1, 0, 0}, 40, left, all);
    EXPECT_FALSE(all);
    ASSERT_EQ(runs.size(), 1u);
    EXPECT_EQ(runs[0].lo, 0.0);
    EXPECT_NEAR(runs[0].hi, 0.2, 1e-9);
}

TEST(CriticalScan, ScalarCaseHasNone) {
    const auto set = scan_critical_energies(model(SymmetricMatrix::zero(1)), 0.5);
    EXPECT_TRUE(set.energies.empty());
    EXPECT_FALSE(set.non_generic_flag);
    EXPECT_EQ(set.target_dim, 3);
}

TEST(CriticalScan, WitnessHasNone) {
    const auto set = scan_critical_energies(model(witness_V0(2)), 0.25);
    EXPECT_TRUE(set.energies.empty());
    EXPECT_FALSE(set.non_generic_flag);
}

TEST(CriticalScan, ZeroCouplingIsNonGeneric) {
    const auto set = scan_critical_energies(model(SymmetricMatrix::zero(2)), 0.5);
    EXPECT_TRUE(set.non_generic_flag);
    EXPECT_TRUE(set.energies.empty());
}

TEST(CriticalScan, RandomCouplingIsGeneric) {
    RandomStream rng(15);
    for (int k = 0; k < 3; ++k) {
        const auto set = scan_critical_energies(model(random_symmetric(rng, 2)), 0.5);
        EXPECT_FALSE(set.non_generic_flag);
    }
}

TEST(CriticalScan, EmptyIntervalThrows) {
    EXPECT_THROW(scan_critical_energies(model(witness_V0(2), 0.9), 0.1), ScanRangeError);
    EXPECT_THROW(scan_critical_energies(model(witness_V0(2)), 0.0), InvalidArgument);
}
