#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "edspin/eigensolve.hpp"
#include "edspin/errors.hpp"
#include "edspin/secondq.hpp"
#include "edspin/units.hpp"

using namespace edspin;

namespace {

OperatorMatrix from_dense(const Eigen::MatrixXd& m) {
    OperatorMatrix op;
    op.mat = m.sparseView(1.0, 0.0);
    return op;
}

OperatorMatrix random_sparse_symmetric(std::int64_t n, double fill, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    std::vector<Eigen::Triplet<double>> trips;
    for (std::int64_t i = 0; i < n; ++i) {
        trips.emplace_back(i, i, uni(rng));
        for (std::int64_t j = i + 1; j < n; ++j) {
            if (pick(rng) > fill) continue;
            const double v = uni(rng);
            trips.emplace_back(i, j, v);
            trips.emplace_back(j, i, v);
        }
    }
    OperatorMatrix op;
    op.mat = SparseMat(n, n);
    op.mat.setFromTriplets(trips.begin(), trips.end());
    return op;
}

} // namespace

TEST_CASE("scaled identity and explicit diagonal") {
    const auto id = from_dense(1.5 * Eigen::MatrixXd::Identity(5, 5));
    const auto s = diagonalize(id, 3);
    REQUIRE(s.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(s.values[i] == doctest::Approx(1.5).epsilon(1e-14));

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    d(2, 2) = 2.0;
    const auto sd = diagonalize(from_dense(d));
    CHECK(sd.values[0] == doctest::Approx(1.0));
    CHECK(sd.values[1] == doctest::Approx(2.0));
    CHECK(sd.values[2] == doctest::Approx(3.0));
}

TEST_CASE("hubbard dimer spectrum through the solver") {
    IntegralSet ints(2);
    const double u = 4.0, t = 1.0;
    ints.set_one(0, 1, -t);
    ints.set_two(0, 0, 0, 0, u);
    ints.set_two(1, 1, 1, 1, u);
    const auto basis = build_sector_basis({2, 1, 1});
    const auto s = diagonalize(build_hamiltonian(basis, ints));
    const double root = std::sqrt(u * u + 16.0 * t * t);
    CHECK(s.values[0] == doctest::Approx(0.5 * (u - root)).epsilon(1e-12));
    CHECK(s.values[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(s.values[2] == doctest::Approx(u).epsilon(1e-12));
    CHECK(s.values[3] == doctest::Approx(0.5 * (u + root)).epsilon(1e-12));
}

TEST_CASE("group_degenerate") {
    Eigen::VectorXd v(3);
    v << 0.0, 1e-12, 5.0;
    auto groups = group_degenerate(v, 1e-9);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0] == std::vector<int>{0, 1});
    CHECK(groups[1] == std::vector<int>{2});

    Eigen::VectorXd same = Eigen::VectorXd::Constant(4, 2.5);
    CHECK(group_degenerate(same, 1e-9).size() == 1);

    Eigen::VectorXd spaced(4);
    spaced << 0.0, 1.0, 2.0, 3.0;
    CHECK(group_degenerate(spaced, 0.5).size() == 4);
}

TEST_CASE("dense and lanczos paths agree on lowest eigenvalues") {
    for (std::int64_t n : {60, 300, 900}) {
        const auto op = random_sparse_symmetric(n, 0.02, 42 + static_cast<std::uint64_t>(n));
        const auto dense = diagonalize(op, 5);
        const auto lanczos = diagonalize_lanczos(op, 5);
        for (int i = 0; i < 5; ++i)
            CHECK(std::abs(dense.values[i] - lanczos.values[i]) < 1e-9);
    }
}

TEST_CASE("lanczos resolves degenerate lowest eigenvalues") {
    // Two exactly degenerate planted ground states.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(200, 200);
    for (int i = 0; i < 200; ++i) m(i, i) = 1.0 + 0.01 * i;
    m(0, 0) = m(1, 1) = -2.0;
    const auto s = diagonalize_lanczos(from_dense(m), 3);
    CHECK(s.values[0] == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(s.values[1] == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(s.values[2] == doctest::Approx(1.02).epsilon(1e-10));
}

TEST_CASE("lanczos failure is explicit") {
    const auto op = random_sparse_symmetric(400, 0.05, 7);
    DiagonalizeOptions opts;
    opts.max_matvecs = 3; // absurdly small budget
    CHECK_THROWS_AS(diagonalize_lanczos(op, 5, opts), SolverError);
}

TEST_CASE("assign_spin labels eigenstates and respects degenerate groups") {
    // Heisenberg-like dimer: direct exchange splits singlet and triplet.
    IntegralSet ints(2);
    const double k = cm1_to_hartree(60.0);
    ints.set_two(0, 1, 1, 0, k);
    ints.set_two(0, 0, 0, 0, 1e6 / cm1_per_hartree);
    ints.set_two(1, 1, 1, 1, 1e6 / cm1_per_hartree);
    const auto basis = build_sector_basis({2, 1, 1});
    const auto h = build_hamiltonian(basis, ints);
    const auto s2 = build_total_s2(basis);
    const auto spec = assign_spin(diagonalize(h), s2, default_spin_tol, default_degeneracy_tol, 0.0);

    REQUIRE(spec.labels.size() == 4);
    CHECK(spec.labels[0].multiplicity == 3); // ferromagnetic: triplet below singlet
    CHECK(spec.labels[1].multiplicity == 1);
    for (const auto& lab : spec.labels) {
        CHECK(lab.s >= 0.0);
        CHECK(lab.s >= std::abs(*lab.sz) - 1e-12);
    }
}

TEST_CASE("assign_spin re-diagonalizes mixed degenerate subspaces") {
    // S^2 on the two-orbital Sz=0 sector has a 3-fold singlet block and one
    // triplet; an artificial Hamiltonian makes all four states degenerate so
    // the solver returns arbitrary mixtures.
    const auto basis = build_sector_basis({2, 1, 1});
    const auto s2 = build_total_s2(basis);
    const auto h = from_dense(Eigen::MatrixXd::Zero(4, 4));
    auto spec = diagonalize(h);
    spec = assign_spin(spec, s2);
    int triplets = 0, singlets = 0;
    double energy_sum = 0.0;
    for (const auto& lab : spec.labels) {
        if (lab.multiplicity == 3) ++triplets;
        if (lab.multiplicity == 1) ++singlets;
    }
    for (int i = 0; i < 4; ++i) energy_sum += spec.values[i];
    CHECK(triplets == 1);
    CHECK(singlets == 3);
    CHECK(energy_sum == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("assign_spin rejects an operator that does not commute") {
    const auto basis = build_sector_basis({2, 1, 1});
    const auto s2 = build_total_s2(basis);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(4, 4);
    bad(0, 0) = 1.0; // breaks spin symmetry: energy distinguishes up/down pattern
    bad(1, 1) = 2.0;
    bad(2, 2) = 3.0;
    bad(3, 3) = 4.0;
    const auto spec = diagonalize(from_dense(bad));
    CHECK_THROWS_AS(assign_spin(spec, s2), LabelingError);
}

TEST_CASE("degenerate group energies survive relabeling") {
    const auto basis = build_sector_basis({3, 2, 1});
    IntegralSet ints(3);
    ints.set_two(0, 1, 1, 0, 0.01);
    ints.set_two(0, 2, 2, 0, 0.01);
    ints.set_two(1, 2, 2, 1, 0.01);
    const auto h = build_hamiltonian(basis, ints);
    const auto s2 = build_total_s2(basis);
    const auto plain = diagonalize(h);
    const auto labeled = assign_spin(plain, s2, default_spin_tol, default_degeneracy_tol, 0.5);

    const auto groups = group_degenerate(plain.values, default_degeneracy_tol);
    for (const auto& g : groups) {
        double before = 0.0, after = 0.0;
        for (int idx : g) {
            before += plain.values[idx];
            Eigen::VectorXd v = labeled.vectors.col(idx);
            after += v.dot(h.mat * v);
        }
        CHECK(before == doctest::Approx(after).epsilon(1e-10));
    }
}
