#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>

#include "edspin/errors.hpp"
#include "edspin/models.hpp"
#include "edspin/units.hpp"

using namespace edspin;

namespace {

// Workspace construction costs a few seconds; share it across test cases.
const SpinmerismWorkspace& workspace() {
    static SpinmerismWorkspace ws;
    return ws;
}

Eigen::VectorXd full_eigenvalues(const SectorBasis& basis, const IntegralSet& ints) {
    const auto h = build_hamiltonian(basis, ints);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(h.mat));
    return es.eigenvalues();
}

} // namespace

TEST_CASE("sector dimension of the eight-electron seven-orbital model") {
    CHECK(build_sector_basis(spinmerism_sector()).size() == 1225);
}

TEST_CASE("decoupled limit: total spectrum is the direct sum of fragments") {
    SpinmerismParams p = SpinmerismParams::defaults();
    p.t_ml_cm1 = 0.0;
    p.k_ml_cm1 = 0.0;
    const IntegralSet ints = build_spinmerism(p);

    // Metal-only and ligand-only integral sets.
    IntegralSet d_ints(5);
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b <= a; ++b) d_ints.set_one(a, b, ints.one(a, b));
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b <= a; ++b)
            for (int c = 0; c < 5; ++c)
                for (int d = 0; d <= c; ++d) {
                    if (a * 5 + b < c * 5 + d) continue;
                    d_ints.set_two(a, b, c, d, ints.two(a, b, c, d));
                }
    IntegralSet l_ints(2);
    l_ints.set_one(0, 0, ints.one(5, 5));
    l_ints.set_one(1, 1, ints.one(6, 6));
    l_ints.set_two(0, 0, 0, 0, ints.two(5, 5, 5, 5));
    l_ints.set_two(1, 1, 1, 1, ints.two(6, 6, 6, 6));
    l_ints.set_two(0, 1, 1, 0, ints.two(5, 6, 6, 5));

    // Every (n_d, n_L) split of 8 electrons over Sz combinations.
    std::vector<double> composed;
    for (int nl = 0; nl <= 4; ++nl) {
        const int nd = 8 - nl;
        if (nd > 10) continue;
        for (int nla = std::max(0, nl - 2); nla <= std::min(2, nl); ++nla) {
            const int nlb = nl - nla;
            const int nda = 4 - nla;
            const int ndb = 4 - nlb;
            if (nda < 0 || nda > 5 || ndb < 0 || ndb > 5) continue;
            const auto ed = full_eigenvalues(build_sector_basis({5, nda, ndb}), d_ints);
            const auto el = full_eigenvalues(build_sector_basis({2, nla, nlb}), l_ints);
            for (std::int64_t i = 0; i < ed.size(); ++i)
                for (std::int64_t j = 0; j < el.size(); ++j) composed.push_back(ed[i] + el[j]);
        }
    }
    std::sort(composed.begin(), composed.end());

    const auto full = full_eigenvalues(build_sector_basis(spinmerism_sector()), ints);
    REQUIRE(static_cast<std::size_t>(full.size()) == composed.size());
    for (std::int64_t i = 0; i < full.size(); ++i)
        CHECK(full[i] == doctest::Approx(composed[static_cast<std::size_t>(i)])
                             .epsilon(1e-10)
                             .scale(1.0));
}

TEST_CASE("forced low-spin metal with ligand exchange: gap is exactly 2 K_LL") {
    SpinmerismParams p = SpinmerismParams::defaults();
    p.t_ml_cm1 = 0.0;
    p.k_ml_cm1 = 0.0;
    p.k_ll_cm1 = 60.0;
    p.dq_cm1 = 4000.0; // deep low-spin regime
    const IntegralSet ints = build_spinmerism(p);
    const auto& ws = workspace();
    const auto h = build_hamiltonian(ws.blocks.basis(), ints);

    const double e_triplet = ws.blocks.solve_spin_block(h, 1.0, 1).values[0];
    const double e_singlet = ws.blocks.solve_spin_block(h, 0.0, 1).values[0];
    CHECK(hartree_to_cm1(e_singlet - e_triplet) == doctest::Approx(120.0).epsilon(1e-9));
}

TEST_CASE("spin block solver agrees with the dense solver") {
    SpinmerismParams p = SpinmerismParams::defaults();
    p.t_ml_cm1 = 950.0; // hopping on: full machinery, no charge conservation
    const IntegralSet ints = build_spinmerism(p);
    const auto& ws = workspace();
    const auto h = build_hamiltonian(ws.blocks.basis(), ints);

    const auto merged = ws.blocks.solve_lowest(h, 12);
    const auto dense = diagonalize(h, 12);
    for (int i = 0; i < 12; ++i)
        CHECK(merged.values[i] == doctest::Approx(dense.values[i]).epsilon(1e-11));
}

TEST_CASE("default regime: low-spin ground state, quintet pair above") {
    const auto& ws = workspace();
    const IntegralSet ints = build_spinmerism(SpinmerismParams::defaults());
    const auto h = build_hamiltonian(ws.blocks.basis(), ints);
    const auto low = ws.blocks.solve_lowest(h, 8);

    // Radical-pair triplet ground state, singlet nearby: both metal-singlet.
    CHECK(low.labels[0].multiplicity == 3);
    const auto jw0 = joint_decompose(low.vectors.col(0), ws.metal, ws.ligand);
    CHECK(jw0.weight_of(0.0, 1.0) > 0.9);

    // The two lowest quintets land in the few-thousand-wavenumber window.
    const auto quintets = ws.blocks.solve_spin_block(h, 2.0, 2);
    const double q1 = hartree_to_cm1(quintets.values[0] - low.values[0]);
    const double q2 = hartree_to_cm1(quintets.values[1] - low.values[0]);
    CHECK(q1 > 500.0);
    CHECK(q2 < 20000.0);
    CHECK(q1 < q2);
}

TEST_CASE("heptuplet purity in the charge-conserving model") {
    SpinmerismParams p = SpinmerismParams::defaults();
    p.t_ml_cm1 = 0.0;
    const auto& ws = workspace();
    const auto h = build_hamiltonian(ws.blocks.basis(), build_spinmerism(p));
    const auto septets = ws.blocks.solve_spin_block(h, 3.0, -1);
    REQUIRE(septets.size() == 7);

    int nominal = 0, transfer = 0;
    for (std::int64_t i = 0; i < septets.size(); ++i) {
        const auto jw = joint_decompose(septets.vectors.col(i), ws.metal, ws.ligand);
        CHECK(jw.total() == doctest::Approx(1.0).epsilon(1e-10));
        const double ct = jw.charge_transfer_weight(nominal_metal_electrons);
        if (ct < 0.5) {
            // Nominal d6 L2 heptuplet: pure (S_Fe=2, S_L=1).
            CHECK(jw.weight_of(2.0, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(ct == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
            ++nominal;
        } else {
            // d5 L3 charge-transfer heptuplet: pure (S_Fe=5/2, S_L=1/2).
            CHECK(jw.weight_of(2.5, 0.5) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(ct == doctest::Approx(1.0).epsilon(1e-10));
            ++transfer;
        }
    }
    CHECK(nominal == 5);
    CHECK(transfer == 2);

    // The physically relevant (lowest) heptuplet is the nominal pure one.
    const auto jw_low = joint_decompose(septets.vectors.col(0), ws.metal, ws.ligand);
    CHECK(jw_low.weight_of(2.0, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sweep over Dq crosses exactly at zero coupling and avoids with K_ML") {
    const auto& ws = workspace();

    SpinmerismParams p = SpinmerismParams::defaults();
    p.t_ml_cm1 = 0.0;
    p.k_ml_cm1 = 0.0;
    auto sweep = sweep_spinmerism(p, SweepParameter::dq, 2000.0, 3400.0, 15, ws);
    CHECK(sweep.min_gap_cm1 < 60.0); // grid point near the exact crossing

    p.k_ml_cm1 = 300.0;
    auto avoided = sweep_spinmerism(p, SweepParameter::dq, 2000.0, 3400.0, 15, ws);
    CHECK(avoided.min_gap_cm1 > 1.0);
    CHECK(avoided.weight_exchange_value.has_value());
}

TEST_CASE("heisenberg dimer spec values") {
    {
        const auto basis = build_sector_basis({2, 1, 1});
        const auto h = build_hamiltonian(basis, build_heisenberg_dimer(60.0));
        const auto s2 = build_total_s2(basis);
        const auto spec = assign_spin(diagonalize(h), s2, default_spin_tol,
                                      default_degeneracy_tol, 0.0);
        CHECK(spec.labels[0].multiplicity == 3);
        CHECK(spec.labels[1].multiplicity == 1);
        CHECK(hartree_to_cm1(spec.values[1] - spec.values[0]) ==
              doctest::Approx(120.0).epsilon(1e-10));
        const auto fit = fit_heisenberg(spec);
        CHECK(fit.j_cm1 == doctest::Approx(60.0).epsilon(1e-10));
        CHECK(fit.residual_cm1 < 1e-9);
    }
    {
        // J = 0: singlet and triplet degenerate.
        const auto basis = build_sector_basis({2, 1, 1});
        const auto h = build_hamiltonian(basis, build_heisenberg_dimer(0.0));
        const auto spec = diagonalize(h);
        CHECK(hartree_to_cm1(spec.values[1] - spec.values[0]) ==
              doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    }
    {
        // Antiferromagnetic sign convention: singlet ground, gap 100.
        const auto basis = build_sector_basis({2, 1, 1});
        const auto h = build_hamiltonian(basis, build_heisenberg_dimer(-50.0));
        const auto s2 = build_total_s2(basis);
        const auto spec = assign_spin(diagonalize(h), s2, default_spin_tol,
                                      default_degeneracy_tol, 0.0);
        CHECK(spec.labels[0].multiplicity == 1);
        CHECK(hartree_to_cm1(spec.values[1] - spec.values[0]) ==
              doctest::Approx(100.0).epsilon(1e-10));
        CHECK(fit_heisenberg(spec).j_cm1 == doctest::Approx(-50.0).epsilon(1e-10));
    }
}

TEST_CASE("heisenberg round trip across the J range") {
    const auto basis = build_sector_basis({2, 1, 1});
    const auto s2 = build_total_s2(basis);
    for (double j : {-100.0, -1.0, 0.95, 60.0, 100.0}) {
        const auto h = build_hamiltonian(basis, build_heisenberg_dimer(j));
        const auto spec = assign_spin(diagonalize(h), s2, default_spin_tol,
                                      default_degeneracy_tol, 0.0);
        const auto fit = fit_heisenberg(spec);
        CHECK(std::abs(fit.j_cm1 - j) < 1e-10);
    }
}

TEST_CASE("fit_heisenberg input validation") {
    Spectrum unlabeled;
    unlabeled.values.resize(2);
    unlabeled.values << 0.0, 1.0;
    unlabeled.vectors = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(fit_heisenberg(unlabeled), ParameterError);
}
