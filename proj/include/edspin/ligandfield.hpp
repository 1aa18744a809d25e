#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edspin/secondq.hpp"

namespace edspin {

// d-shell electron repulsion parameters. A shifts every pair energy
// uniformly; B and C set the term structure.
struct RacahParameters {
    double b_cm1 = 0.0;
    double c_cm1 = 0.0;
    double a_cm1 = 0.0;

    // Conventional Fe(II)-like defaults; the diagram checks built on these
    // are qualitative (crossing existence and ordering), never numeric.
    static RacahParameters fe2_defaults() { return {917.0, 4.5 * 917.0, 0.0}; }
};

// Octahedral field: e_g at +6Dq, t_2g at -4Dq (trace-free).
struct CrystalField {
    double dq_cm1 = 0.0;
};

// Real d-orbital order used throughout: dz2, dx2-y2, dxy, dxz, dyz.
inline constexpr int d_norb = 5;
inline constexpr int eg_orbitals[2] = {0, 1};
inline constexpr int t2g_orbitals[3] = {2, 3, 4};

// Wigner 3j symbol for integer angular momenta.
double wigner3j(int j1, int j2, int j3, int m1, int m2, int m3);

// Condon-Shortley coefficient c^k(l=2 m; l=2 m') from exact 3j evaluation.
double condon_shortley_ck(int k, int m, int mprime);

// Slater radial integrals from Racah parameters (same unit as inputs):
// F0 = A + 7C/5, F2 = 49B + 7C, F4 = 63C/5.
struct SlaterRadial {
    double f0, f2, f4;
};
SlaterRadial slater_from_racah(const RacahParameters& rp);

// Two-body Coulomb tensor among the five real d orbitals (hartree), built
// from l=2 Gaunt coefficients in the complex |m> basis and the fixed
// unitary transform to real cubic harmonics.
IntegralSet d_coulomb_integrals(const RacahParameters& rp);

// Diagonal one-body crystal-field integrals (hartree).
IntegralSet crystal_field_oh(const CrystalField& cf);

// Coulomb plus crystal field in one set.
IntegralSet d_ion_integrals(const RacahParameters& rp, const CrystalField& cf);

// --------------------------- Tanabe-Sugano ---------------------------------

// One term level at one sweep point.
struct TSTerm {
    double energy_eb = 0.0; // (E - E_ground)/B
    int multiplicity = 0;   // 2S+1
    int sector_count = 0;   // members inside the solved Sz sector
    int degeneracy = 0;     // sector_count * multiplicity
};

struct TSPoint {
    double dq_over_b = 0.0;
    std::vector<TSTerm> terms; // ascending energy
};

struct TSCrossing {
    enum class Kind { spin_crossover, excited_crossing };
    Kind kind = Kind::spin_crossover;
    double dq_over_b = 0.0;
    int mult_low = 0;  // ground multiplicity below / first tracked label
    int mult_high = 0; // ground multiplicity above / second tracked label
    double slope_low = 0.0;  // d(E/B)/d(Dq/B) of each curve at the crossing
    double slope_high = 0.0;
};

struct TSCurve {
    int n_electrons = 0;
    RacahParameters rp;
    std::vector<TSPoint> sweep;
    std::vector<TSCrossing> crossings; // ground-state crossovers
    std::vector<std::string> flags;    // tracking ambiguities, never silent
};

struct TSOptions {
    double x_min = 0.0;
    double x_max = 5.0;
    int points = 60;
    double degeneracy_tol = 1e-8; // hartree
};

// Solve the dn ion at one Dq/B value.
TSPoint ts_solve_point(int n_electrons, const RacahParameters& rp, double dq_over_b);

// Full sweep with ground-state crossovers located by bisection.
TSCurve tanabe_sugano(int n_electrons, const RacahParameters& rp, const TSOptions& opts = {});

enum class CrossingQuery { ground, excited };

// Ground mode: Dq/B values where the ground multiplicity changes.
// Excited mode: crossings of the lowest mult_a and mult_b curves in the
// region where both lie strictly above the ground state.
std::vector<TSCrossing> find_crossings(const TSCurve& curve, CrossingQuery query, int mult_a = 0,
                                       int mult_b = 0);

} // namespace edspin
