#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "edspin/fockspace.hpp"

namespace edspin {

using SparseMat = Eigen::SparseMatrix<double>;

// One- and two-body coefficients of an electronic Hamiltonian over `norb`
// spatial orbitals. Two-body values use the chemists' convention (pq|rs)
// and are stored with the full 8-fold permutational symmetry applied.
// Values are unit-agnostic; the toolkit keeps everything in hartree.
class IntegralSet {
public:
    IntegralSet() = default;
    explicit IntegralSet(int norb, double core = 0.0);

    int norb() const { return norb_; }
    double core_energy() const { return core_; }
    void set_core_energy(double e) { core_ = e; }

    double one(int p, int q) const { return h_[idx2(p, q)]; }
    void set_one(int p, int q, double v) {
        h_[idx2(p, q)] = v;
        h_[idx2(q, p)] = v;
    }
    // Accumulating setter used by model builders.
    void add_one(int p, int q, double v) { set_one(p, q, one(p, q) + v); }

    double two(int p, int q, int r, int s) const { return g_[idx4(p, q, r, s)]; }
    void set_two(int p, int q, int r, int s, double v);

    // True when h is symmetric, g has the 8-fold symmetry and all finite.
    void validate() const;

    // Transform to the orbital basis with columns of `rot` expressing the
    // new orbitals in the old ones (rot must be orthogonal).
    IntegralSet rotated(const Eigen::MatrixXd& rot) const;

private:
    int norb_ = 0;
    double core_ = 0.0;
    std::vector<double> h_;
    std::vector<double> g_;

    std::size_t idx2(int p, int q) const {
        return static_cast<std::size_t>(p) * norb_ + q;
    }
    std::size_t idx4(int p, int q, int r, int s) const {
        return ((static_cast<std::size_t>(p) * norb_ + q) * norb_ + r) * norb_ + s;
    }
};

// Sparse symmetric matrix of a second-quantized operator in a sector basis.
struct OperatorMatrix {
    SparseMat mat;

    std::int64_t dim() const { return mat.rows(); }
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return mat * v; }

    // Throws InternalError when |M - M^T| exceeds tol * max(1, |M|_inf).
    void assert_symmetric(double tol = 1e-12) const;
};

// Orbital subset defining a fragment (metal, ligand pair, ...).
struct Fragment {
    std::vector<int> orbitals;

    std::uint32_t mask() const {
        std::uint32_t m = 0;
        for (int p : orbitals) m |= (1u << p);
        return m;
    }
    bool disjoint_with(const Fragment& other) const { return (mask() & other.mask()) == 0; }
};

enum class HamiltonianRoute {
    slater_condon,        // per-pair matrix elements (default)
    operator_composition, // literal products of E_pq matrices (cross-oracle)
};

// H = core + sum h(p,q) E_pq + 1/2 sum (pq|rs) (E_pq E_rs - delta_qr E_ps).
// The composition route is exact only on full sector bases.
OperatorMatrix build_hamiltonian(const SectorBasis& basis, const IntegralSet& ints,
                                 HamiltonianRoute route = HamiltonianRoute::slater_condon);

// Spin-summed excitation operator E_pq restricted to the basis.
OperatorMatrix build_excitation(const SectorBasis& basis, int p, int q);

// Raising operator S+ = sum_{p in frag} a^dag_{p,up} a_{p,down} as a
// rectangular matrix into the closure of its image (a basis of the
// (nalpha+1, nbeta-1) sector restricted to reachable determinants).
struct LadderOperator {
    SectorBasis image;
    SparseMat mat; // image.size() x basis.size()
};
LadderOperator build_ladder_plus(const SectorBasis& basis, const Fragment& frag);
LadderOperator build_ladder_minus(const SectorBasis& basis, const Fragment& frag);

// Diagonal of the fragment Sz operator.
Eigen::VectorXd fragment_sz_diagonal(const SectorBasis& basis, const Fragment& frag);

// Diagonal of the fragment electron-number operator.
Eigen::VectorXd fragment_number_diagonal(const SectorBasis& basis, const Fragment& frag);

// S^2 = S- S+ + Sz (Sz + 1), assembled by operator composition.
OperatorMatrix build_total_s2(const SectorBasis& basis);
OperatorMatrix build_local_s2(const SectorBasis& basis, const Fragment& frag);

// S_A . S_B = (S+_A S-_B + S-_A S+_B)/2 + Sz_A Sz_B for disjoint fragments.
OperatorMatrix build_spin_dot(const SectorBasis& basis, const Fragment& a, const Fragment& b);

Fragment all_orbitals_fragment(int norb);

} // namespace edspin
