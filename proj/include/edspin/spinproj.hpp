#pragma once

#include <Eigen/Dense>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "edspin/eigensolve.hpp"
#include "edspin/secondq.hpp"

namespace edspin {

// Orthonormal eigenspaces of a fragment S^2, one block per local spin
// value. Projectors are kept in factored form P_s = V_s V_s^T.
class SpinProjectorSet {
public:
    struct Sector {
        double s = 0.0;            // local spin value
        Eigen::MatrixXd basis;     // dim x rank, orthonormal columns
    };

    SpinProjectorSet() = default;
    SpinProjectorSet(Fragment frag, std::vector<Sector> sectors, Eigen::VectorXd number_diag)
        : fragment_(std::move(frag)), sectors_(std::move(sectors)),
          number_diag_(std::move(number_diag)) {}

    const Fragment& fragment() const { return fragment_; }
    const std::vector<Sector>& sectors() const { return sectors_; }
    std::int64_t dim() const { return number_diag_.size(); }

    // P_s v = V_s (V_s^T v).
    Eigen::VectorXd project(std::size_t sector_index, const Eigen::VectorXd& v) const {
        const auto& b = sectors_[sector_index].basis;
        return b * (b.transpose() * v);
    }

    // Dense P_s for inspection and small-dimension tests.
    Eigen::MatrixXd dense_projector(std::size_t sector_index) const {
        const auto& b = sectors_[sector_index].basis;
        return b * b.transpose();
    }

    // Squared norm of v resolved by the fragment electron count (the count
    // is diagonal in the determinant basis).
    std::map<int, double> split_by_number(const Eigen::VectorXd& v) const;

private:
    Fragment fragment_;
    std::vector<Sector> sectors_;
    Eigen::VectorXd number_diag_;
};

// Eigendecompose S^2 restricted to the fragment and bucket eigenvectors by
// the nearest s(s+1). Eigenvalues further than 1e-6 from every s(s+1)
// raise InternalError (that signals a phase or assembly bug upstream).
SpinProjectorSet build_projectors(const SectorBasis& basis, const Fragment& frag);

// Joint local-spin decomposition of one normalized state, resolved by the
// electron count on fragment A. Keys are (2*S_A, 2*S_B, n_A).
struct JointWeights {
    std::map<std::tuple<int, int, int>, double> w;

    double total() const;
    // Summed over n_A; keys (2*S_A, 2*S_B).
    std::map<std::pair<int, int>, double> by_spin() const;
    // Summed over spin; key n_A.
    std::map<int, double> number_distribution() const;
    // Mass on n_A different from the nominal fragment-A electron count.
    double charge_transfer_weight(int nominal_na) const;
    double weight_of(double s_a, double s_b) const;
};

JointWeights joint_decompose(const Eigen::VectorXd& state, const SpinProjectorSet& set_a,
                             const SpinProjectorSet& set_b);

// Table mirroring the per-state presentation of the analysis pipeline:
// energy relative to the ground state, multiplicity, joint weights and the
// charge-transfer breakout.
struct ProjectionRow {
    int state = 0;
    double energy_cm1 = 0.0;
    int multiplicity = 0;
    std::map<std::pair<int, int>, double> weights; // (2S_A, 2S_B) -> weight
    double ct_weight = 0.0;
    double weight_sum = 0.0;
    std::map<int, double> number_distribution;
};

struct ProjectionTable {
    std::vector<std::pair<int, int>> columns; // sorted union of weight keys
    std::vector<ProjectionRow> rows;
};

// Decompose every state of a spin-labeled spectrum. Weights below 1e-12
// are reported as exact zeros.
ProjectionTable make_projection_table(const Spectrum& labeled, const SpinProjectorSet& set_a,
                                      const SpinProjectorSet& set_b, int nominal_na);

// ---------------------------------------------------------------------------
// Independent two-spin coupling oracle (pure spin algebra, no determinants).
// Amplitudes over product states |m_a, m_b> keyed by doubled m values.
struct CoupledState {
    double s_a = 0.0, s_b = 0.0, s_total = 0.0, m = 0.0;
    std::map<std::pair<int, int>, double> amplitudes;

    std::map<std::pair<int, int>, double> weights() const; // squared amplitudes
};

// |s_total, m = s_total> built by ladder descent from the stretched state
// plus orthogonalization; weights are exact squared Clebsch-Gordan
// coefficients. Triangle violations raise ParameterError.
CoupledState coupled_weights_oracle(double s_a, double s_b, double s_total);

// Apply the total lowering operator and normalize (m decreases by one).
CoupledState lower_coupled_state(const CoupledState& state);

} // namespace edspin
