#include "edspin/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "edspin/errors.hpp"

namespace edspin {

namespace {

void verify_pairs(const OperatorMatrix& op, const Spectrum& s, double residual_tol) {
    for (std::int64_t i = 0; i < s.size(); ++i) {
        const Eigen::VectorXd v = s.vectors.col(i);
        const double lambda = s.values[i];
        const double res = (op.mat * v - lambda * v).norm();
        if (res > residual_tol * std::max(1.0, std::abs(lambda))) {
            std::ostringstream msg;
            msg << "diagonalize: residual " << res << " for eigenvalue " << lambda
                << " violates the contract";
            throw SolverError(msg.str());
        }
    }
    Eigen::MatrixXd gram = s.vectors.transpose() * s.vectors;
    gram -= Eigen::MatrixXd::Identity(s.size(), s.size());
    if (s.size() > 0 && gram.cwiseAbs().maxCoeff() > 1e-10)
        throw SolverError("diagonalize: eigenvectors lost orthonormality");
}

// Fix the overall sign of each column so repeated runs emit identical data.
void fix_signs(Eigen::MatrixXd& vecs) {
    for (std::int64_t c = 0; c < vecs.cols(); ++c) {
        std::int64_t imax = 0;
        double amax = -1.0;
        for (std::int64_t r = 0; r < vecs.rows(); ++r) {
            const double a = std::abs(vecs(r, c));
            if (a > amax) {
                amax = a;
                imax = r;
            }
        }
        if (vecs(imax, c) < 0.0) vecs.col(c) = -vecs.col(c);
    }
}

Spectrum dense_path(const OperatorMatrix& op, int k) {
    Eigen::MatrixXd dense(op.mat);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success)
        throw SolverError("diagonalize: dense eigensolver failed to converge");
    const std::int64_t n = dense.rows();
    const std::int64_t keep = (k < 0) ? n : std::min<std::int64_t>(k, n);
    Spectrum s;
    s.values = solver.eigenvalues().head(keep);
    s.vectors = solver.eigenvectors().leftCols(keep);
    fix_signs(s.vectors);
    return s;
}

} // namespace

Spectrum diagonalize_lanczos(const OperatorMatrix& op, int k, const DiagonalizeOptions& opts) {
    const std::int64_t n = op.dim();
    if (k < 0) throw ParameterError("diagonalize_lanczos: explicit k required");
    if (k > n) throw ParameterError("diagonalize_lanczos: k exceeds dimension");
    Spectrum out;
    if (k == 0 || n == 0) {
        out.values.resize(0);
        out.vectors.resize(n, 0);
        return out;
    }

    std::mt19937_64 rng(0x5eed5eedULL); // deterministic start vectors
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    Eigen::MatrixXd locked(n, k);
    std::vector<double> locked_vals;
    int n_locked = 0;
    int matvecs = 0;
    double best_residual = std::numeric_limits<double>::infinity();
    const double conv_tol = 0.1 * opts.residual_tol;

    auto deflate = [&](Eigen::VectorXd& v) {
        for (int pass = 0; pass < 2; ++pass)
            if (n_locked > 0) v -= locked.leftCols(n_locked) * (locked.leftCols(n_locked).transpose() * v);
    };

    Eigen::VectorXd v_start(n);
    bool have_start = false;

    while (n_locked < k) {
        if (matvecs >= opts.max_matvecs) {
            std::ostringstream msg;
            msg << "diagonalize_lanczos: no convergence after " << matvecs
                << " matrix-vector products; best residual " << best_residual;
            throw SolverError(msg.str());
        }

        const std::int64_t m_max =
            std::min<std::int64_t>(n - n_locked, std::max(2 * k + 16, opts.block_size));

        Eigen::VectorXd v(n);
        if (have_start) {
            v = v_start;
            have_start = false;
        } else {
            for (std::int64_t i = 0; i < n; ++i) v[i] = uni(rng);
        }
        deflate(v);
        if (v.norm() < 1e-12) {
            for (std::int64_t i = 0; i < n; ++i) v[i] = uni(rng);
            deflate(v);
        }
        v.normalize();

        Eigen::MatrixXd V(n, m_max);
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m_max);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(m_max);
        std::int64_t m = 0;
        bool breakdown = false;

        for (std::int64_t j = 0; j < m_max; ++j) {
            V.col(j) = v;
            Eigen::VectorXd w = op.mat * v;
            ++matvecs;
            alpha[j] = v.dot(w);
            w -= alpha[j] * v;
            if (j > 0) w -= beta[j - 1] * V.col(j - 1);
            // Full reorthogonalization against the sweep basis and locked vectors.
            for (int pass = 0; pass < 2; ++pass) {
                w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
                if (n_locked > 0)
                    w -= locked.leftCols(n_locked) * (locked.leftCols(n_locked).transpose() * w);
            }
            m = j + 1;
            beta[j] = w.norm();
            if (beta[j] < 1e-13) {
                breakdown = true;
                break;
            }
            v = w / beta[j];
            if (matvecs >= opts.max_matvecs) break;
        }

        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (std::int64_t j = 0; j < m; ++j) {
            t(j, j) = alpha[j];
            if (j + 1 < m) {
                t(j, j + 1) = beta[j];
                t(j + 1, j) = beta[j];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tsolve(t);
        if (tsolve.info() != Eigen::Success)
            throw SolverError("diagonalize_lanczos: tridiagonal solve failed");

        bool locked_any = false;
        for (std::int64_t i = 0; i < m && n_locked < k; ++i) {
            Eigen::VectorXd x = V.leftCols(m) * tsolve.eigenvectors().col(i);
            deflate(x);
            const double norm = x.norm();
            if (norm < 1e-12) continue;
            x /= norm;
            const double theta = x.dot(op.mat * x);
            ++matvecs;
            const double res = (op.mat * x - theta * x).norm();
            ++matvecs;
            best_residual = std::min(best_residual, res);
            if (res < conv_tol * std::max(1.0, std::abs(theta))) {
                locked.col(n_locked) = x;
                locked_vals.push_back(theta);
                ++n_locked;
                locked_any = true;
            } else {
                // Restart from the lowest unconverged Ritz vector.
                v_start = x;
                have_start = true;
                break;
            }
        }
        if (breakdown && !locked_any && !have_start) {
            // Krylov space closed on an invariant subspace; a fresh random
            // start explores the deflated complement.
            have_start = false;
        }
    }

    // Lowest-first ordering (locking order already ascends per sweep, but
    // separate sweeps can interleave).
    std::vector<int> order(static_cast<std::size_t>(n_locked));
    for (int i = 0; i < n_locked; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return locked_vals[static_cast<std::size_t>(a)] < locked_vals[static_cast<std::size_t>(b)]; });

    out.values.resize(n_locked);
    out.vectors.resize(n, n_locked);
    for (int i = 0; i < n_locked; ++i) {
        out.values[i] = locked_vals[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        out.vectors.col(i) = locked.col(order[static_cast<std::size_t>(i)]);
    }
    fix_signs(out.vectors);
    return out;
}

Spectrum diagonalize(const OperatorMatrix& op, int k, const DiagonalizeOptions& opts) {
    Spectrum s = (op.dim() <= dense_eig_threshold) ? dense_path(op, k)
                                                   : diagonalize_lanczos(op, k, opts);
    verify_pairs(op, s, opts.residual_tol);
    return s;
}

std::vector<std::vector<int>> group_degenerate(const Eigen::VectorXd& values, double tol) {
    std::vector<std::vector<int>> groups;
    for (int i = 0; i < values.size(); ++i) {
        if (i > 0 && values[i] < values[i - 1] - 1e-15)
            throw ParameterError("group_degenerate: values must ascend");
        if (!groups.empty() && values[i] - values[i - 1] < tol)
            groups.back().push_back(i);
        else
            groups.push_back({i});
    }
    return groups;
}

double nearest_spin_value(double s2_expectation) {
    // Closest non-negative half-integer s with s(s+1) near the expectation.
    const double x = std::max(0.0, s2_expectation);
    const double s_cont = 0.5 * (std::sqrt(1.0 + 4.0 * x) - 1.0);
    const double s_round = std::round(2.0 * s_cont) / 2.0;
    double best = std::max(0.0, s_round);
    double best_err = std::abs(best * (best + 1.0) - s2_expectation);
    for (double cand : {s_round - 0.5, s_round + 0.5}) {
        if (cand < 0) continue;
        const double err = std::abs(cand * (cand + 1.0) - s2_expectation);
        if (err < best_err) {
            best = cand;
            best_err = err;
        }
    }
    return best;
}

Spectrum assign_spin(const Spectrum& spec, const OperatorMatrix& s2, double tol,
                     double degeneracy_tol, std::optional<double> sector_sz) {
    if (spec.vectors.rows() != s2.dim())
        throw ParameterError("assign_spin: S^2 dimension does not match eigenvectors");

    Spectrum out = spec;
    out.labels.assign(static_cast<std::size_t>(spec.size()), StateLabel{});

    const auto groups = group_degenerate(out.values, degeneracy_tol);
    for (const auto& group : groups) {
        const auto g = static_cast<std::int64_t>(group.size());
        Eigen::MatrixXd vg(out.vectors.rows(), g);
        for (std::int64_t c = 0; c < g; ++c)
            vg.col(c) = out.vectors.col(group[static_cast<std::size_t>(c)]);

        // Commutation sanity: S^2 must leave each degenerate subspace invariant.
        Eigen::MatrixXd s2vg = s2.mat * vg;
        Eigen::MatrixXd outside = s2vg - vg * (vg.transpose() * s2vg);
        if (outside.cwiseAbs().maxCoeff() > 1e-7)
            throw LabelingError(
                "assign_spin: S^2 does not leave a degenerate subspace invariant (operators do "
                "not commute)");

        Eigen::MatrixXd s2_block = vg.transpose() * s2vg;
        Eigen::VectorXd expectations = s2_block.diagonal();
        bool need_rediag = false;
        for (std::int64_t c = 0; c < g; ++c) {
            const double s = nearest_spin_value(expectations[c]);
            if (std::abs(expectations[c] - s * (s + 1.0)) > tol) need_rediag = true;
        }

        bool contaminated = false;
        if (need_rediag) {
            contaminated = true;
            s2_block = 0.5 * (s2_block + s2_block.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s2_block);
            if (es.info() != Eigen::Success)
                throw LabelingError("assign_spin: S^2 re-diagonalization failed");
            Eigen::MatrixXd rotated = vg * es.eigenvectors();
            fix_signs(rotated);
            for (std::int64_t c = 0; c < g; ++c)
                out.vectors.col(group[static_cast<std::size_t>(c)]) = rotated.col(c);
            expectations = es.eigenvalues();
        }

        for (std::int64_t c = 0; c < g; ++c) {
            const int idx = group[static_cast<std::size_t>(c)];
            const double x = expectations[c];
            const double s = nearest_spin_value(x);
            if (std::abs(x - s * (s + 1.0)) > tol) {
                std::ostringstream msg;
                msg << "assign_spin: <S^2> = " << x << " is not within " << tol
                    << " of any S(S+1) even after re-diagonalization";
                throw LabelingError(msg.str());
            }
            StateLabel& lab = out.labels[static_cast<std::size_t>(idx)];
            lab.s = s;
            lab.multiplicity = static_cast<int>(std::lround(2.0 * s + 1.0));
            lab.s2_expectation = x;
            lab.contaminated = contaminated;
            lab.sz = sector_sz;
            if (sector_sz && s + 1e-9 < std::abs(*sector_sz))
                throw LabelingError("assign_spin: labeled S below the sector |Sz|");
        }
    }
    return out;
}

} // namespace edspin
