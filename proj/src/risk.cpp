#include "grr/risk.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace grr {

RelativeRisk relative_mse(const DeltaVector& delta, const ComponentSummary& comps,
                          const Eigen::VectorXd& lambdas, Eigen::Index n) {
    const Eigen::Index p = lambdas.size();
    if (delta.deltas.size() != p || comps.tau.size() != p)
        throw std::invalid_argument("dimension mismatch in relative_mse");
    if (p > n - 4)
        throw std::invalid_argument("relative MSE estimator requires p <= n-4 (p = " +
                                    std::to_string(p) + ", n = " + std::to_string(n) + ")");

    const double shrink = static_cast<double>(n - p - 3) / static_cast<double>(n - p - 1);
    // rank-one term: u u' with u_i = (1 - delta_i) tau_i / sqrt(lambda_i)
    const Eigen::VectorXd u =
        ((1.0 - delta.deltas.array()) * comps.tau.array() / lambdas.array().sqrt()).matrix();

    RelativeRisk r;
    r.T_hat = shrink * (u * u.transpose());
    r.T_hat.diagonal() += ((2.0 * delta.deltas.array() - 1.0) / lambdas.array()).matrix();
    r.variance_floor = (delta.deltas.array().square() / lambdas.array()).matrix();
    r.diag_clamped.resize(p);
    r.clamped_flags.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const bool low = r.T_hat(i, i) < r.variance_floor[i];
        r.clamped_flags[i] = low;
        r.diag_clamped[i] = low ? r.variance_floor[i] : r.T_hat(i, i);
    }
    return r;
}

InferiorDirection inferior_direction(const DeltaVector& delta, const RelativeRisk& risk,
                                     const Eigen::VectorXd& lambdas, const Eigen::MatrixXd& G) {
    const Eigen::Index p = lambdas.size();
    // the risk estimate must belong to this shrinkage point
    for (Eigen::Index i = 0; i < p; ++i) {
        const double floor = delta.deltas[i] * delta.deltas[i] / lambdas[i];
        if (std::abs(risk.variance_floor[i] - floor) > 1e-10 * (1.0 + floor))
            throw std::invalid_argument("risk estimate was computed for different deltas");
    }
    Eigen::MatrixXd D = -risk.T_hat;
    D.diagonal() += lambdas.cwiseInverse();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition of risk-difference matrix failed");

    InferiorDirection out;
    out.direction = Eigen::VectorXd::Zero(p);
    const double min_eig = es.eigenvalues()(0);  // ascending order
    if (min_eig < -1e-10) {
        out.present = true;
        out.excess = min_eig;
        Eigen::VectorXd v = G * es.eigenvectors().col(0);
        v /= v.norm();
        // same sign rule as the G columns: largest-magnitude entry positive
        Eigen::Index imax = 0;
        for (Eigen::Index i = 1; i < p; ++i)
            if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
        if (v[imax] < 0.0) v = -v;
        out.direction = std::move(v);
    }
    return out;
}

}  // namespace grr
