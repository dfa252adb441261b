#include "grr/shrinkage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace grr {

namespace {

constexpr double kDeltaRangeTol = 1e-12;

void check_delta_range(const Eigen::VectorXd& deltas) {
    for (Eigen::Index i = 0; i < deltas.size(); ++i)
        if (!(deltas[i] >= -kDeltaRangeTol && deltas[i] <= 1.0 + kDeltaRangeTol))
            throw std::invalid_argument("delta factor " + std::to_string(i) +
                                        " outside [0,1]: " + std::to_string(deltas[i]));
}

}  // namespace

DeltaVector make_delta_vector(Eigen::VectorXd deltas) {
    check_delta_range(deltas);
    DeltaVector d;
    d.deltas = std::move(deltas);
    d.m = static_cast<double>(d.deltas.size()) - d.deltas.sum();
    return d;
}

double delta_mse_oracle(double gamma, double lambda, double sigma) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
    const double signal = gamma * gamma * lambda;
    const double noise = sigma * sigma;
    if (signal == 0.0 && noise == 0.0)
        throw std::invalid_argument("delta_mse_oracle undefined for gamma = 0, sigma = 0");
    return signal / (signal + noise);
}

Eigen::VectorXd grr_estimate(const SpectralDecomposition& decomp, const ComponentSummary& comps,
                             const DeltaVector& delta) {
    if (delta.deltas.size() != comps.c.size())
        throw std::invalid_argument("delta length does not match component count");
    return decomp.G * (delta.deltas.array() * comps.c.array()).matrix();
}

double m_extent(const Eigen::VectorXd& deltas) {
    check_delta_range(deltas);
    return static_cast<double>(deltas.size()) - deltas.sum();
}

DeltaVector two_param_deltas(double k, double q, const Eigen::VectorXd& lambdas) {
    if (!(k >= 0.0)) throw std::invalid_argument("k must be non-negative");
    if ((lambdas.array() <= 0.0).any())
        throw std::invalid_argument("eigenvalues must be positive");
    Eigen::VectorXd d(lambdas.size());
    for (Eigen::Index j = 0; j < lambdas.size(); ++j)
        d[j] = 1.0 / (1.0 + k * std::pow(lambdas[j], q - 1.0));  // k=0 -> 1; overflow -> 0
    return make_delta_vector(std::move(d));
}

double qm_k_for_extent(double m, double q, const Eigen::VectorXd& lambdas) {
    const double p = static_cast<double>(lambdas.size());
    if (!(m > 0.0 && m < p))
        throw std::invalid_argument("extent must lie strictly inside (0, p)");

    auto extent_at = [&](double log_k) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < lambdas.size(); ++j)
            sum += 1.0 / (1.0 + std::exp(log_k + (q - 1.0) * std::log(lambdas[j])));
        return p - sum;
    };

    // m(k) is continuous and strictly increasing; bracket on log k, then bisect
    double lo = 0.0, hi = 0.0;
    while (extent_at(lo) > m && lo > -750.0) lo -= 8.0;
    while (extent_at(hi) < m && hi < 750.0) hi += 8.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (extent_at(mid) < m ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

double crl(double q, const Eigen::VectorXd& rho, const Eigen::VectorXd& lambdas) {
    if (rho.size() != lambdas.size()) throw std::invalid_argument("rho/lambda size mismatch");
    const double r2 = rho.squaredNorm();
    if (r2 <= 0.0) throw std::invalid_argument("all principal correlations are zero");
    if (rho.size() == 1) return 1.0;  // cosine between two 1-vectors
    // normalize by lambda_max so lambda^{(1-q)/2} cannot overflow; the common
    // factor cancels in the cosine
    const double lmax = lambdas.maxCoeff();
    double s = 0.0, w2 = 0.0;
    for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
        const double w = std::pow(lambdas[j] / lmax, 0.5 * (1.0 - q));
        s += std::abs(rho[j]) * w;
        w2 += w * w;
    }
    return s / std::sqrt(r2 * w2);
}

RestrictedMLFit restricted_ml(double q, const ComponentSummary& comps,
                              const Eigen::VectorXd& lambdas, Eigen::Index n) {
    if (lambdas.size() < 1) throw std::invalid_argument("need p >= 1");
    const double R2 = comps.R2;
    if (R2 <= 0.0)
        throw std::runtime_error(
            "R^2 = 0: no signal, shrinkage terminus optimal (k unbounded)");

    RestrictedMLFit fit;
    fit.q = q;
    fit.crl = std::min(crl(q, comps.rho, lambdas), 1.0);
    const double C2 = fit.crl * fit.crl;
    const double nn = static_cast<double>(n);

    double sum_w = 0.0, sum_w2 = 0.0;  // sum |rho| lambda^{(1-q)/2}, sum lambda^{1-q}
    for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
        const double w = std::pow(lambdas[j], 0.5 * (1.0 - q));
        sum_w += std::abs(comps.rho[j]) * w;
        sum_w2 += w * w;
    }

    fit.nu_hat = std::sqrt(comps.yTy) * sum_w / sum_w2;
    fit.u2_min = comps.yTy * std::max(0.0, 1.0 - R2 * C2);
    fit.sigma2_hat = fit.u2_min / nn;
    fit.k_hat = sum_w2 * (1.0 - R2 * C2) / (nn * R2 * C2);
    fit.m_hat = two_param_deltas(fit.k_hat, q, lambdas).m;
    fit.chisq = nn * std::log1p(std::max(0.0, R2 * (1.0 - C2) / (1.0 - R2)));
    return fit;
}

QMSolution qm_search(const ComponentSummary& comps, const SpectralDecomposition& decomp,
                     Eigen::Index n, double qmin, double qmax, double qstep) {
    if (!(qmin < qmax)) throw std::invalid_argument("need qmin < qmax");
    if (!(qstep > 0.0)) throw std::invalid_argument("need qstep > 0");

    const Eigen::Index p = decomp.lambdas.size();
    QMSolution sol;
    sol.df = p >= 3 ? static_cast<int>(p) - 2 : 0;

    bool have_best = false;
    RestrictedMLFit best;
    for (int i = 0;; ++i) {
        const double q = qmin + static_cast<double>(i) * qstep;
        if (q > qmax + 1e-12) break;
        RestrictedMLFit fit = restricted_ml(q, comps, decomp.lambdas, n);
        sol.qgrid_evals.push_back({fit.q, fit.crl, fit.k_hat, fit.m_hat, fit.chisq});
        // strict improvement, or a tie resolved toward smallest |q| then smaller q
        const bool better =
            !have_best || fit.chisq < best.chisq - 1e-12 ||
            (fit.chisq <= best.chisq + 1e-12 &&
             (std::abs(q) < std::abs(best.q) - 1e-12 ||
              (std::abs(q) <= std::abs(best.q) + 1e-12 && q < best.q)));
        if (better) {
            best = fit;
            have_best = true;
        }
    }
    if (!have_best) throw std::invalid_argument("empty q grid");

    sol.q_star = best.q;
    sol.k_star = best.k_hat;
    sol.m_star = best.m_hat;
    sol.crl_star = best.crl;
    sol.sigma2_hat = best.sigma2_hat;
    sol.nu_hat = best.nu_hat;
    sol.chisq = best.chisq;
    return sol;
}

MLComponentFit ml_components(const ComponentSummary& comps, Eigen::Index n) {
    if (comps.R2 >= 1.0) throw std::runtime_error("R^2 = 1: perfect fit, ML shrinkage undefined");
    MLComponentFit fit;
    const double nn = static_cast<double>(n);
    const double noise = 1.0 - comps.R2;
    fit.delta_ml.resize(comps.rho.size());
    for (Eigen::Index j = 0; j < comps.rho.size(); ++j) {
        const double sig = nn * comps.rho[j] * comps.rho[j];
        fit.delta_ml[j] = sig / (sig + noise);
    }
    fit.gamma_ml = (fit.delta_ml.array() * comps.c.array()).matrix();
    fit.m_knot = static_cast<double>(comps.rho.size()) - fit.delta_ml.sum();
    return fit;
}

DeltaVector efficient_path_deltas(double m, const MLComponentFit& fit) {
    const double p = static_cast<double>(fit.delta_ml.size());
    if (!(m >= 0.0 && m <= p))
        throw std::invalid_argument("extent m must lie in [0, p]");

    Eigen::VectorXd d(fit.delta_ml.size());
    if (m == fit.m_knot) {
        d = fit.delta_ml;  // the knot is the ML point itself
    } else if (m <= fit.m_knot) {
        if (fit.m_knot <= 0.0) {
            d.setOnes();  // degenerate knot at the OLS end; only m = 0 reaches here
        } else {
            const double r = m / fit.m_knot;
            d = 1.0 - r * (1.0 - fit.delta_ml.array());
        }
    } else {
        const double r = (p - m) / (p - fit.m_knot);  // m > m_knot implies p > m_knot
        d = r * fit.delta_ml.array();
    }

    DeltaVector out;
    out.deltas = std::move(d);
    out.m = m;
    return out;
}

}  // namespace grr
