#include "grr/design.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace grr {

namespace {

constexpr double kRankTol = 1e-10;  // relative singular-value cutoff

void center_and_scale_y(StandardizedDesign& d, const Eigen::VectorXd& y_raw) {
    const double n = static_cast<double>(d.n);
    d.y_mean = y_raw.mean();
    Eigen::VectorXd yc = y_raw.array() - d.y_mean;
    if (d.standardize_y) {
        const double ss = yc.squaredNorm();
        if (ss <= 0.0) throw std::invalid_argument("response is constant: zero scale");
        d.y_scale = std::sqrt(ss / (n - 1.0));
        yc /= d.y_scale;
    } else {
        d.y_scale = 1.0;
        if (yc.squaredNorm() <= 0.0)
            throw std::invalid_argument("response is constant: zero scale");
    }
    d.y = std::move(yc);
}

}  // namespace

StandardizedDesign standardize_matrix(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      bool standardize_y) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n < 2) throw std::invalid_argument("need at least 2 observations");
    if (y.size() != n) throw std::invalid_argument("X and y row counts differ");
    if (p < 1) throw std::invalid_argument("need at least one predictor");
    if (p > n - 1)
        throw std::invalid_argument("p = " + std::to_string(p) + " exceeds n-1 = " +
                                    std::to_string(n - 1));

    StandardizedDesign d;
    d.n = n;
    d.p = p;
    d.standardize_y = standardize_y;
    d.x_means = X.colwise().mean();
    d.X = X.rowwise() - d.x_means.transpose();
    d.x_scales.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double ss = d.X.col(j).squaredNorm();
        if (ss <= 0.0)
            throw std::invalid_argument("predictor column " + std::to_string(j) +
                                        " is constant: zero scale");
        d.x_scales[j] = std::sqrt(ss / static_cast<double>(n - 1));
        d.X.col(j) /= d.x_scales[j];
    }
    center_and_scale_y(d, y);
    return d;
}

StandardizedDesign standardize(const RawDataset& raw, bool standardize_y) {
    raw.validate();
    const std::size_t n = raw.n_rows();
    const std::size_t p = raw.n_predictors();
    const std::size_t yi = raw.response_index();

    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    std::size_t col = 0;
    for (std::size_t j = 0; j < raw.columns.size(); ++j) {
        Eigen::Map<const Eigen::VectorXd> v(raw.columns[j].data(), n);
        if (j == yi) {
            y = v;
            continue;
        }
        if ((v.array() - v.mean()).matrix().squaredNorm() <= 0.0)
            throw std::invalid_argument("predictor column '" + raw.column_names[j] +
                                        "' is constant: zero scale");
        X.col(col++) = v;
    }
    return standardize_matrix(X, y, standardize_y);
}

StandardizedDesign with_response(const StandardizedDesign& design, const Eigen::VectorXd& y_raw) {
    if (y_raw.size() != design.n) throw std::invalid_argument("response length mismatch");
    StandardizedDesign d = design;
    center_and_scale_y(d, y_raw);
    return d;
}

SpectralDecomposition spectral(const StandardizedDesign& design) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(design.X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();  // non-increasing
    if (sv.size() == 0 || sv(sv.size() - 1) < kRankTol * sv(0))
        throw std::runtime_error("X not full column rank");

    SpectralDecomposition dec;
    dec.lambdas = sv.array().square();
    dec.H = svd.matrixU();
    dec.G = svd.matrixV();

    // fix the sign ambiguity: largest-magnitude entry of each G column positive
    auto argmax_abs = [&](Eigen::Index j) {
        Eigen::Index imax = 0;
        double amax = std::abs(dec.G(0, j));
        for (Eigen::Index i = 1; i < dec.G.rows(); ++i) {
            const double a = std::abs(dec.G(i, j));
            if (a > amax) {
                amax = a;
                imax = i;
            }
        }
        return imax;
    };
    for (Eigen::Index j = 0; j < dec.G.cols(); ++j) {
        if (dec.G(argmax_abs(j), j) < 0.0) {
            dec.G.col(j) = -dec.G.col(j);
            dec.H.col(j) = -dec.H.col(j);
        }
    }

    // numerically tied singular values leave the column order arbitrary; pin
    // it by ordering tied columns on the row of their largest entry
    for (Eigen::Index lo = 0; lo < sv.size();) {
        Eigen::Index hi = lo + 1;
        while (hi < sv.size() && sv(lo) - sv(hi) <= 1e-12 * sv(0)) ++hi;
        if (hi - lo > 1) {
            std::vector<Eigen::Index> order(static_cast<std::size_t>(hi - lo));
            for (Eigen::Index j = lo; j < hi; ++j)
                order[static_cast<std::size_t>(j - lo)] = j;
            std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
                return argmax_abs(a) < argmax_abs(b);
            });
            const Eigen::MatrixXd Gblock = dec.G.middleCols(lo, hi - lo);
            const Eigen::MatrixXd Hblock = dec.H.middleCols(lo, hi - lo);
            for (Eigen::Index j = lo; j < hi; ++j) {
                dec.G.col(j) = Gblock.col(order[static_cast<std::size_t>(j - lo)] - lo);
                dec.H.col(j) = Hblock.col(order[static_cast<std::size_t>(j - lo)] - lo);
            }
        }
        lo = hi;
    }
    return dec;
}

ComponentSummary components(const SpectralDecomposition& decomp,
                            const StandardizedDesign& design) {
    const Eigen::Index n = design.n;
    const Eigen::Index p = design.p;
    if (n - p - 1 < 1)
        throw std::invalid_argument("no degrees of freedom for error: need n >= p + 2");

    ComponentSummary cs;
    cs.dfe = n - p - 1;
    cs.yTy = design.y.squaredNorm();
    const Eigen::VectorXd w = decomp.H.transpose() * design.y;
    cs.rho = w / std::sqrt(cs.yTy);
    cs.R2 = cs.rho.squaredNorm();
    if (1.0 - cs.R2 <= 1e-12)
        throw std::runtime_error("response is numerically perfectly fit (R^2 = 1)");

    cs.c = std::sqrt(cs.yTy) * (cs.rho.array() / decomp.lambdas.array().sqrt()).matrix();
    cs.s2 = cs.yTy * (1.0 - cs.R2) / static_cast<double>(cs.dfe);
    const double fac = static_cast<double>(cs.dfe) / (1.0 - cs.R2);
    cs.tau = cs.rho * std::sqrt(fac);
    cs.F = fac * cs.rho.array().square();
    cs.noncentrality_hat =
        static_cast<double>(n) * cs.rho.array().square() / (1.0 - cs.R2);
    return cs;
}

RawCoefficients back_transform(const Eigen::VectorXd& beta_std,
                               const StandardizedDesign& design) {
    if (beta_std.size() != design.p) throw std::invalid_argument("coefficient length mismatch");
    RawCoefficients out;
    out.beta = design.y_scale * (beta_std.array() / design.x_scales.array()).matrix();
    out.intercept = design.y_mean - design.x_means.dot(out.beta);
    return out;
}

FittedModel fit_model(const RawDataset& raw, bool standardize_y) {
    FittedModel m;
    m.design = standardize(raw, standardize_y);
    m.decomp = spectral(m.design);
    m.comps = components(m.decomp, m.design);
    return m;
}

FittedModel fit_model(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool standardize_y) {
    FittedModel m;
    m.design = standardize_matrix(X, y, standardize_y);
    m.decomp = spectral(m.design);
    m.comps = components(m.decomp, m.design);
    return m;
}

}  // namespace grr
