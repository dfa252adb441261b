#include "grr/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace grr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// sigma-profiled -2 log likelihood that the given delta factors are
// MSE-optimal, relative to the unrestricted (OLS) maximum. The implied
// component magnitudes are gamma_i = sigma sqrt(delta_i / (lambda_i
// (1 - delta_i))) with signs matched to rho, so lambda cancels and the
// residual quadratic depends on x_i = sqrt(delta_i / (1 - delta_i)) only.
double profile_minus2_loglr(const Eigen::VectorXd& deltas, const ComponentSummary& comps,
                            Eigen::Index n) {
    const double nn = static_cast<double>(n);
    double S = 0.0, Q = 0.0;
    for (Eigen::Index i = 0; i < deltas.size(); ++i) {
        const double one_minus = std::max(1.0 - deltas[i], 1e-12);
        const double x2 = std::max(deltas[i], 0.0) / one_minus;
        Q += x2;
        S += std::abs(comps.rho[i]) * std::sqrt(x2);
    }
    // minimize n ln(2 pi s^2) + u^2(s)/s^2 over s: n z^2 + S z - 1 = 0 with
    // s = sqrt(y'y) z
    const double z = (-S + std::sqrt(S * S + 4.0 * nn)) / (2.0 * nn);
    const double f = nn * std::log(2.0 * std::numbers::pi * comps.yTy * z * z) +
                     (1.0 / (z * z) - 2.0 * S / z + Q);
    const double ref =
        nn * std::log(2.0 * std::numbers::pi * comps.yTy * (1.0 - comps.R2) / nn) + nn;
    return std::max(0.0, f - ref);
}

QMSolution single_shape_solution(double q, const ComponentSummary& comps,
                                 const SpectralDecomposition& decomp, Eigen::Index n) {
    RestrictedMLFit fit = restricted_ml(q, comps, decomp.lambdas, n);
    QMSolution sol;
    sol.q_star = fit.q;
    sol.k_star = fit.k_hat;
    sol.m_star = fit.m_hat;
    sol.crl_star = fit.crl;
    sol.sigma2_hat = fit.sigma2_hat;
    sol.nu_hat = fit.nu_hat;
    sol.chisq = fit.chisq;
    sol.df = decomp.lambdas.size() >= 3 ? static_cast<int>(decomp.lambdas.size()) - 2 : 0;
    sol.qgrid_evals = {{fit.q, fit.crl, fit.k_hat, fit.m_hat, fit.chisq}};
    return sol;
}

std::vector<double> make_m_grid(Eigen::Index p, int steps, double m_knot, double m_ml) {
    if (steps < 1) throw std::invalid_argument("grid_steps_per_unit_m must be >= 1");
    std::vector<double> grid;
    const long total = static_cast<long>(p) * steps;
    grid.reserve(static_cast<std::size_t>(total) + 3);
    for (long i = 0; i <= total; ++i)
        grid.push_back(static_cast<double>(i) / static_cast<double>(steps));
    grid.push_back(m_knot);
    grid.push_back(m_ml);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    out += buf;
}

}  // namespace

const char* trace_kind_name(TraceKind kind) {
    switch (kind) {
        case TraceKind::coef: return "coef";
        case TraceKind::rmse: return "rmse";
        case TraceKind::spat: return "spat";
        case TraceKind::exev: return "exev";
        case TraceKind::infd: return "infd";
    }
    throw std::invalid_argument("unknown trace kind");
}

TraceKind trace_kind_from_name(const std::string& name) {
    if (name == "coef") return TraceKind::coef;
    if (name == "rmse") return TraceKind::rmse;
    if (name == "spat") return TraceKind::spat;
    if (name == "exev") return TraceKind::exev;
    if (name == "infd") return TraceKind::infd;
    throw std::invalid_argument("unknown trace kind: " + name);
}

ResolvedPath resolve_path(const ComponentSummary& comps, const SpectralDecomposition& decomp,
                          Eigen::Index n, const PathSpec& spec) {
    ResolvedPath r;
    r.kind = spec.kind;
    r.ml = ml_components(comps, n);
    switch (spec.kind) {
        case PathKind::efficient:
            r.m_ml = r.ml.m_knot;
            return r;
        case PathKind::hoerl_kennard:
            r.q_eff = 0.0;
            break;
        case PathKind::uniform:
            r.q_eff = 1.0;
            break;
        case PathKind::qm:
            if (spec.fixed_q) {
                r.q_eff = *spec.fixed_q;
            } else {
                r.qm = qm_search(comps, decomp, n, spec.qmin, spec.qmax, spec.qstep);
                r.q_eff = r.qm->q_star;
            }
            break;
    }
    if (!r.qm) r.qm = single_shape_solution(r.q_eff, comps, decomp, n);
    r.m_ml = r.qm->m_star;
    return r;
}

DeltaVector path_deltas_at(const ResolvedPath& path, double m, const Eigen::VectorXd& lambdas) {
    const Eigen::Index p = lambdas.size();
    if (!(m >= 0.0 && m <= static_cast<double>(p)))
        throw std::invalid_argument("extent m must lie in [0, p]");
    if (path.kind == PathKind::efficient) return efficient_path_deltas(m, path.ml);

    DeltaVector d;
    d.m = m;
    if (m == 0.0) {
        d.deltas = Eigen::VectorXd::Ones(p);
    } else if (m == static_cast<double>(p)) {
        d.deltas = Eigen::VectorXd::Zero(p);
    } else {
        d.deltas = two_param_deltas(qm_k_for_extent(m, path.q_eff, lambdas), path.q_eff, lambdas)
                       .deltas;
    }
    return d;
}

TraceTable build_trace(const FittedModel& model, const PathSpec& spec) {
    const Eigen::Index p = model.design.p;
    const Eigen::Index n = model.design.n;
    const Eigen::VectorXd& lam = model.decomp.lambdas;

    TraceTable t;
    t.path = spec;
    t.p = p;
    t.resolved = resolve_path(model.comps, model.decomp, n, spec);
    t.m_ml = t.resolved.m_ml;
    t.m_grid = make_m_grid(p, spec.grid_steps_per_unit_m, t.resolved.ml.m_knot, t.m_ml);

    const auto rows = static_cast<Eigen::Index>(t.m_grid.size());
    t.coef.resize(rows, p);
    t.rmse.resize(rows, p);
    t.spat.resize(rows, p);
    t.exev.resize(rows, p);
    t.infd.resize(rows, p);
    t.lrt.resize(t.m_grid.size());

    if (p > n - 4) {
        t.risk_available = false;
        t.risk_status = "relative MSE estimator requires p <= n-4 (p = " + std::to_string(p) +
                        ", n = " + std::to_string(n) + "); rmse/exev/infd traces disabled";
        t.rmse.setConstant(kNaN);
        t.exev.setConstant(kNaN);
        t.infd.setConstant(kNaN);
    }

    for (Eigen::Index r = 0; r < rows; ++r) {
        const double m = t.m_grid[static_cast<std::size_t>(r)];
        const DeltaVector delta = path_deltas_at(t.resolved, m, lam);
        t.spat.row(r) = delta.deltas.transpose();
        t.coef.row(r) = grr_estimate(model.decomp, model.comps, delta).transpose();
        t.lrt[static_cast<std::size_t>(r)] =
            m == 0.0 ? 0.0 : profile_minus2_loglr(delta.deltas, model.comps, n);
        if (!t.risk_available) continue;

        const RelativeRisk risk = relative_mse(delta, model.comps, lam, n);
        // map the clamped component risks onto the plotted coefficients
        t.rmse.row(r) =
            (model.decomp.G.array().square().matrix() * risk.diag_clamped).transpose();
        t.exev.row(r) = (lam.cwiseInverse() - risk.diag_clamped).transpose();
        t.infd.row(r) =
            inferior_direction(delta, risk, lam, model.decomp.G).direction.transpose();
    }
    return t;
}

std::vector<std::pair<double, double>> likelihood_profile(const ComponentSummary& comps,
                                                          const SpectralDecomposition& decomp,
                                                          Eigen::Index n, const PathSpec& spec,
                                                          const std::vector<double>& m_grid) {
    const ResolvedPath path = resolve_path(comps, decomp, n, spec);
    std::vector<std::pair<double, double>> out;
    out.reserve(m_grid.size());
    for (double m : m_grid) {
        const double v = m == 0.0 ? 0.0
                                  : profile_minus2_loglr(
                                        path_deltas_at(path, m, decomp.lambdas).deltas, comps, n);
        out.emplace_back(m, v);
    }
    return out;
}

void emit_csv(const TraceTable& table, const std::filesystem::path& out) {
    std::string buf;
    buf += "m";
    const char* names[] = {"coef", "rmse", "spat", "exev", "infd"};
    for (const char* name : names)
        for (Eigen::Index j = 0; j < table.p; ++j)
            buf += "," + std::string(name) + "_" + std::to_string(j + 1);
    buf += ",lrt\n";

    const Eigen::MatrixXd* blocks[] = {&table.coef, &table.rmse, &table.spat, &table.exev,
                                       &table.infd};
    for (std::size_t r = 0; r < table.m_grid.size(); ++r) {
        format_double(buf, table.m_grid[r]);
        for (const Eigen::MatrixXd* block : blocks)
            for (Eigen::Index j = 0; j < table.p; ++j) {
                buf += ',';
                format_double(buf, (*block)(static_cast<Eigen::Index>(r), j));
            }
        buf += ',';
        format_double(buf, table.lrt[r]);
        buf += '\n';
    }

    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out.string());
    f << buf;
    if (!f) throw std::runtime_error("write failed: " + out.string());
}

void emit_svg(const TraceTable& table, TraceKind which, const std::filesystem::path& out) {
    const Eigen::MatrixXd* data = nullptr;
    switch (which) {
        case TraceKind::coef: data = &table.coef; break;
        case TraceKind::rmse: data = &table.rmse; break;
        case TraceKind::spat: data = &table.spat; break;
        case TraceKind::exev: data = &table.exev; break;
        case TraceKind::infd: data = &table.infd; break;
    }
    if (!data) throw std::invalid_argument("unknown trace kind");
    if (!table.risk_available && which != TraceKind::coef && which != TraceKind::spat)
        throw std::runtime_error(std::string("trace '") + trace_kind_name(which) +
                                 "' unavailable: " + table.risk_status);

    const double W = 800, Hgt = 560;
    const double L = 70, R = 20, T = 40, B = 50;
    const double xmax = static_cast<double>(table.p);

    double ymin = data->minCoeff(), ymax = data->maxCoeff();
    if (!(ymax > ymin)) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    auto sx = [&](double m) { return L + (W - L - R) * m / xmax; };
    auto sy = [&](double v) { return T + (Hgt - T - B) * (ymax - v) / (ymax - ymin); };
    auto fmt = [](double v) {
        char b[32];
        std::snprintf(b, sizeof(b), "%.6g", v);
        return std::string(b);
    };

    // R-like qualitative palette, cycled per coefficient
    static const char* palette[] = {"#000000", "#ff0000", "#00cd00", "#0000ff",
                                    "#00ffff", "#ff00ff", "#b8860b", "#bebebe"};

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(W) +
         "\" height=\"" + fmt(Hgt) + "\" viewBox=\"0 0 " + fmt(W) + " " + fmt(Hgt) + "\">\n";
    s += "<rect x=\"" + fmt(L) + "\" y=\"" + fmt(T) + "\" width=\"" + fmt(W - L - R) +
         "\" height=\"" + fmt(Hgt - T - B) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    s += "<text x=\"" + fmt((L + W - R) / 2) + "\" y=\"" + fmt(Hgt - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">m</text>\n";
    s += "<text x=\"" + fmt(L) + "\" y=\"" + fmt(T - 14) +
         "\" font-family=\"sans-serif\" font-size=\"16\">" + trace_kind_name(which) +
         "</text>\n";

    // x ticks at integer extents, y labels at the range ends
    for (long i = 0; i <= static_cast<long>(xmax); ++i) {
        s += "<text x=\"" + fmt(sx(static_cast<double>(i))) + "\" y=\"" + fmt(Hgt - B + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
             std::to_string(i) + "</text>\n";
    }
    s += "<text x=\"" + fmt(L - 6) + "\" y=\"" + fmt(sy(ymin) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" + fmt(ymin) +
         "</text>\n";
    s += "<text x=\"" + fmt(L - 6) + "\" y=\"" + fmt(sy(ymax) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" + fmt(ymax) +
         "</text>\n";

    for (Eigen::Index j = 0; j < table.p; ++j) {
        s += "<polyline fill=\"none\" stroke=\"";
        s += palette[static_cast<std::size_t>(j) % (sizeof(palette) / sizeof(palette[0]))];
        s += "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t r = 0; r < table.m_grid.size(); ++r) {
            if (r) s += ' ';
            s += fmt(sx(table.m_grid[r])) + "," +
                 fmt(sy((*data)(static_cast<Eigen::Index>(r), j)));
        }
        s += "\"/>\n";
    }

    s += "<line x1=\"" + fmt(sx(table.m_ml)) + "\" y1=\"" + fmt(T) + "\" x2=\"" +
         fmt(sx(table.m_ml)) + "\" y2=\"" + fmt(Hgt - B) +
         "\" stroke=\"#555555\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
    s += "</svg>\n";

    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out.string());
    f << s;
    if (!f) throw std::runtime_error("write failed: " + out.string());
}

}  // namespace grr
