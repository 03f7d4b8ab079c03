#include "hjlab/lax_oleinik.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hjlab {

double generating_function(const VectorXd& y, const VectorXd& x,
                           const Potential& F) {
    return 0.5 * (x - y).squaredNorm() + F.value(y);
}

double periodic_action(const VectorXd& y, const VectorXd& x, const Potential& F) {
    // F is periodic, so the shift minimization only involves the quadratic
    // term and separates per axis: take the nearest representative.
    return 0.5 * torus_delta(x, y).squaredNorm() + F.value(y);
}

namespace {

struct Parabola {
    double t = 0.0;   // vertex offset in units of the spacing, clamped to [-1,1]
    double drop = 0.0;  // value decrease relative to the center node
};

// fit through (-1, gm), (0, g0), (+1, gp); keep the center on degenerate fits
Parabola polish_axis(double gm, double g0, double gp) {
    const double b = 0.5 * (gp - gm);
    const double a = 0.5 * (gp + gm) - g0;
    Parabola out;
    if (a <= 1e-300) return out;
    out.t = std::clamp(-b / (2.0 * a), -1.0, 1.0);
    out.drop = b * out.t + a * out.t * out.t;
    return out;
}

// objective phi(y) + A(y, x) at grid node (i0, i1), for arbitrary x
struct NodeObjective {
    const TorusField& phi;
    const VectorXd& phiF;  // phi + F at grid nodes
    const VectorXd& x;

    double operator()(int i0, int i1) const {
        const GridSpec& g = phi.spec;
        const std::int64_t idx = g.index(i0, i1);
        return phiF[idx] + 0.5 * torus_delta(g.coords(idx), x).squaredNorm();
    }
};

MinimizerInfo minimize_at(const VectorXd& x, const TorusField& phi,
                          const VectorXd& phiF) {
    const GridSpec& g = phi.spec;
    NodeObjective obj{phi, phiF, x};

    std::int64_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    int ties = 0;
    for (std::int64_t idx = 0; idx < g.total(); ++idx) {
        const double v =
            phiF[idx] + 0.5 * torus_delta(g.coords(idx), x).squaredNorm();
        if (v < best_val) {
            best_val = v;
            best = idx;
            ties = 0;
        } else if (v == best_val) {
            ++ties;
        }
    }

    int b0, b1;
    g.unravel(best, b0, b1);
    MinimizerInfo info;
    info.grid_idx = best;
    info.ties = ties;
    info.ybar = x + torus_delta(g.coords(best), x);
    info.value = best_val;

    const double g0 = best_val;
    const Parabola p0 = polish_axis(obj(b0 - 1, b1), g0, obj(b0 + 1, b1));
    info.ybar[0] += p0.t * g.spacing();
    info.value += p0.drop;
    if (g.d == 2) {
        const Parabola p1 = polish_axis(obj(b0, b1 - 1), g0, obj(b0, b1 + 1));
        info.ybar[1] += p1.t * g.spacing();
        info.value += p1.drop;
    }
    return info;
}

VectorXd phi_plus_F(const TorusField& phi, const Potential& F) {
    VectorXd out(phi.spec.total());
    for (std::int64_t i = 0; i < phi.spec.total(); ++i)
        out[i] = phi[i] + F.value(phi.spec.coords(i));
    return out;
}

}  // namespace

MinimizerInfo backward_minimizer(const VectorXd& x, const TorusField& phi,
                                 const Potential& F) {
    return minimize_at(x, phi, phi_plus_F(phi, F));
}

LaxOleinikResult lax_oleinik_apply(const TorusField& phi, const Potential& F) {
    const GridSpec& g = phi.spec;
    const int n = g.n_per_axis;
    const double h = g.spacing();
    const VectorXd phiF = phi_plus_F(phi, F);

    // per-axis table of quadratic costs, indexed by the wrapped node offset
    VectorXd qcost(n);
    for (int j = 0; j < n; ++j) {
        double t = j * h;
        t -= std::round(t);
        qcost[j] = 0.5 * t * t;
    }

    LaxOleinikResult res;
    res.values = TorusField(g);
    res.ybar.resize(g.total(), g.d);
    res.argmin_idx.resize(g.total());

    for (std::int64_t xi = 0; xi < g.total(); ++xi) {
        int x0, x1;
        g.unravel(xi, x0, x1);
        std::int64_t best = 0;
        double best_val = std::numeric_limits<double>::infinity();
        int ties = 0;
        if (g.d == 1) {
            for (int y0 = 0; y0 < n; ++y0) {
                const double v = phiF[y0] + qcost[g.wrap(y0 - x0)];
                if (v < best_val) {
                    best_val = v;
                    best = y0;
                    ties = 0;
                } else if (v == best_val) {
                    ++ties;
                }
            }
        } else {
            for (int y0 = 0; y0 < n; ++y0) {
                const double q0 = qcost[g.wrap(y0 - x0)];
                const std::int64_t row = static_cast<std::int64_t>(y0) * n;
                for (int y1 = 0; y1 < n; ++y1) {
                    const double v = phiF[row + y1] + q0 + qcost[g.wrap(y1 - x1)];
                    if (v < best_val) {
                        best_val = v;
                        best = row + y1;
                        ties = 0;
                    } else if (v == best_val) {
                        ++ties;
                    }
                }
            }
        }
        res.tie_count += ties;
        res.argmin_idx[xi] = best;

        const VectorXd x = g.coords(xi);
        NodeObjective obj{phi, phiF, x};
        int b0, b1;
        g.unravel(best, b0, b1);
        VectorXd ylift = x + torus_delta(g.coords(best), x);
        double value = best_val;
        const Parabola p0 = polish_axis(obj(b0 - 1, b1), best_val, obj(b0 + 1, b1));
        ylift[0] += p0.t * h;
        value += p0.drop;
        if (g.d == 2) {
            const Parabola p1 =
                polish_axis(obj(b0, b1 - 1), best_val, obj(b0, b1 + 1));
            ylift[1] += p1.t * h;
            value += p1.drop;
        }
        res.values[xi] = value;
        res.ybar.row(xi) = ylift.transpose();
    }
    return res;
}

WeakKamSolution solve_weak_kam(const GridSpec& spec, const Potential& F,
                               const WeakKamOptions& opt) {
    return solve_weak_kam_from(TorusField(spec), F, opt);
}

WeakKamSolution solve_weak_kam_from(const TorusField& phi0, const Potential& F,
                                    const WeakKamOptions& opt) {
    const GridSpec& g = phi0.spec;
    TorusField phi = phi0;
    phi.values.array() -= phi.values[0];

    WeakKamSolution wk;
    bool converged = false;
    for (int it = 1; it <= opt.max_iter; ++it) {
        LaxOleinikResult step = lax_oleinik_apply(phi, F);
        const double r = sup_norm_mod_const(
            TorusField(g, (step.values.values - phi.values).eval()));
        wk.residuals.push_back(r);
        wk.iterations = it;
        wk.residual = r;
        phi.values = step.values.values.array() - step.values.values[0];
        if (r < opt.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "solve_weak_kam: no convergence after " << opt.max_iter
            << " iterations, residual " << wk.residual;
        throw std::runtime_error(msg.str());
    }

    phi.values = phi.values.cwiseMax(0.0);  // clip grid-level undershoot
    wk.psi = phi;

    // one more application against the clamped field, so the reported
    // minimizer map and residual belong to the returned psi
    LaxOleinikResult last = lax_oleinik_apply(wk.psi, F);
    wk.residual = sup_norm_mod_const(
        TorusField(g, (last.values.values - wk.psi.values).eval()));
    wk.ybar = last.ybar;
    wk.argmin_idx = last.argmin_idx;
    wk.tie_count = last.tie_count;
    wk.grad_psi = gradient_fd(wk.psi);

    double lip = 0.0;
    for (int axis = 0; axis < g.d; ++axis)
        lip = std::max(lip, wk.grad_psi[axis].values.array().abs().maxCoeff());
    wk.lip = lip;

    // cut detection: spike of the discrete Hessian in either sign
    TorusField spike = second_difference_probe(wk.psi);
    if (g.d == 2) {
        TorusField neg = wk.psi;
        neg.values = -neg.values;
        const TorusField spike_neg = second_difference_probe(neg);
        spike.values = spike.values.cwiseAbs().cwiseMax(spike_neg.values.cwiseAbs());
    } else {
        spike.values = spike.values.cwiseAbs();
    }
    VectorXd sorted = spike.values;
    std::sort(sorted.data(), sorted.data() + sorted.size());
    const double median = sorted[sorted.size() / 2];
    wk.cut_mask.resize(g.total());
    for (std::int64_t i = 0; i < g.total(); ++i)
        wk.cut_mask[i] = spike[i] > 5.0 * median ? 1 : 0;
    return wk;
}

double semiconcavity_probe(const TorusField& f) {
    return second_difference_probe(f).values.maxCoeff();
}

ContractionReport contraction_report(const WeakKamSolution& wk,
                                     const Potential& F,
                                     const HyperbolicData& hyp) {
    const GridSpec& g = wk.psi.spec;
    ContractionReport rep;
    rep.kappa0_pred = hyp.kappa0;
    rep.kappa0_sq_pred = hyp.kappa0 * hyp.kappa0;
    rep.eps_floor = 10.0 * g.spacing() * g.spacing();

    // ratio psi(ybar)/psi via the fixed-point identity
    //   psi(ybar(x)) = psi(x) - A(ybar(x), x),
    // which avoids interpolating psi near its quadratic minimum
    auto ratio_at = [&](std::int64_t idx) {
        const double psi_x = wk.psi[idx];
        if (psi_x <= 0.0) return 0.0;
        const VectorXd x = g.coords(idx);
        const VectorXd y = wk.ybar.row(idx).transpose();
        const double a = periodic_action(y, x, F);
        return std::max(0.0, 1.0 - a / psi_x);
    };

    rep.kappa_sq_emp = 0.0;
    rep.quadratic_lower_c = std::numeric_limits<double>::infinity();
    rep.delta_far = std::numeric_limits<double>::infinity();
    rep.far_ratio_max = 0.0;
    const VectorXd origin = VectorXd::Zero(g.d);
    for (std::int64_t idx = 1; idx < g.total(); ++idx) {
        const VectorXd x = g.coords(idx);
        const double dist0 = torus_distance(x, origin);
        rep.quadratic_lower_c =
            std::min(rep.quadratic_lower_c, wk.psi[idx] / (dist0 * dist0));
        if (wk.psi[idx] > rep.eps_floor)
            rep.kappa_sq_emp = std::max(rep.kappa_sq_emp, ratio_at(idx));
        if (dist0 >= 0.25) {
            const VectorXd y = wk.ybar.row(idx).transpose();
            rep.delta_far = std::min(rep.delta_far, periodic_action(y, x, F));
            rep.far_ratio_max = std::max(rep.far_ratio_max, ratio_at(idx));
        }
    }

    std::vector<std::int64_t> order(g.total() - 1);
    for (std::int64_t i = 1; i < g.total(); ++i) order[i - 1] = i;
    std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
        return torus_distance(g.coords(a), origin) <
               torus_distance(g.coords(b), origin);
    });
    const int near_count = std::min<std::int64_t>(10, order.size());
    for (int k = 0; k < near_count; ++k)
        rep.near_zero_ratios.push_back(ratio_at(order[k]));

    if (rep.kappa_sq_emp >= 1.0)
        throw std::runtime_error(
            "contraction_report: empirical contraction ratio reached 1");
    return rep;
}

BackwardOrbit backward_orbit_from(const WeakKamSolution& wk, std::int64_t idx,
                                  int n, const Potential& F) {
    const GridSpec& g = wk.psi.spec;
    const VectorXd x = g.coords(idx);
    const VectorXd p = x - wk.ybar.row(idx).transpose();
    return backward_orbit(x, p, n, F, 2.0 * wk.lip + 1.0);
}

}  // namespace hjlab
