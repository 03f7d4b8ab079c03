// Acceptance gates for the kicked Hamilton-Jacobi / transfer-operator lab.
// Prints one [PASS]/[FAIL] line per criterion and exits 0 only if all hold.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "hjlab/hessian.hpp"
#include "hjlab/kernel.hpp"
#include "hjlab/markov.hpp"
#include "hjlab/numerics.hpp"

using namespace hjlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string strf(const char* fmt, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, ap);
    va_end(ap);
    return std::string(buf);
}

struct Gate {
    bool all_ok = true;
    void report(int id, bool ok, const std::string& detail) {
        std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id,
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) all_ok = false;
    }
};

struct NuState {
    double nu = 0.0;
    KernelOperator op;
    DomainPartition part;
    PartitionTrace trace;
};

}  // namespace

int main() {
    Gate gate;
    const GridSpec g{1, 1024};
    const Potential F = Potential::cosine1(1.0);
    const std::vector<double> nu_list = {0.1, 0.05, 0.02, 0.01, 0.005, 0.002};

    WeakKamSolution wk;
    bool have_wk = false;

    // 1. fixed point of the variational operator on the production grid
    try {
        const auto t0 = Clock::now();
        wk = solve_weak_kam(g, F);
        const double dt = seconds_since(t0);
        have_wk = true;
        double min_off = std::numeric_limits<double>::infinity();
        for (Index i = 1; i < g.total(); ++i)
            min_off = std::min(min_off, wk.psi[i]);
        const bool ok = wk.residual <= 1e-8 && wk.iterations <= 5000 &&
                        dt < 30.0 && wk.psi[0] == 0.0 && min_off > 0.0;
        gate.report(1, ok,
                    strf("weak KAM fixed point: residual %.3e in %d iterations, "
                         "%.2f s, psi(0) = %g, min off-origin %.3e",
                         wk.residual, wk.iterations, dt, wk.psi[0], min_off));
    } catch (const std::exception& e) {
        gate.report(1, false, strf("weak KAM fixed point: exception: %s", e.what()));
    }

    HyperbolicData hyp;
    bool have_hyp = false;

    // 2. hyperbolic data at the origin
    try {
        hyp = hyperbolic_linearization(F);
        have_hyp = true;
        const MatrixXd M = F.hess0();
        const MatrixXd I = MatrixXd::Identity(M.rows(), M.cols());
        const double quad =
            (hyp.S_plus * hyp.S_plus + hyp.S_plus * M - M).cwiseAbs().maxCoeff();
        const double inv =
            ((I + M + hyp.S_plus) * (I + M + hyp.S_minus) - I).cwiseAbs().maxCoeff();
        // curvature 3 at the origin: the scalar quadratic gives (sqrt(21)-3)/2
        const double pi = std::acos(-1.0);
        const HyperbolicData h3 =
            hyperbolic_linearization(Potential::cosine1(3.0 / (2.0 * pi * pi)));
        const double s_exact = (std::sqrt(21.0) - 3.0) / 2.0;
        const double s_err = std::abs(h3.S_plus(0, 0) - s_exact);
        const bool ok = quad <= 1e-10 && inv <= 1e-10 && s_err <= 1e-5;
        gate.report(2, ok,
                    strf("hyperbolic linearization: quadratic residual %.2e, "
                         "inverse residual %.2e, scalar oracle error %.2e",
                         quad, inv, s_err));
    } catch (const std::exception& e) {
        gate.report(2, false, strf("hyperbolic linearization: exception: %s", e.what()));
    }

    ContractionReport rep;
    bool have_rep = false;

    // 3. empirical backward contraction of the profile
    try {
        if (!have_wk || !have_hyp) throw std::runtime_error("prerequisites failed");
        rep = contraction_report(wk, F, hyp);
        have_rep = true;
        const double k2 = hyp.kappa0 * hyp.kappa0;
        double worst_rel = 0.0;
        for (double r : rep.near_zero_ratios)
            worst_rel = std::max(worst_rel, std::abs(r - k2) / k2);
        const bool ok = rep.kappa_sq_emp < 1.0 && worst_rel <= 0.10;
        gate.report(3, ok,
                    strf("variational contraction: kappa_sq_emp %.6g < 1, "
                         "near-origin ratios within %.2f%% of kappa0^2 = %.6g",
                         rep.kappa_sq_emp, 100.0 * worst_rel, k2));
    } catch (const std::exception& e) {
        gate.report(3, false, strf("variational contraction: exception: %s", e.what()));
    }

    // 4. determinant routes and spectral floor of the action Hessian
    try {
        if (!have_wk || !have_hyp) throw std::runtime_error("prerequisites failed");
        const auto t0 = Clock::now();
        const double log_mu = std::log(hyp.mu);
        const std::vector<int> depths = {1,  2,  3,  4,  6,  8,  10,
                                         12, 16, 20, 25, 30, 35, 40};
        std::mt19937_64 rng(20260816ULL);
        std::uniform_real_distribution<double> unif(-0.1, 0.1);
        double worst_triple = 0.0;
        double ratio_min = std::numeric_limits<double>::infinity();
        double ratio_max = 0.0;
        bool eig_ok = true;
        for (int seed = 0; seed < 20; ++seed) {
            VectorXd x(1);
            x << unif(rng);
            const Index idx = g.nearest_index(x);
            double eig10 = 0.0;
            for (int n : depths) {
                ActionPath path = build_action_path(wk, hyp, F, idx, n);
                HessianAssembly asmb = assemble_hessian(path, F, wk, hyp);
                const LogDet dd = det_dense(asmb.A);
                if (n <= 12) {
                    const LogDet dt_ = det_transfer(asmb);
                    const LogDet dp = det_orbit_product(path, F, wk, hyp);
                    const double scale = std::max(1.0, std::abs(dd.log_abs));
                    worst_triple = std::max(
                        worst_triple,
                        std::max(std::abs(dd.log_abs - dt_.log_abs),
                                 std::abs(dd.log_abs - dp.log_abs)) /
                            scale);
                }
                const double ratio = std::exp(dd.log_abs - n * log_mu);
                ratio_min = std::min(ratio_min, ratio);
                ratio_max = std::max(ratio_max, ratio);
                if (n == 10) eig10 = min_eigenvalue(asmb.A);
                if (n == 40) eig_ok = eig_ok && min_eigenvalue(asmb.A) >= 0.5 * eig10;
            }
        }
        const double C_hat = std::max(ratio_max, 1.0 / ratio_min);
        const double dt = seconds_since(t0);
        const bool ok = worst_triple <= 1e-6 && C_hat <= 10.0 && eig_ok && dt < 60.0;
        gate.report(4, ok,
                    strf("Hessian determinants: triple agreement %.2e, det/mu^n "
                         "within C_hat = %.3f <= 10, spectral floor %s, %.2f s",
                         worst_triple, C_hat, eig_ok ? "held" : "violated", dt));
    } catch (const std::exception& e) {
        gate.report(4, false, strf("Hessian determinants: exception: %s", e.what()));
    }

    WeakKamSolution wk128;
    DomainPartition part128;
    bool have_small = false;

    // 5. kernel and layer identities
    try {
        if (!have_wk) throw std::runtime_error("prerequisites failed");
        // mass preservation of the flat kernel
        const GridSpec gf1{1, 256};
        TorusField one1(gf1, 1.0);
        const double mass1 =
            (apply_linear(build_kernel(gf1, Potential::free(1), 0.02), one1)
                 .values.array() -
             1.0)
                .abs()
                .maxCoeff();
        const GridSpec gf2{2, 32};
        TorusField one2(gf2, 1.0);
        const double mass2 =
            (apply_linear(build_kernel(gf2, Potential::free(2), 0.02), one2)
                 .values.array() -
             1.0)
                .abs()
                .maxCoeff();
        // conjugation identity on a reduced grid
        const GridSpec gc{1, 128};
        wk128 = solve_weak_kam(gc, F);
        const double nu_c = 0.02;
        KernelOperator plain = build_kernel(gc, F, nu_c);
        KernelOperator conj = build_kernel(gc, F, nu_c, &wk128.psi);
        TorusField u = random_smooth_field(gc, 21, 1.0);
        TorusField lhs = apply_log(conj, u);
        TorusField shifted(gc);
        shifted.values = u.values - wk128.psi.values / (2.0 * nu_c);
        TorusField rhs = apply_log(plain, shifted);
        rhs.values += wk128.psi.values / (2.0 * nu_c);
        const double conj_defect =
            (lhs.values - rhs.values).cwiseAbs().maxCoeff();
        // layer normalization and telescoping
        const double nu_m = 0.05;
        KernelOperator op_m = build_kernel(gc, F, nu_m, &wk128.psi);
        part128 = build_domain_partition(wk128, nu_m, core_radius_for(nu_m, 0.1));
        have_small = true;
        std::vector<MarkovLayer> layers = build_markov_layers(op_m, 5);
        double norm_defect = 0.0;
        for (const MarkovLayer& l : layers)
            norm_defect = std::max(norm_defect, l.norm_defect);
        TorusField log_u = random_smooth_field(gc, 91, 0.7);
        double tel = 0.0;
        for (int n = 1; n <= 5; ++n)
            tel = std::max(tel, telescope_check(op_m, layers, log_u, n));
        const bool ok = mass1 <= 1e-8 && mass2 <= 1e-8 && conj_defect <= 1e-8 &&
                        norm_defect <= 1e-10 && tel <= 1e-8;
        gate.report(5, ok,
                    strf("operator identities: flat mass defect %.2e / %.2e, "
                         "conjugation %.2e, layer normalization %.2e, "
                         "telescoping %.2e",
                         mass1, mass2, conj_defect, norm_defect, tel));
    } catch (const std::exception& e) {
        gate.report(5, false, strf("operator identities: exception: %s", e.what()));
    }

    // shared sweep state for criteria 6-8
    std::vector<NuState> states;
    std::string prep_error;
    if (have_wk) {
        try {
            for (double nu : nu_list) {
                NuState s;
                s.nu = nu;
                s.op = build_kernel(g, F, nu, &wk.psi);
                s.part = build_domain_partition(wk, nu, core_radius_for(nu, 0.1));
                s.trace = partition_trace(s.op, s.part, 20);
                states.push_back(std::move(s));
            }
        } catch (const std::exception& e) {
            states.clear();
            prep_error = e.what();
        }
    } else {
        prep_error = "prerequisites failed";
    }

    // 6. partition-function growth and envelope ratio
    try {
        if (states.empty()) throw std::runtime_error(prep_error);
        const double log_mu = std::log(hyp.mu);
        const NuState* s001 = nullptr;
        for (const NuState& s : states)
            if (std::abs(s.nu - 0.01) < 1e-12) s001 = &s;
        if (!s001) throw std::runtime_error("nu = 0.01 missing from sweep");
        std::vector<double> xs, ys;
        for (std::size_t n = 0; n < s001->trace.log_q.size(); ++n) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(s001->trace.log_q[n]);
        }
        const AffineFit fit = fit_affine(xs, ys);
        const bool growth_ok = std::abs(fit.slope - log_mu) <= 0.10 * log_mu;
        const double twice_consistency =
            100.0 * std::abs(-2.0 * fit.slope - log_mu) / log_mu;
        double ratio_max = 0.0;
        for (const NuState& s : states)
            for (double r : s.trace.ratio_hi) ratio_max = std::max(ratio_max, r);
        const bool ratio_ok = ratio_max <= 50.0;
        gate.report(6, growth_ok && ratio_ok,
                    strf("partition-function scaling: fitted growth rate %.4f vs "
                         "log mu %.4f (within 10%%: %s; -2*slope matches log mu "
                         "to %.2f%%), mass/envelope ratio max %.3f <= 50: %s",
                         fit.slope, log_mu, growth_ok ? "yes" : "no",
                         twice_consistency, ratio_max, ratio_ok ? "yes" : "no"));
    } catch (const std::exception& e) {
        gate.report(6, false, strf("partition-function scaling: exception: %s", e.what()));
    }

    // 7. drift and minorization certificates across the sweep
    try {
        if (states.empty()) throw std::runtime_error(prep_error);
        if (!have_rep) throw std::runtime_error("contraction report unavailable");
        double m_min = std::numeric_limits<double>::infinity();
        double m_max = 0.0;
        double alpha_slack = std::numeric_limits<double>::infinity();
        bool gamma_ok = true;
        for (const NuState& s : states) {
            MarkovLayer layer = markov_layer_from(s.op, s.trace, 1);
            TorusField V = drift_weight(wk, s.part);
            DriftCertificate drift =
                certify_drift(layer, V, s.nu, rep.kappa_sq_emp);
            gamma_ok = gamma_ok && drift.gamma < 1.0;
            const double R_mult =
                2.5 * drift.M_over_nu / (1.0 - drift.gamma) + 1.0;
            MinorizationCertificate minor =
                certify_minorization(layer, V, R_mult, s.nu);
            HMParams params = hm_parameters(drift.gamma, drift.M_drift,
                                            minor.alpha0, R_mult * s.nu);
            // throws if any trial field beats the certified factor
            ContractionVerification ver =
                verify_hm_contraction(layer, V, params, 100, 2026);
            alpha_slack =
                std::min(alpha_slack, params.alpha - ver.worst_ratio);
            m_min = std::min(m_min, drift.M_over_nu);
            m_max = std::max(m_max, drift.M_over_nu);
        }
        const bool uniform_ok = m_max / m_min <= 3.0;
        gate.report(7, gamma_ok && uniform_ok,
                    strf("drift certificates: gamma < 1 at all %zu viscosities, "
                         "M/nu spread %.3f <= 3, contraction slack >= %.3f over "
                         "100 random fields each",
                         states.size(), m_max / m_min, alpha_slack));
    } catch (const std::exception& e) {
        gate.report(7, false, strf("drift certificates: exception: %s", e.what()));
    }

    // 8. decay-rate sweep with grid doubling
    try {
        if (states.empty()) throw std::runtime_error(prep_error);
        const auto t0 = Clock::now();
        TorusField log_u0(g, 0.0);
        std::vector<double> lam;
        double r2_min = 1.0;
        for (const NuState& s : states) {
            TorusField log_v0(g);
            log_v0.values =
                random_smooth_field(g, 7, 1.0).values / (2.0 * s.nu);
            LyapunovEstimate est = lyapunov_exponent(s.op, log_u0, log_v0, 60);
            lam.push_back(est.lambda_hat);
            r2_min = std::min(r2_min, est.r2);
        }
        bool positive_ok = true;
        for (double l : lam) positive_ok = positive_ok && l > 0.0;
        std::vector<double> sorted = lam;
        std::sort(sorted.begin(), sorted.end());
        const double median =
            0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
        const double uniformity = sorted.front() / median;

        const GridSpec g2{1, 2048};
        WeakKamSolution wk2 = solve_weak_kam(g2, F);
        TorusField log_u0_2(g2, 0.0);
        double worst_shift = 0.0;
        double r2_min_2 = 1.0;
        for (std::size_t i = 0; i < states.size(); ++i) {
            KernelOperator op2 = build_kernel(g2, F, states[i].nu, &wk2.psi);
            TorusField log_v0(g2);
            log_v0.values = random_smooth_field(g2, 7, 1.0).values /
                            (2.0 * states[i].nu);
            LyapunovEstimate est = lyapunov_exponent(op2, log_u0_2, log_v0, 60);
            r2_min_2 = std::min(r2_min_2, est.r2);
            worst_shift = std::max(
                worst_shift, std::abs(est.lambda_hat - lam[i]) / lam[i]);
        }
        const double dt = seconds_since(t0);
        const bool ok = positive_ok && r2_min >= 0.99 && uniformity >= 0.5 &&
                        r2_min_2 >= 0.99 && worst_shift <= 0.10 && dt < 600.0;
        gate.report(8, ok,
                    strf("decay-rate sweep: lambda in [%.4f, %.4f], min r2 %.4f, "
                         "min/median %.4f >= 0.5, grid-doubling shift %.2f%% <= "
                         "10%%, %.1f s",
                         sorted.front(), sorted.back(),
                         std::min(r2_min, r2_min_2), uniformity,
                         100.0 * worst_shift, dt));
    } catch (const std::exception& e) {
        gate.report(8, false, strf("decay-rate sweep: exception: %s", e.what()));
    }

    // 9. weighted-norm equivalence and the log-ratio bound, randomized
    try {
        if (!have_small) throw std::runtime_error("prerequisites failed");
        const GridSpec gc{1, 128};
        TorusField V = drift_weight(wk128, part128);
        const double beta = 5.0;
        const double vmax = V.values.maxCoeff();
        std::mt19937_64 rng(9001);
        std::normal_distribution<double> gauss(0.0, 1.0);
        int norm_violations = 0;
        for (int t = 0; t < 1000; ++t) {
            TorusField u(gc);
            if (t % 2 == 0) {
                u.values = random_smooth_field(
                               gc, 2000 + static_cast<std::uint64_t>(t), 1.0)
                               .values;
            } else {
                for (Index i = 0; i < gc.total(); ++i) u.values(i) = gauss(rng);
            }
            const double w = weighted_norm_mod_const(u, V, beta);
            const double s = sup_norm_mod_const(u);
            if (w > s + 1e-9) ++norm_violations;
            if (s > (1.0 + beta * vmax) * w + 1e-9) ++norm_violations;
        }
        int ratio_violations = 0;
        for (int t = 0; t < 1000; ++t) {
            TorusField u(gc), v(gc);
            u.values = 1.3 +
                       0.2 * random_smooth_field(
                                 gc, 20000 + static_cast<std::uint64_t>(t), 1.0)
                                 .values.array();
            v.values = 1.3 +
                       0.2 * random_smooth_field(
                                 gc, 30000 + static_cast<std::uint64_t>(t), 1.0)
                                 .values.array();
            RatioStarCheck chk = ratio_star_check(u, v);
            if (!chk.applicable || !chk.holds) ++ratio_violations;
        }
        const bool ok = norm_violations == 0 && ratio_violations == 0;
        gate.report(9, ok,
                    strf("norm lemmas: %d equivalence violations and %d "
                         "log-ratio violations over 1000 trials each",
                         norm_violations, ratio_violations));
    } catch (const std::exception& e) {
        gate.report(9, false, strf("norm lemmas: exception: %s", e.what()));
    }

    // 10. exponential convergence of the inviscid iteration
    try {
        if (!have_wk) throw std::runtime_error("prerequisites failed");
        bool ok = true;
        double slope_min = 0.0, slope_max = -std::numeric_limits<double>::infinity();
        double r2_min = 1.0;
        for (int t = 0; t < 10; ++t) {
            TorusField phi =
                random_smooth_field(g, 100 + static_cast<std::uint64_t>(t), 1.0);
            std::vector<double> xs, ys;
            for (int k = 0; k <= 40; ++k) {
                TorusField diff(g);
                diff.values = phi.values - wk.psi.values;
                const double dist = sup_norm_mod_const(diff);
                // stay above the solver's own fixed-point accuracy
                if (dist < 1e-10) break;
                xs.push_back(static_cast<double>(k));
                ys.push_back(std::log(dist));
                phi = lax_oleinik_apply(phi, F).values;
            }
            const AffineFit fit = fit_affine(xs, ys);
            ok = ok && xs.size() >= 3 && fit.slope < 0.0 && fit.r2 >= 0.99;
            slope_min = std::min(slope_min, fit.slope);
            slope_max = std::max(slope_max, fit.slope);
            r2_min = std::min(r2_min, fit.r2);
        }
        gate.report(10, ok,
                    strf("inviscid benchmark: 10 random starts decay with rates "
                         "[%.3f, %.3f] per kick, min r2 %.4f",
                         -slope_max, -slope_min, r2_min));
    } catch (const std::exception& e) {
        gate.report(10, false, strf("inviscid benchmark: exception: %s", e.what()));
    }

    std::printf("acceptance: %s\n", gate.all_ok ? "all criteria passed"
                                                : "at least one criterion failed");
    return gate.all_ok ? 0 : 4;
}
