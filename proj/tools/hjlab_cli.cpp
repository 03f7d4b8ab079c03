#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hjlab/config.hpp"
#include "hjlab/csv.hpp"
#include "hjlab/grid.hpp"
#include "hjlab/hessian.hpp"
#include "hjlab/kernel.hpp"
#include "hjlab/lax_oleinik.hpp"
#include "hjlab/markov.hpp"
#include "hjlab/numerics.hpp"
#include "hjlab/potential.hpp"
#include "hjlab/twist.hpp"

namespace {

using namespace hjlab;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCheckFailed = 4;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

Potential make_potential(const ExperimentConfig& cfg) {
    if (cfg.potential == "free") return Potential::free(cfg.d);
    if (cfg.d == 1) return Potential::cosine1(cfg.a);
    VectorXd amp(2);
    amp << cfg.a, (cfg.a2 >= 0.0 ? cfg.a2 : cfg.a);
    return Potential::cosine(2, amp, cfg.c);
}

void require_cosine(const ExperimentConfig& cfg, const char* cmd) {
    if (cfg.potential != "cosine")
        throw ConfigError(std::string(cmd) +
                          ": needs a nondegenerate potential (potential = cosine)");
}

std::filesystem::path out_path(const ExperimentConfig& cfg,
                               const std::string& name) {
    return std::filesystem::path(cfg.out) / name;
}

std::string nu_tag(double nu) {
    std::ostringstream os;
    os << nu;
    std::string s = os.str();
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

struct BaseState {
    GridSpec grid;
    Potential F;
    WeakKamSolution wk;
    HyperbolicData hyp;
    ContractionReport rep;
};

BaseState solve_base(const ExperimentConfig& cfg) {
    BaseState st{GridSpec{cfg.d, cfg.n}, make_potential(cfg)};
    st.wk = solve_weak_kam(st.grid, st.F,
                           WeakKamOptions{cfg.wk_tol, cfg.wk_max_iter});
    st.hyp = hyperbolic_linearization(st.F);
    st.rep = contraction_report(st.wk, st.F, st.hyp);
    return st;
}

void write_gnuplot(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "# gnuplot helper, generated alongside the csv\n" << body;
}

// ---------------------------------------------------------------- weak-kam

int cmd_weak_kam(const ExperimentConfig& cfg) {
    require_cosine(cfg, "weak-kam");
    BaseState st = solve_base(cfg);
    const GridSpec& g = st.grid;

    std::vector<std::string> header;
    for (int k = 0; k < g.d; ++k) header.push_back("x" + std::to_string(k) + " [torus]");
    header.push_back("psi [action]");
    for (int k = 0; k < g.d; ++k) header.push_back("dpsi" + std::to_string(k) + " [action/length]");
    for (int k = 0; k < g.d; ++k) header.push_back("ybar" + std::to_string(k) + " [torus lift]");
    header.push_back("cut [0/1]");

    CsvWriter psi_csv(out_path(cfg, "psi.csv"), header);
    for (Index i = 0; i < g.total(); ++i) {
        VectorXd x = g.coords(i);
        std::vector<CsvCell> row;
        for (int k = 0; k < g.d; ++k) row.emplace_back(x(k));
        row.emplace_back(st.wk.psi.values(i));
        for (int k = 0; k < g.d; ++k)
            row.emplace_back(st.wk.grad_psi[static_cast<std::size_t>(k)].values(i));
        for (int k = 0; k < g.d; ++k) row.emplace_back(st.wk.ybar(i, k));
        row.emplace_back(static_cast<std::int64_t>(st.wk.cut_mask[static_cast<std::size_t>(i)]));
        psi_csv.row(row);
    }
    psi_csv.finish();

    CsvWriter rep_csv(out_path(cfg, "contraction_report.csv"),
                      {"quantity", "value"});
    auto put = [&rep_csv](const std::string& k, double v) {
        rep_csv.row({k, v});
    };
    put("kappa_sq_emp", st.rep.kappa_sq_emp);
    put("kappa0_pred", st.rep.kappa0_pred);
    put("kappa0_sq_pred", st.rep.kappa0_sq_pred);
    put("quadratic_lower_c", st.rep.quadratic_lower_c);
    put("eps_floor", st.rep.eps_floor);
    put("delta_far", st.rep.delta_far);
    put("far_ratio_max", st.rep.far_ratio_max);
    for (std::size_t j = 0; j < st.rep.near_zero_ratios.size(); ++j)
        put("near_zero_ratio_" + std::to_string(j), st.rep.near_zero_ratios[j]);
    put("solver_residual", st.wk.residual);
    put("solver_iterations", st.wk.iterations);
    put("lip", st.wk.lip);
    rep_csv.finish();

    if (g.d == 1)
        write_gnuplot(out_path(cfg, "psi.gp"),
                      "set datafile separator ','\n"
                      "set key autotitle columnhead\n"
                      "plot 'psi.csv' using 1:2 with lines title 'psi'\n");

    std::printf("weak-kam: residual %.3e after %d iterations, lip %.6f, "
                "kappa_sq_emp %.6f\n",
                st.wk.residual, st.wk.iterations, st.wk.lip, st.rep.kappa_sq_emp);
    return 0;
}

// -------------------------------------------------------------- hyperbolic

int cmd_hyperbolic(const ExperimentConfig& cfg) {
    require_cosine(cfg, "hyperbolic");
    Potential F = make_potential(cfg);
    HyperbolicData hyp = hyperbolic_linearization(F);
    const int d = cfg.d;

    const MatrixXd quad_res =
        hyp.S_plus * hyp.S_plus + hyp.S_plus * hyp.M - hyp.M;
    const MatrixXd I = MatrixXd::Identity(d, d);
    const MatrixXd inv_res =
        (I + hyp.M + hyp.S_plus) * (I + hyp.M + hyp.S_minus) - I;

    std::vector<std::string> header = {"d", "mu", "kappa0",
                                       "quadratic_residual", "inverse_residual"};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            header.push_back("s_plus_" + std::to_string(i) + std::to_string(j));
    CsvWriter csv(out_path(cfg, "hyperbolic.csv"), header);
    std::vector<CsvCell> row = {static_cast<std::int64_t>(d), hyp.mu, hyp.kappa0,
                                quad_res.norm(), inv_res.norm()};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) row.emplace_back(hyp.S_plus(i, j));
    csv.row(row);
    csv.finish();

    std::printf("hyperbolic: mu %.12f kappa0 %.12f residuals %.3e %.3e\n",
                hyp.mu, hyp.kappa0, quad_res.norm(), inv_res.norm());
    return 0;
}

// ----------------------------------------------------------------- hessian

std::vector<int> parse_n_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        int v = 0;
        try {
            v = std::stoi(item);
        } catch (const std::exception&) {
            throw ConfigError("hessian: bad entry in n list: " + item);
        }
        if (v < 1) throw ConfigError("hessian: path depth must be >= 1");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("hessian: empty n list");
    return out;
}

VectorXd parse_point(const std::string& text, int d) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
    if (static_cast<int>(vals.size()) != d)
        throw ConfigError("hessian: seed point has wrong dimension");
    VectorXd x(d);
    for (int k = 0; k < d; ++k) x(k) = vals[static_cast<std::size_t>(k)];
    return x;
}

int cmd_hessian(const ExperimentConfig& cfg, const std::string& x_text,
                const std::string& n_text) {
    require_cosine(cfg, "hessian");
    BaseState st = solve_base(cfg);
    const std::vector<int> n_list = parse_n_list(n_text);
    const VectorXd x = parse_point(x_text, cfg.d);
    const Index x_idx = st.grid.nearest_index(x);
    const double log_mu = std::log(st.hyp.mu);

    CsvWriter csv(out_path(cfg, "hessian.csv"),
                  {"n", "logdet_dense", "logdet_transfer", "logdet_orbit",
                   "min_eig", "det_over_mu_n", "el_residual", "newton_iters"});
    for (int n : n_list) {
        ActionPath path = build_action_path(st.wk, st.hyp, st.F, x_idx, n);
        HessianAssembly asm_ = assemble_hessian(path, st.F, st.wk, st.hyp);
        LogDet dd = det_dense(asm_.A);
        LogDet dt = det_transfer(asm_);
        LogDet dp = det_orbit_product(path, st.F, st.wk, st.hyp);
        const double min_eig = min_eigenvalue(asm_.A);
        const double ratio = std::exp(dd.log_abs - n * log_mu);
        csv.row({static_cast<std::int64_t>(n), dd.log_abs, dt.log_abs,
                 dp.log_abs, min_eig, ratio, path.el_residual,
                 static_cast<std::int64_t>(path.newton_iterations)});
    }
    csv.finish();
    std::printf("hessian: %zu depths at grid index %lld written\n",
                n_list.size(), static_cast<long long>(x_idx));
    return 0;
}

// --------------------------------------------------------- partition-trace

int cmd_partition_trace(const ExperimentConfig& cfg) {
    require_cosine(cfg, "partition-trace");
    BaseState st = solve_base(cfg);
    const double log_mu = std::log(st.hyp.mu);

    for (double nu : cfg.nu_list) {
        KernelOperator op = build_kernel(st.grid, st.F, nu, &st.wk.psi);
        DomainPartition part = build_domain_partition(st.wk, nu, core_radius_for(nu, cfg.r_U));
        PartitionTrace tr = partition_trace(op, part, cfg.trace_n_max);

        CsvWriter csv(out_path(cfg, "trace_nu" + nu_tag(nu) + ".csv"),
                      {"n", "log_q [log mass]", "growth [per kick]",
                       "ratio_hi [dimensionless]"});
        for (std::size_t n = 0; n < tr.log_q.size(); ++n) {
            csv.row({static_cast<std::int64_t>(n), tr.log_q[n],
                     n < tr.growth.size() ? tr.growth[n]
                                          : std::numeric_limits<double>::quiet_NaN(),
                     tr.ratio_hi[n]});
        }
        csv.finish();

        std::vector<double> xs, ys;
        for (std::size_t n = 0; n < tr.log_q.size(); ++n) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(tr.log_q[n]);
        }
        AffineFit fit = fit_affine(xs, ys);
        double ratio_max = 0.0;
        for (double r : tr.ratio_hi) ratio_max = std::max(ratio_max, r);
        std::printf("partition-trace nu %g: Q slope %.4f (log mu %.4f, "
                    "-log(mu)/2 %.4f), max ratio_hi %.3f\n",
                    nu, fit.slope, log_mu, -0.5 * log_mu, ratio_max);
    }
    return 0;
}

// ------------------------------------------------------------ markov-check

int cmd_markov_check(const ExperimentConfig& cfg) {
    GridSpec g{cfg.d, cfg.n};
    Potential F = make_potential(cfg);
    const bool conj = cfg.potential == "cosine";

    WeakKamSolution wk;
    if (conj)
        wk = solve_weak_kam(g, F, WeakKamOptions{cfg.wk_tol, cfg.wk_max_iter});

    CsvWriter csv(out_path(cfg, "markov_check.csv"),
                  {"nu", "layers", "max_norm_defect", "telescope_defect",
                   "mass_defect"});
    for (double nu : cfg.nu_list) {
        KernelOperator op = build_kernel(g, F, nu, conj ? &wk.psi : nullptr);

        double mass_defect = std::numeric_limits<double>::quiet_NaN();
        if (!conj) {
            TorusField one_log(g, 0.0);
            TorusField out = apply_log(op, one_log);
            mass_defect = out.values.cwiseAbs().maxCoeff();
        }

        const int depth = 5;
        std::vector<MarkovLayer> layers = build_markov_layers(op, depth);
        double max_defect = 0.0;
        for (const auto& l : layers) max_defect = std::max(max_defect, l.norm_defect);
        TorusField u = random_smooth_field(g, cfg.seed, 1.0);
        const double tele = telescope_check(op, layers, u, depth);

        csv.row({nu, static_cast<std::int64_t>(depth), max_defect, tele,
                 mass_defect});
        std::printf("markov-check nu %g: norm defect %.3e, telescope %.3e\n", nu,
                    max_defect, tele);
        if (max_defect > 1e-8 || tele > 1e-8)
            throw std::runtime_error("markov-check: defect exceeds 1e-8");
    }
    csv.finish();
    return 0;
}

// ---------------------------------------------------------- lyapunov-sweep

struct SweepRow {
    double nu = 0.0;
    double lambda_hat = std::numeric_limits<double>::quiet_NaN();
    double fit_r2 = std::numeric_limits<double>::quiet_NaN();
    double gamma = std::numeric_limits<double>::quiet_NaN();
    double M_drift_over_nu = std::numeric_limits<double>::quiet_NaN();
    double alpha0 = std::numeric_limits<double>::quiet_NaN();
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double kappa_sq_emp = std::numeric_limits<double>::quiet_NaN();
    double mu = std::numeric_limits<double>::quiet_NaN();
    double Q_ratio_max = std::numeric_limits<double>::quiet_NaN();
    double partition_ratio_max = std::numeric_limits<double>::quiet_NaN();
    double psi_nu_dist = std::numeric_limits<double>::quiet_NaN();
    double runtime_s = 0.0;
    std::string flag = "ok";
};

SweepRow sweep_one(const ExperimentConfig& cfg, const BaseState& st,
                   const TorusField& phi_r, double nu) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepRow row;
    row.nu = nu;
    row.kappa_sq_emp = st.rep.kappa_sq_emp;
    row.mu = st.hyp.mu;

    KernelOperator op = build_kernel(st.grid, st.F, nu, &st.wk.psi);
    DomainPartition part = build_domain_partition(st.wk, nu, core_radius_for(nu, cfg.r_U));
    PartitionTrace tr = partition_trace(op, part, cfg.trace_n_max);
    double q_ratio = 1.0, ratio_hi = 0.0;
    for (double gr : tr.growth) q_ratio = std::max(q_ratio, std::exp(std::abs(gr)));
    for (double r : tr.ratio_hi) ratio_hi = std::max(ratio_hi, r);
    row.Q_ratio_max = q_ratio;
    row.partition_ratio_max = ratio_hi;

    MarkovLayer layer = markov_layer_from(op, tr, cfg.cert_layer);
    TorusField V = drift_weight(st.wk, part);
    DriftCertificate drift = certify_drift(layer, V, nu, st.rep.kappa_sq_emp);
    row.gamma = drift.gamma;
    row.M_drift_over_nu = drift.M_over_nu;

    double R_mult = cfg.R_mult;
    if (R_mult <= 0.0)
        R_mult = 2.5 * drift.M_over_nu / (1.0 - drift.gamma) + 1.0;
    MinorizationCertificate minor = certify_minorization(layer, V, R_mult, nu);
    row.alpha0 = minor.alpha0;

    HMParams hm = hm_parameters(drift.gamma, drift.M_drift, minor.alpha0,
                                minor.level_R_nu);
    row.alpha = hm.alpha;
    verify_hm_contraction(layer, V, hm, cfg.cert_trials, cfg.seed);

    TorusField log_u0(st.grid, 0.0);
    TorusField log_v0(st.grid);
    log_v0.values = phi_r.values / (2.0 * nu);
    LyapunovEstimate lyap =
        lyapunov_exponent(op, log_u0, log_v0, cfg.lyap_n_max);
    row.lambda_hat = lyap.lambda_hat;
    row.fit_r2 = lyap.r2;
    if (lyap.window_shrunk) row.flag = "ok(short-fit-window)";

    KernelOperator plain = build_kernel(st.grid, st.F, nu, nullptr);
    StationaryLogSolution stat = stationary_log_solution(plain);
    TorusField diff(st.grid);
    diff.values = stat.psi_nu.values - st.wk.psi.values;
    row.psi_nu_dist = sup_norm_mod_const(diff);

    row.runtime_s = seconds_since(t0);
    return row;
}

int cmd_lyapunov_sweep(const ExperimentConfig& cfg) {
    require_cosine(cfg, "lyapunov-sweep");
    BaseState st = solve_base(cfg);
    TorusField phi_r = random_smooth_field(st.grid, cfg.seed, 1.0);

    CsvWriter csv(out_path(cfg, "sweep.csv"),
                  {"nu", "lambda_hat [per kick]", "fit_r2", "gamma",
                   "M_drift_over_nu", "alpha0", "alpha", "kappa_sq_emp", "mu",
                   "Q_ratio_max", "partition_ratio_max", "psi_nu_dist [action]",
                   "runtime_s", "flag"});
    std::vector<SweepRow> rows;
    int failures = 0;
    for (double nu : cfg.nu_list) {
        SweepRow row;
        try {
            row = sweep_one(cfg, st, phi_r, nu);
        } catch (const std::exception& e) {
            row.nu = nu;
            row.flag = std::string("fail: ") + e.what();
            ++failures;
        }
        rows.push_back(row);
        csv.row({row.nu, row.lambda_hat, row.fit_r2, row.gamma,
                 row.M_drift_over_nu, row.alpha0, row.alpha, row.kappa_sq_emp,
                 row.mu, row.Q_ratio_max, row.partition_ratio_max,
                 row.psi_nu_dist, row.runtime_s, row.flag});
        std::printf("sweep nu %g: lambda_hat %.4f (r2 %.4f) gamma %.4f "
                    "alpha %.6f [%s]\n",
                    row.nu, row.lambda_hat, row.fit_r2, row.gamma, row.alpha,
                    row.flag.c_str());
    }
    csv.finish();

    write_gnuplot(out_path(cfg, "sweep.gp"),
                  "set datafile separator ','\n"
                  "set key autotitle columnhead\n"
                  "set logscale x\n"
                  "plot 'sweep.csv' using 1:2 with linespoints title 'lambda_hat'\n");

    std::vector<double> lams;
    for (const auto& r : rows)
        if (std::isfinite(r.lambda_hat)) lams.push_back(r.lambda_hat);
    if (!lams.empty()) {
        std::sort(lams.begin(), lams.end());
        const double mn = lams.front();
        const double med = lams[lams.size() / 2];
        std::printf("sweep summary: min lambda_hat %.6f, min/median %.4f, "
                    "%d/%zu entries failed\n",
                    mn, med > 0 ? mn / med : 0.0, failures, cfg.nu_list.size());
    }
    if (failures == static_cast<int>(cfg.nu_list.size()))
        throw std::runtime_error("lyapunov-sweep: every viscosity failed");
    return 0;
}

// ---------------------------------------------------------------- selftest

struct SelfTest {
    int passed = 0;
    int failed = 0;
    void check(const std::string& name, bool ok) {
        std::printf("  [%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
        (ok ? passed : failed)++;
    }
};

int cmd_selftest(const ExperimentConfig& base) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = base;
    cfg.n = std::min(cfg.n, 128);
    cfg.d = 1;
    cfg.potential = "cosine";
    cfg.nu_list = {0.05};
    cfg.trace_n_max = std::min(cfg.trace_n_max, 10);
    validate(cfg);

    SelfTest t;
    BaseState st = solve_base(cfg);
    const GridSpec& g = st.grid;
    const double nu = cfg.nu_list.front();

    t.check("fixed point residual below tolerance",
            st.wk.residual <= cfg.wk_tol);
    t.check("psi vanishes only at the origin",
            st.wk.psi.values(0) == 0.0 &&
                st.wk.psi.values.segment(1, g.total() - 1).minCoeff() > 0.0);

    {
        TorusField bad = st.wk.psi;
        for (Index i = 0; i < g.total(); ++i)
            bad.values(i) += 0.1 * std::sin(2.0 * M_PI * g.coords(i)(0));
        LaxOleinikResult Tbad = lax_oleinik_apply(bad, st.F);
        TorusField diff(g);
        diff.values = Tbad.values.values - bad.values;
        t.check("injected corruption breaks the fixed point",
                sup_norm_mod_const(diff) > 1e-3);
    }

    {
        const MatrixXd quad =
            st.hyp.S_plus * st.hyp.S_plus + st.hyp.S_plus * st.hyp.M - st.hyp.M;
        t.check("hyperbolic quadratic residual", quad.norm() <= 1e-10);
        t.check("contraction estimate below one", st.rep.kappa_sq_emp < 1.0);
    }

    {
        ActionPath path = build_action_path(st.wk, st.hyp, st.F,
                                            g.nearest_index(VectorXd::Constant(1, 0.2)), 6);
        HessianAssembly asm_ = assemble_hessian(path, st.F, st.wk, st.hyp);
        const double dd = det_dense(asm_.A).log_abs;
        const double dt = det_transfer(asm_).log_abs;
        const double dp = det_orbit_product(path, st.F, st.wk, st.hyp).log_abs;
        const double scale = std::max(1.0, std::abs(dd));
        t.check("determinant routes agree",
                std::abs(dd - dt) / scale <= 1e-6 &&
                    std::abs(dd - dp) / scale <= 1e-6);
        t.check("action hessian positive definite", min_eigenvalue(asm_.A) > 0.0);
    }

    {
        KernelOperator heat = build_kernel(g, Potential::free(1), nu, nullptr);
        TorusField one_log(g, 0.0);
        t.check("free kernel preserves mass",
                apply_log(heat, one_log).values.cwiseAbs().maxCoeff() <= 1e-8);

        KernelOperator plain = build_kernel(g, st.F, nu, nullptr);
        KernelOperator conj = build_kernel(g, st.F, nu, &st.wk.psi);
        TorusField u = random_smooth_field(g, cfg.seed + 1, 1.0);
        TorusField lhs = apply_log(conj, u);
        TorusField shifted(g);
        shifted.values = u.values - st.wk.psi.values / (2.0 * nu);
        TorusField rhs = apply_log(plain, shifted);
        rhs.values += st.wk.psi.values / (2.0 * nu);
        t.check("conjugation identity",
                (lhs.values - rhs.values).cwiseAbs().maxCoeff() <= 1e-8);

        std::vector<MarkovLayer> layers = build_markov_layers(conj, 3);
        double defect = 0.0;
        for (const auto& l : layers) defect = std::max(defect, l.norm_defect);
        t.check("markov columns normalized", defect <= 1e-10);
        t.check("telescoping product matches",
                telescope_check(conj, layers, u, 3) <= 1e-8);

        DomainPartition part = build_domain_partition(st.wk, nu, core_radius_for(nu, cfg.r_U));
        PartitionTrace tr = partition_trace(conj, part, cfg.trace_n_max);
        MarkovLayer layer = markov_layer_from(conj, tr, 1);
        TorusField V = drift_weight(st.wk, part);
        try {
            DriftCertificate drift = certify_drift(layer, V, nu, st.rep.kappa_sq_emp);
            const double R_mult =
                2.5 * drift.M_over_nu / (1.0 - drift.gamma) + 1.0;
            MinorizationCertificate minor = certify_minorization(layer, V, R_mult, nu);
            HMParams hm = hm_parameters(drift.gamma, drift.M_drift, minor.alpha0,
                                        minor.level_R_nu);
            ContractionVerification ver =
                verify_hm_contraction(layer, V, hm, 20, cfg.seed);
            t.check("drift/minorization certificate verified",
                    ver.worst_ratio <= hm.alpha + 1e-6);
        } catch (const std::exception& e) {
            std::printf("    (%s)\n", e.what());
            t.check("drift/minorization certificate verified", false);
        }

        TorusField log_u0(g, 0.0);
        TorusField log_v0(g);
        log_v0.values = random_smooth_field(g, cfg.seed, 1.0).values / (2.0 * nu);
        LyapunovEstimate lyap = lyapunov_exponent(conj, log_u0, log_v0, 100);
        t.check("log-field distance decays", lyap.lambda_hat > 0.0 && lyap.r2 > 0.9);
    }

    {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        int bad62 = 0, bad63 = 0, applicable = 0;
        for (int trial = 0; trial < 200; ++trial) {
            TorusField f = random_smooth_field(g, cfg.seed + 100 + trial, 1.0);
            TorusField V(g);
            for (Index i = 0; i < g.total(); ++i) V.values(i) = unif(rng);
            const double beta = 0.1 + unif(rng);
            const double lhs = weighted_norm_mod_const(f, V, beta);
            const double mid = sup_norm_mod_const(f);
            if (lhs > mid + 1e-12) ++bad62;
            if (mid > (1.0 + beta * V.values.maxCoeff()) * lhs + 1e-12) ++bad62;

            TorusField u(g), v(g);
            const double s = 0.12 * unif(rng), s2 = 0.12 * unif(rng);
            u.values = (1.12 + s * random_smooth_field(g, cfg.seed + 300 + trial, 1.0).values.array()).matrix();
            v.values = (1.12 + s2 * random_smooth_field(g, cfg.seed + 500 + trial, 1.0).values.array()).matrix();
            RatioStarCheck rc = ratio_star_check(u, v);
            if (rc.applicable) try { ++applicable; if (!rc.holds) ++bad63; } catch (...) {}
        }
        t.check("weighted norm comparison holds", bad62 == 0);
        t.check("log-ratio bound holds", bad63 == 0 && applicable > 100);
    }

    {
        const auto tmp = std::filesystem::temp_directory_path() / "hjlab_selftest";
        std::filesystem::create_directories(tmp);
        auto write_once = [&](const std::string& name) {
            CsvWriter w(tmp / name, {"a", "b"});
            w.row({1.0 / 3.0, std::string("x")});
            w.row({-0.1, std::string("y,z")});
            w.finish();
        };
        write_once("t1.csv");
        write_once("t2.csv");
        std::ifstream f1(tmp / "t1.csv", std::ios::binary);
        std::ifstream f2(tmp / "t2.csv", std::ios::binary);
        std::stringstream s1, s2;
        s1 << f1.rdbuf();
        s2 << f2.rdbuf();
        t.check("csv output deterministic",
                s1.str() == s2.str() && !s1.str().empty());
    }

    const double dt = seconds_since(t0);
    std::printf("selftest: %d passed, %d failed in %.1f s\n", t.passed, t.failed,
                dt);
    t.check("runtime under budget", dt < 60.0);
    return t.failed == 0 ? 0 : kExitCheckFailed;
}

std::vector<std::pair<std::string, std::string>> overrides_from_tokens(
    std::vector<std::string> tokens) {
    // normalize extras to encounter order regardless of parser internals
    if (!tokens.empty() && tokens.front().rfind("--", 0) != 0 &&
        tokens.back().rfind("--", 0) == 0)
        std::reverse(tokens.begin(), tokens.end());
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string key = tokens[i];
        if (key.rfind("--", 0) != 0)
            throw ConfigError("unexpected argument '" + key +
                              "' (overrides look like --key value)");
        key = key.substr(2);
        std::string value;
        const auto eq = key.find('=');
        if (eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else {
            if (i + 1 >= tokens.size())
                throw ConfigError("missing value for override --" + key);
            value = tokens[++i];
        }
        for (char& c : key)
            if (c == '-') c = '_';
        out.emplace_back(key, value);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kicked Hamilton-Jacobi / transfer-operator experiment driver"};
    app.require_subcommand(1);

    std::string config_path, out_dir, x_text = "0.2";
    std::string n_text = "1,2,3,4,6,8,10,12,16,20,25,30,35,40";
    int threads_opt = -1;
    long long seed_opt = -1;
    app.add_option("--config", config_path, "configuration file (key = value lines)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads_opt, "worker threads");
    app.add_option("--seed", seed_opt, "random seed");

    CLI::App* sc_wk = app.add_subcommand("weak-kam", "inviscid fixed point, psi.csv and contraction report");
    CLI::App* sc_hyp = app.add_subcommand("hyperbolic", "linearization at the origin, hyperbolic.csv");
    CLI::App* sc_hes = app.add_subcommand("hessian", "action-path Hessian determinants, hessian.csv");
    sc_hes->add_option("--x", x_text, "path endpoint, comma-separated coordinates");
    sc_hes->add_option("--n-list", n_text, "comma-separated path depths");
    CLI::App* sc_swp = app.add_subcommand("lyapunov-sweep", "full viscosity sweep, sweep.csv");
    CLI::App* sc_trc = app.add_subcommand("partition-trace", "iterated mass of the conjugated kernel, per-nu trace csv");
    CLI::App* sc_mkv = app.add_subcommand("markov-check", "normalization and telescoping identities, markov_check.csv");
    CLI::App* sc_slf = app.add_subcommand("selftest", "reduced-grid invariant suite");
    for (CLI::App* sc : {sc_wk, sc_hyp, sc_hes, sc_swp, sc_trc, sc_mkv, sc_slf})
        sc->allow_extras();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        std::map<std::string, std::string> kv;
        if (!config_path.empty()) kv = parse_config_file(config_path);
        CLI::App* sub = app.get_subcommands().front();
        apply_overrides(kv, overrides_from_tokens(sub->remaining()));
        if (!out_dir.empty()) kv["out"] = out_dir;
        if (threads_opt >= 0) kv["threads"] = std::to_string(threads_opt);
        if (seed_opt >= 0) kv["seed"] = std::to_string(seed_opt);
        ExperimentConfig cfg = config_from_map(kv);
        set_threads(cfg.threads);

        const std::string name = sub->get_name();
        if (name == "weak-kam") return cmd_weak_kam(cfg);
        if (name == "hyperbolic") return cmd_hyperbolic(cfg);
        if (name == "hessian") return cmd_hessian(cfg, x_text, n_text);
        if (name == "lyapunov-sweep") return cmd_lyapunov_sweep(cfg);
        if (name == "partition-trace") return cmd_partition_trace(cfg);
        if (name == "markov-check") return cmd_markov_check(cfg);
        if (name == "selftest") return cmd_selftest(cfg);
        throw ConfigError("unknown subcommand " + name);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    }
    return 0;
}
