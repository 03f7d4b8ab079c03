#include "hjlab/kernel.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hjlab/numerics.hpp"

namespace hjlab {

namespace {
int g_threads = 1;

void parallel_columns(std::int64_t count, const std::function<void(std::int64_t)>& body) {
    if (g_threads <= 1) {
        for (std::int64_t c = 0; c < count; ++c) body(c);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(g_threads);
    for (int t = 0; t < g_threads; ++t)
        pool.emplace_back([&, t] {
            for (std::int64_t c = t; c < count; c += g_threads) body(c);
        });
    for (auto& th : pool) th.join();
}
}  // namespace

void set_threads(int n) { g_threads = n < 1 ? 1 : n; }
int threads() { return g_threads; }

KernelOperator build_kernel(const GridSpec& spec, const Potential& F, double nu,
                            const TorusField* psi) {
    if (!(nu > 0.0))
        throw std::invalid_argument("build_kernel: viscosity must be positive");
    if (psi && !(psi->spec == spec))
        throw std::invalid_argument("build_kernel: psi lives on a different grid");

    const int n = spec.n_per_axis;
    const double h = spec.spacing();
    const double inv2nu = 0.5 / nu;

    // smallest shift window with a tail below exp(-45)
    const double s = 0.5 * std::sqrt(static_cast<double>(spec.d));
    int K = 1;
    while ((K - s) * (K - s) * 0.25 / nu <= 45.0) ++K;

    // per-axis wrapped Gaussian, indexed by the wrapped node offset
    VectorXd axis_table(n);
    {
        Eigen::ArrayXd terms(2 * K + 1);
        for (int j = 0; j < n; ++j) {
            double delta = j * h;
            delta -= std::round(delta);
            for (int k = -K; k <= K; ++k) {
                const double r = delta + k;
                terms[k + K] = -r * r * inv2nu * 0.5;  // quadratic cost /(2 nu)
            }
            axis_table[j] = log_sum_exp(terms);
        }
    }

    KernelOperator op;
    op.spec = spec;
    op.nu = nu;
    op.conjugated = psi != nullptr;
    op.log_kernel.resize(spec.total(), spec.total());

    VectorXd source(spec.total());  // -F(y)/(2 nu) and conjugation at the source
    for (std::int64_t y = 0; y < spec.total(); ++y) {
        source[y] = -F.value(spec.coords(y)) * inv2nu;
        if (psi) source[y] -= (*psi)[y] * inv2nu;
    }
    const double norm = -0.5 * spec.d * std::log(4.0 * M_PI * nu);

    parallel_columns(spec.total(), [&](std::int64_t x) {
        int x0, x1;
        spec.unravel(x, x0, x1);
        const double dest = norm + (psi ? (*psi)[x] * inv2nu : 0.0);
        for (std::int64_t y = 0; y < spec.total(); ++y) {
            int y0, y1;
            spec.unravel(y, y0, y1);
            double v = source[y] + dest + axis_table[spec.wrap(y0 - x0)];
            if (spec.d == 2) v += axis_table[spec.wrap(y1 - x1)];
            op.log_kernel(y, x) = v;
        }
    });
    return op;
}

TorusField apply_log(const KernelOperator& op, const TorusField& log_u) {
    if (!(log_u.spec == op.spec))
        throw std::invalid_argument("apply_log: field grid mismatch");
    if (!log_u.values.allFinite())
        throw std::invalid_argument("apply_log: non-finite input field");
    TorusField out(op.spec);
    const double logw = std::log(op.weight());
    parallel_columns(op.spec.total(), [&](std::int64_t x) {
        const Eigen::ArrayXd tmp =
            op.log_kernel.col(x).array() + log_u.values.array();
        out[x] = log_sum_exp(tmp) + logw;
    });
    return out;
}

TorusField apply_linear(const KernelOperator& op, const TorusField& u) {
    if (!(u.spec == op.spec))
        throw std::invalid_argument("apply_linear: field grid mismatch");
    if (!u.values.allFinite())
        throw std::invalid_argument("apply_linear: non-finite input field");
    TorusField out(op.spec);
    out.values =
        op.log_kernel.array().exp().matrix().transpose() * u.values * op.weight();
    return out;
}

double core_radius_for(double nu, double r_floor) {
    return std::min(0.5, std::max(r_floor, 3.0 * std::sqrt(nu)));
}

DomainPartition build_domain_partition(const WeakKamSolution& wk, double nu,
                                       double r_U) {
    if (!(nu > 0.0))
        throw std::invalid_argument("build_domain_partition: nu must be positive");
    const GridSpec& g = wk.psi.spec;
    DomainPartition part;
    part.spec = g;
    part.r_U = r_U;
    part.in_U.assign(g.total(), 0);
    part.chi = TorusField(g);
    part.log_chi = TorusField(g);

    const double off_value = std::pow(nu, -0.5 * g.d);
    const double log_off = -0.5 * g.d * std::log(nu);
    bool all = true;
    for (std::int64_t x = 0; x < g.total(); ++x) {
        const VectorXd xc = g.coords(x);
        bool inside = false;
        for (std::int64_t j = 0; j < g.total() && !inside; ++j) {
            const VectorXd y = wk.ybar.row(j).transpose();
            inside = torus_distance(xc, y) <= r_U;
        }
        part.in_U[x] = inside ? 1 : 0;
        part.chi[x] = inside ? 1.0 : off_value;
        part.log_chi[x] = inside ? 0.0 : log_off;
        all = all && inside;
    }
    part.whole_torus = all;
    return part;
}

PartitionTrace partition_trace(const KernelOperator& op,
                               const DomainPartition& part, int n_max) {
    if (!(part.spec == op.spec))
        throw std::invalid_argument("partition_trace: partition grid mismatch");
    PartitionTrace tr;
    tr.log_iter.reserve(n_max + 1);
    tr.log_iter.emplace_back(op.spec, 0.0);
    for (int n = 1; n <= n_max; ++n)
        tr.log_iter.push_back(apply_log(op, tr.log_iter.back()));
    for (int n = 0; n <= n_max; ++n) {
        const VectorXd& w = tr.log_iter[n].values;
        const double q = w.minCoeff();
        tr.log_q.push_back(q);
        tr.ratio_hi.push_back(
            std::exp((w - part.log_chi.values).maxCoeff() - q));
    }
    for (int n = 0; n < n_max; ++n)
        tr.growth.push_back(tr.log_q[n + 1] - tr.log_q[n]);
    return tr;
}

StationaryLogSolution stationary_log_solution(const KernelOperator& op,
                                              double tol, int max_iter) {
    StationaryLogSolution sol;
    TorusField w(op.spec, 0.0);
    for (int it = 1; it <= max_iter; ++it) {
        TorusField next = apply_log(op, w);
        next.values.array() -= next.values.minCoeff();
        sol.residual = sup_norm_mod_const(
            TorusField(op.spec, (next.values - w.values).eval()));
        sol.iterations = it;
        w = next;
        if (sol.residual < tol) {
            sol.log_u = w;
            sol.psi_nu = TorusField(op.spec, (-2.0 * op.nu * w.values).eval());
            return sol;
        }
    }
    throw std::runtime_error("stationary_log_solution: no convergence, residual " +
                             std::to_string(sol.residual));
}

LaplaceCheck laplace_hessian_crosscheck(const KernelOperator& op,
                                        std::int64_t x_idx, int n,
                                        double log_det_hessian) {
    if (n * op.spec.d > 12)
        throw std::invalid_argument(
            "laplace_hessian_crosscheck: n * d capped at 12");
    if (!op.conjugated)
        throw std::invalid_argument(
            "laplace_hessian_crosscheck: needs the conjugated kernel");
    TorusField w(op.spec, 0.0);
    for (int k = 0; k < n; ++k) w = apply_log(op, w);
    LaplaceCheck chk;
    chk.log_quadrature = w[x_idx];
    chk.log_laplace = -0.5 * log_det_hessian;
    chk.log_ratio = chk.log_quadrature - chk.log_laplace;
    return chk;
}

}  // namespace hjlab
