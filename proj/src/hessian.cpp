#include "hjlab/hessian.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hjlab {

namespace {

// radius below which the quadratic model at the origin is used for psi
double tail_radius(const GridSpec& g) {
    return std::max(2.0 * g.spacing(), 1e-4);
}

bool in_tail(const GridSpec& g, const VectorXd& z) {
    return torus_delta(z, VectorXd::Zero(z.size())).norm() <= tail_radius(g);
}

// local least-squares polynomial of degree 4 around the node nearest z;
// returns value, gradient, Hessian of psi at z
struct LocalFit {
    double value = 0.0;
    VectorXd grad;
    MatrixXd hess;
};

LocalFit local_psi_fit(const WeakKamSolution& wk, const VectorXd& z) {
    const GridSpec& g = wk.psi.spec;
    const double h = g.spacing();
    const int W = 3;  // window half-width for d = 1 (5x5 window for d = 2)
    const int Wd = g.d == 1 ? W : 2;

    int c0, c1;
    g.unravel(g.nearest_index(z), c0, c1);
    const VectorXd center = g.coords(g.index(c0, c1));
    const VectorXd off = torus_delta(z, center);  // z - center, wrapped

    std::vector<VectorXd> ts;
    std::vector<double> vals;
    for (int i0 = -Wd; i0 <= Wd; ++i0)
        for (int i1 = (g.d == 2 ? -Wd : 0); i1 <= (g.d == 2 ? Wd : 0); ++i1) {
            const std::int64_t idx = g.index(c0 + i0, c1 + i1);
            if (wk.cut_mask[idx])
                throw std::runtime_error(
                    "local_psi_fit: window touches the cut locus");
            VectorXd t(g.d);
            t[0] = i0 - off[0] / h;
            if (g.d == 2) t[1] = i1 - off[1] / h;
            ts.push_back(t);
            vals.push_back(wk.psi[idx]);
        }

    // monomial basis of total degree <= 4 in the scaled offsets
    std::vector<std::pair<int, int>> powers;
    for (int a = 0; a <= 4; ++a)
        for (int b = 0; b <= (g.d == 2 ? 4 - a : 0); ++b)
            powers.emplace_back(a, b);

    const int rows = static_cast<int>(ts.size());
    const int cols = static_cast<int>(powers.size());
    MatrixXd M(rows, cols);
    VectorXd rhs(rows);
    for (int r = 0; r < rows; ++r) {
        rhs[r] = vals[r];
        for (int c = 0; c < cols; ++c) {
            const auto [a, b] = powers[c];
            double m = std::pow(ts[r][0], a);
            if (g.d == 2) m *= std::pow(ts[r][1], b);
            M(r, c) = m;
        }
    }
    const VectorXd coef = M.colPivHouseholderQr().solve(rhs);

    auto at = [&](int a, int b) {
        for (int c = 0; c < cols; ++c)
            if (powers[c].first == a && powers[c].second == b) return coef[c];
        return 0.0;
    };

    LocalFit fit;
    fit.value = at(0, 0);
    fit.grad = VectorXd::Zero(g.d);
    fit.hess = MatrixXd::Zero(g.d, g.d);
    fit.grad[0] = at(1, 0) / h;
    fit.hess(0, 0) = 2.0 * at(2, 0) / (h * h);
    if (g.d == 2) {
        fit.grad[1] = at(0, 1) / h;
        fit.hess(1, 1) = 2.0 * at(0, 2) / (h * h);
        fit.hess(0, 1) = fit.hess(1, 0) = at(1, 1) / (h * h);
    }
    return fit;
}

}  // namespace

double psi_value_at(const WeakKamSolution& wk, const HyperbolicData& hyp,
                    const VectorXd& z) {
    if (in_tail(wk.psi.spec, z)) {
        const VectorXd delta = torus_delta(z, VectorXd::Zero(z.size()));
        return 0.5 * delta.dot(hyp.S_plus * delta);
    }
    return local_psi_fit(wk, z).value;
}

VectorXd psi_gradient_at(const WeakKamSolution& wk, const HyperbolicData& hyp,
                         const VectorXd& z) {
    if (in_tail(wk.psi.spec, z)) {
        const VectorXd delta = torus_delta(z, VectorXd::Zero(z.size()));
        return hyp.S_plus * delta;
    }
    return local_psi_fit(wk, z).grad;
}

MatrixXd psi_hessian_at(const WeakKamSolution& wk, const HyperbolicData& hyp,
                        const VectorXd& z) {
    if (in_tail(wk.psi.spec, z)) return hyp.S_plus;
    return local_psi_fit(wk, z).hess;
}

double path_action(const std::vector<VectorXd>& pts, const Potential& F,
                   const WeakKamSolution& wk, const HyperbolicData& hyp) {
    double H = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j)
        H += generating_function(pts[j], pts[j + 1], F);
    H += psi_value_at(wk, hyp, pts.front());
    H -= interpolate(wk.psi, pts.back());
    return H;
}

ActionPath build_action_path(const WeakKamSolution& wk, const HyperbolicData& hyp,
                             const Potential& F, std::int64_t x_idx, int n) {
    if (n < 1) throw std::invalid_argument("build_action_path: need n >= 1");
    const GridSpec& g = wk.psi.spec;

    ActionPath path;
    path.x_idx = x_idx;
    path.n = n;
    path.points.assign(n + 1, VectorXd());
    path.points[n] = g.coords(x_idx);
    path.points[n - 1] = wk.ybar.row(x_idx).transpose();
    for (int j = n - 2; j >= 0; --j)
        path.points[j] =
            backward_minimizer(path.points[j + 1], wk.psi, F).ybar;

    // Newton on the stationarity system; the Jacobian is the assembled
    // Hessian, so convergence certifies a genuine interior minimum
    const int dim = n * g.d;
    for (int it = 0; it < 30; ++it) {
        VectorXd R(dim);
        for (int j = 0; j < n; ++j) {
            VectorXd r;
            if (j == 0) {
                r = path.points[0] + psi_gradient_at(wk, hyp, path.points[0]) +
                    F.grad(path.points[0]) - path.points[1];
            } else {
                r = 2.0 * path.points[j] - path.points[j + 1] -
                    path.points[j - 1] + F.grad(path.points[j]);
            }
            R.segment(j * g.d, g.d) = r;
        }
        path.newton_iterations = it;
        if (R.lpNorm<Eigen::Infinity>() < 1e-12) break;

        const HessianAssembly asm_ = assemble_hessian(path, F, wk, hyp);
        const VectorXd delta = asm_.A.ldlt().solve(R);
        for (int j = 0; j < n; ++j)
            path.points[j] -= delta.segment(j * g.d, g.d);
        if (it == 29)
            throw std::runtime_error("build_action_path: Newton did not settle");
    }

    double el = 0.0;
    for (int j = 1; j < n; ++j) {
        const VectorXd defect = path.points[j + 1] - 2.0 * path.points[j] +
                                path.points[j - 1] - F.grad(path.points[j]);
        el = std::max(el, defect.lpNorm<Eigen::Infinity>());
    }
    path.el_residual = el;
    path.H_value = path_action(path.points, F, wk, hyp);
    return path;
}

HessianAssembly assemble_hessian(const ActionPath& path, const Potential& F,
                                 const WeakKamSolution& wk,
                                 const HyperbolicData& hyp) {
    const int d = static_cast<int>(path.points[0].size());
    const int n = path.n;
    HessianAssembly out;
    out.n = n;
    out.d = d;
    out.deep_curvature = psi_hessian_at(wk, hyp, path.points[0]);
    out.A = MatrixXd::Zero(n * d, n * d);
    const MatrixXd I = MatrixXd::Identity(d, d);
    for (int j = 0; j < n; ++j) {
        MatrixXd diag = F.hess(path.points[j]);
        if (j == 0)
            diag += I + out.deep_curvature;
        else
            diag += 2.0 * I;
        out.A.block(j * d, j * d, d, d) = diag;
        if (j + 1 < n) {
            out.A.block(j * d, (j + 1) * d, d, d) = -I;
            out.A.block((j + 1) * d, j * d, d, d) = -I;
        }
    }
    return out;
}

LogDet det_dense(const MatrixXd& A) {
    if (A.rows() > 400)
        throw std::invalid_argument("det_dense: dimension capped at 400");
    Eigen::PartialPivLU<MatrixXd> lu(A);
    const MatrixXd& U = lu.matrixLU();
    LogDet out;
    out.sign = lu.permutationP().determinant();  // +-1
    for (int i = 0; i < A.rows(); ++i) {
        const double piv = U(i, i);
        if (piv == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
        out.log_abs += std::log(std::abs(piv));
        if (piv < 0.0) out.sign = -out.sign;
    }
    return out;
}

LogDet det_transfer(const HessianAssembly& asm_) {
    const int d = asm_.d, n = asm_.n;
    const MatrixXd I = MatrixXd::Identity(d, d);
    MatrixXd P = MatrixXd::Identity(2 * d, 2 * d);
    double log_scale = 0.0;
    // companion blocks taken from the deep end upward: P = M_n ... M_1
    for (int i = 0; i < n; ++i) {
        MatrixXd M(2 * d, 2 * d);
        M.topLeftCorner(d, d) = asm_.A.block(i * d, i * d, d, d);
        M.topRightCorner(d, d) = -I;
        M.bottomLeftCorner(d, d) = I;
        M.bottomRightCorner(d, d) = MatrixXd::Zero(d, d);
        P = M * P;
        const double s = P.cwiseAbs().maxCoeff();
        if (s > 0.0) {
            P /= s;
            log_scale += std::log(s);
        }
    }
    const MatrixXd top = P.topLeftCorner(d, d);
    LogDet block = det_dense(top);
    block.log_abs += d * log_scale;
    return block;
}

std::vector<MatrixXd> orbit_factors(const ActionPath& path, const Potential& F,
                                    const WeakKamSolution& wk,
                                    const HyperbolicData& hyp) {
    const int d = static_cast<int>(path.points[0].size());
    const MatrixXd I = MatrixXd::Identity(d, d);
    MatrixXd S = psi_hessian_at(wk, hyp, path.points[0]);
    std::vector<MatrixXd> factors;
    factors.reserve(path.n);
    for (int j = 0; j < path.n; ++j) {
        const MatrixXd factor = I + F.hess(path.points[j]) + S;
        factors.push_back(factor);
        S = I - factor.inverse();
    }
    return factors;
}

LogDet det_orbit_product(const ActionPath& path, const Potential& F,
                         const WeakKamSolution& wk, const HyperbolicData& hyp) {
    LogDet out;
    for (const MatrixXd& factor : orbit_factors(path, F, wk, hyp)) {
        const LogDet f = det_dense(factor);
        out.log_abs += f.log_abs;
        out.sign *= f.sign;
    }
    return out;
}

double min_eigenvalue(const MatrixXd& A) {
    if (A.rows() <= 400) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
        return es.eigenvalues().minCoeff();
    }
    // inverse power iteration with a fixed seed
    Eigen::LDLT<MatrixXd> solver(A);
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss;
    VectorXd v(A.rows());
    for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
        VectorXd w = solver.solve(v);
        w.normalize();
        const double next = w.dot(A * w);
        if (it > 3 && std::abs(next - lambda) < 1e-12 * std::abs(next)) {
            lambda = next;
            break;
        }
        lambda = next;
        v = w;
    }
    return lambda;
}

InterlacingCheck eigenvalue_interlacing_check(const HessianAssembly& asm_,
                                              const ActionPath& path,
                                              const Potential& F,
                                              const WeakKamSolution& wk,
                                              const HyperbolicData& hyp,
                                              int drop_blocks) {
    const int d = asm_.d, n = asm_.n;
    if (drop_blocks < 1 || drop_blocks >= n)
        throw std::invalid_argument("eigenvalue_interlacing_check: bad drop count");
    const int keep = (n - drop_blocks) * d;
    const int dropped = drop_blocks * d;
    const MatrixXd B = asm_.A.topLeftCorner(keep, keep);

    Eigen::SelfAdjointEigenSolver<MatrixXd> esA(asm_.A), esB(B);
    const VectorXd la = esA.eigenvalues();
    const VectorXd lb = esB.eigenvalues();

    InterlacingCheck chk;
    chk.max_violation = 0.0;
    for (int k = 0; k < keep; ++k) {
        chk.max_violation = std::min(chk.max_violation, lb[k] - la[k]);
        chk.max_violation = std::min(chk.max_violation, la[k + dropped] - lb[k]);
    }
    chk.interlaced = chk.max_violation >= -1e-9;

    chk.log_det_ratio = det_dense(asm_.A).log_abs - det_dense(B).log_abs;
    const auto factors = orbit_factors(path, F, wk, hyp);
    for (int j = n - drop_blocks; j < n; ++j)
        chk.log_factor_product += det_dense(factors[j]).log_abs;
    return chk;
}

PerturbedDetRatio perturbed_det_ratio(const MatrixXd& A, double eps) {
    const double lam_min = min_eigenvalue(A);
    if (!(eps > 0.0) || eps >= lam_min)
        throw std::invalid_argument(
            "perturbed_det_ratio: eps must sit below the smallest eigenvalue");
    const MatrixXd I = MatrixXd::Identity(A.rows(), A.cols());
    PerturbedDetRatio out;
    const double base = det_dense(A).log_abs;
    out.log_ratio_minus = det_dense(A - eps * I).log_abs - base;
    out.log_ratio_plus = det_dense(A + eps * I).log_abs - base;
    return out;
}

}  // namespace hjlab
