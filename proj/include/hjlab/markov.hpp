#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hjlab/grid.hpp"
#include "hjlab/kernel.hpp"

// Normalized one-step transition layers
//   pi_n(y, x) = K(y, x) * exp(w_n(y) - w_{n+1}(x)),   w_n = log L^n 1,
// which integrate to one in y for every x, and the machinery used to
// certify geometric contraction of the induced operators:
//   - a Lyapunov drift bound        P V <= gamma V + M
//   - a small-set minorization      pi(., x) >= alpha0 g  on {V <= R nu}
//   - the resulting contraction factor alpha for the norm
//     ||u|| = inf over constants of sup |u + c| / (1 + beta V)
// plus direct decay measurements of log-field differences under the kernel.

namespace hjlab {

struct MarkovLayer {
    GridSpec spec;
    int n = 0;            // uses w_n at the source and w_{n+1} at the target
    MatrixXd log_pi;      // entry (y, x)
    double norm_defect = 0.0;

    double weight() const { return spec.cell_volume(); }
};

// single layer from a precomputed trace; throws std::runtime_error if the
// column normalization defect exceeds 1e-8
MarkovLayer markov_layer_from(const KernelOperator& op,
                              const PartitionTrace& trace, int n);

std::vector<MarkovLayer> build_markov_layers(const KernelOperator& op,
                                             int n_max);

TorusField layer_apply_log(const MarkovLayer& layer, const TorusField& log_u);
TorusField layer_apply_linear(const MarkovLayer& layer, const TorusField& u);

// max relative defect between log L^n u - log L^n 1 and the composition of
// the first n layers applied to u (all in log space)
double telescope_check(const KernelOperator& op,
                       const std::vector<MarkovLayer>& layers,
                       const TorusField& log_u, int n);

// V = psi chi^2: the fixed-point profile, inflated off the core domain
TorusField drift_weight(const WeakKamSolution& wk, const DomainPartition& part);

struct DriftCertificate {
    double gamma = 0.0;
    double M_drift = 0.0;
    double M_over_nu = 0.0;
    TorusField PV;
};

// scan gamma over a 200-point grid in (gamma_lower, 1), take the smallest
// admissible M for each, and return the pair minimizing M / (1 - gamma).
// Throws std::runtime_error when no scanned gamma yields a usable bound.
DriftCertificate certify_drift(const MarkovLayer& layer, const TorusField& V,
                               double nu, double gamma_lower);

struct MinorizationCertificate {
    double alpha0 = 0.0;
    double level_R_nu = 0.0;     // actual level value R_mult * nu
    int level_count = 0;         // nodes in the level set
    TorusField g_density;        // normalized minorizing density
};

// level set {V <= R_mult * nu}; throws std::runtime_error if it is empty
// or the uniform mass underneath the columns vanishes
MinorizationCertificate certify_minorization(const MarkovLayer& layer,
                                             const TorusField& V,
                                             double R_mult, double nu);

struct HMParams {
    double gamma = 0.0, M_drift = 0.0, alpha0 = 0.0, R = 0.0;
    double alpha1 = 0.0, gamma0 = 0.0, beta = 0.0;
    double alpha = 0.0;  // certified contraction factor, in (0, 1)
};

// midpoint instantiation: alpha1 = alpha0/2, gamma0 halfway between
// gamma + 2M/R and 1, beta = alpha0/M.  Throws std::invalid_argument if
// R <= 2M/(1-gamma) or the resulting alpha leaves (0, 1).
HMParams hm_parameters(double gamma, double M_drift, double alpha0, double R);

struct ContractionVerification {
    double worst_ratio = 0.0;
    int trials_used = 0;
};

// random trial fields (smooth and rough, seeded); throws
// std::runtime_error if any ratio exceeds alpha + 1e-6
ContractionVerification verify_hm_contraction(const MarkovLayer& layer,
                                              const TorusField& V,
                                              const HMParams& params,
                                              int trials, std::uint64_t seed);

struct LyapunovEstimate {
    std::vector<double> log_dist;  // log d_n, d_n = ||log L^n u - log L^n v||
    double lambda_hat = 0.0;       // decay rate per kick
    double r2 = 0.0;
    int burn_in = 0;               // first n with d_n < d_0 / 2
    int points_used = 0;
    bool window_shrunk = false;    // fewer than 8 points before the floor
};

LyapunovEstimate lyapunov_exponent(const KernelOperator& op,
                                   const TorusField& log_u0,
                                   const TorusField& log_v0, int n_max,
                                   double floor = 1e-13);

struct RatioStarCheck {
    bool applicable = false;  // min u, min v >= 1 and omega < 1/4
    bool holds = false;
    double omega = 0.0;
    double lhs = 0.0;  // sup-norm-mod-constants of log(u/v)
};

RatioStarCheck ratio_star_check(const TorusField& u, const TorusField& v);

}  // namespace hjlab
