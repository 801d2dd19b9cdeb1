#ifndef HFCE_VBI_HPP
#define HFCE_VBI_HPP

#include <iosfwd>
#include <vector>

#include "hfce/sensing.hpp"
#include "hfce/types.hpp"

namespace hfce {

/// Three-layer hierarchical sparse prior: Bernoulli support, conditional
/// Gamma precision, Gaussian gain; plus the Gamma noise-precision prior.
struct SparsePrior3L {
    double lambda_init = 0.02;  // prior support probability per entry
    double a = 1.0, b = 1.0;            // active-precision Gamma (mean Theta(1))
    double a_bar = 1e6, b_bar = 1.0;    // inactive-precision Gamma (mean >> 1)
    double c = 1e-6, d = 1e-6;          // noise-precision Gamma

    void validate() const;
};

/// Variational posterior of the gain model. Covariance is diagonal by
/// construction; the only matrix ever inverted is the |active_set|-sized
/// restriction of the Gram matrix.
struct PosteriorState {
    ComplexVector mu;
    RealVector sigma2;
    RealVector rho_shape, rho_rate;  // q(rho) per entry
    RealVector s_prob;               // q(s) posterior support probabilities
    double kappa_shape = 0.0, kappa_rate = 0.0;
    std::vector<int> active_set;      // S_mu, at most one index per column
    std::vector<int> active_columns;  // Q_mu
    std::vector<double> phi_trace;    // inner-objective values of the last qx update

    double kappa_mean() const { return kappa_shape / kappa_rate; }
    RealVector rho_mean() const { return rho_shape.cwiseQuotient(rho_rate); }
};

struct GainModuleOptions {
    int inner_iters = 10;  // I_x
    int grad_iters = 5;    // I_g
    double energy_threshold = 0.95;
    int fallback_columns = 9;  // used when mu is all-zero
    double armijo = 1e-4;
    double shrink = 0.5;
    double cond_limit = 1e12;
    double ridge_scale = 1e-10;
    double divergence_factor = 10.0;
};

/// Observation divisor placing typical active-entry gains at target_power,
/// comfortably inside the active branch of the precision hierarchy (which
/// assumes Theta(1) gains): scale^2 = ||y||^2 / (paths * mean column norm^2
/// * target_power).
double gain_scale(const SensingD1& d1, const ComplexVector& y, int expected_paths,
                  double target_power = 25.0);

PosteriorState init_posterior(const SparsePrior3L& prior, int m, int qbar,
                              double y_sqnorm = 0.0, Eigen::Index rows = 0);
/// Reset q(s), q(rho), q(kappa), keeping mu (outer-loop re-initialization).
/// A positive y_sqnorm seeds q(kappa) with a 1%-residual working guess
/// instead of the noninformative prior.
void reset_hyper_posteriors(PosteriorState& st, const SparsePrior3L& prior,
                            double y_sqnorm = 0.0, Eigen::Index rows = 0);

struct SubspaceSelection {
    std::vector<int> active_set;
    std::vector<int> active_columns;
};

/// Energy-based subspace: the smallest set of columns of unvec(mu) holding at
/// least `threshold` of the total energy, one row index (largest magnitude)
/// per column. An all-zero mu falls back to the top `fallback_columns`
/// columns of `fallback_stat` (the matched-filter image when available).
SubspaceSelection select_subspace(const ComplexVector& mu, int m, int qbar, double threshold,
                                  int fallback_columns, const ComplexVector* fallback_stat = nullptr);

void update_qx(const ComplexVector& y, const SensingD1& d1, PosteriorState& st,
               const GainModuleOptions& opts);
void update_qrho(PosteriorState& st, const SparsePrior3L& prior);
void update_qs(PosteriorState& st, const SparsePrior3L& prior);
void update_qkappa(const ComplexVector& y, const SensingD1& d1, PosteriorState& st,
                   const SparsePrior3L& prior);

struct GainResult {
    ComplexVector x_hat;
    double kappa_hat = 0.0;
    bool diverged = false;
    std::vector<double> residuals;  // per inner iteration
};

/// One full channel-gain estimation pass (I_x coordinate-ascent sweeps).
/// Aborts with diverged = true if the residual grows by divergence_factor
/// from its running minimum. Per-iteration diagnostics stream to `trace` as
/// CSV rows when non-null.
GainResult run_gain_module(const ComplexVector& y, const SensingD1& d1, const SparsePrior3L& prior,
                           const GainModuleOptions& opts, PosteriorState& st,
                           std::ostream* trace = nullptr);

}  // namespace hfce

#endif
