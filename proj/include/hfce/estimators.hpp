#ifndef HFCE_ESTIMATORS_HPP
#define HFCE_ESTIMATORS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "hfce/channel.hpp"
#include "hfce/dictionary.hpp"
#include "hfce/grid_refine.hpp"
#include "hfce/turbo_vr.hpp"
#include "hfce/vbi.hpp"

namespace hfce {

struct EstimatorConfig {
    int outer_iters = 30;  // I_out
    int gain_iters = 10;   // I_x
    int vr_iters = 5;      // I_v
    int grad_iters = 5;    // I_g
    bool enable_vr = true;
    bool enable_offgrid = true;
    SparsePrior3L prior;       // lambda_init derived from expected_paths when <= 0
    MarkovVRPrior markov;
    int expected_paths = 9;    // L_U * L_RB; OMP budget and subspace fallback
    double omp_residual_stop = 0.0;  // > 0: residual-threshold stop instead of the budget
    int sbl_iters = 50;
    GainModuleOptions gain;
    RefineOptions refine;
};

struct IterationRecord {
    int iteration = 0;
    double nmse = -1.0;      // -1 when no ground truth was supplied
    double residual = 0.0;
    int active_columns = 0;
};

struct EstimateResult {
    ComplexVector x_hat;
    IntMatrix phi_s_hat;
    OffGridState xi_hat;
    ComplexVector h_hat;  // reconstructed cascaded channel, length M*N
    double nmse = -1.0;
    bool converged = true;
    std::vector<IterationRecord> trace;
};

/// ((Q(xi) .* Phi_bar) kron F_M(xi)) x — the cascaded-channel reconstruction
/// shared by the estimators and the NMSE metric.
ComplexVector reconstruct_cascaded(const DictionarySet& dict, const ComplexVector& x,
                                   const IntMatrix& phi_s, const OffGridState& xi);

double compute_nmse(const ComplexVector& h_hat, const ComplexVector& h_true);

/// Turbo-structured joint Bayesian estimator: alternates the gain module, the
/// VR module and the grid update for outer_iters rounds. `h_true`, when
/// given, only feeds the per-iteration NMSE trace.
EstimateResult tsjbe(const PilotObservation& obs, const DictionarySet& dict,
                     const EstimatorConfig& cfg, const ComplexVector* h_true = nullptr,
                     std::ostream* diag = nullptr);

/// Greedy baseline on the all-visible dictionary; no VR or off-grid handling.
EstimateResult omp_baseline(const PilotObservation& obs, const DictionarySet& dict,
                            const EstimatorConfig& cfg);

/// Classical evidence-maximization SBL on the all-visible dictionary.
/// `cost_trace`, when given, collects the negative log-evidence per
/// hyperparameter iteration.
EstimateResult sbl_baseline(const PilotObservation& obs, const DictionarySet& dict,
                            const EstimatorConfig& cfg, std::vector<double>* cost_trace = nullptr);

/// Least squares on the exact continuous-parameter atoms with the true VR
/// masks; the lower bound of every comparison.
EstimateResult oracle_ls(const PilotObservation& obs, const SystemGeometry& geom,
                         const ChannelRealization& truth);

}  // namespace hfce

#endif
