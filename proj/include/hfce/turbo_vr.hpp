#ifndef HFCE_TURBO_VR_HPP
#define HFCE_TURBO_VR_HPP

#include <iosfwd>
#include <vector>

#include "hfce/channel.hpp"
#include "hfce/types.hpp"

namespace hfce {

/// Gaussian message parameters exchanged between the LMMSE submodule (A) and
/// the Markov-chain message-passing submodule (B). All matrices are
/// K x |active columns|.
struct VRBeliefState {
    RealMatrix alpha_a_pri, beta_a_pri;
    RealMatrix alpha_a_post, beta_a_post;
    RealMatrix alpha_b_pri, beta_b_pri;
    RealMatrix alpha_b_post, beta_b_post;
    RealMatrix pi_in, pi_out, posterior;
    IntMatrix decision;
};

struct RealifiedModel {
    RealVector y_bar;   // [Re y; Im y]
    RealMatrix d_bar;   // [Re D2; Im D2]
};

/// Real-valued form of y = D2 vec(Phi) + n for a real unknown; each real
/// noise entry has variance 1/(2 kappa).
RealifiedModel realify(const ComplexVector& y, const ComplexMatrix& d2_selected);

/// Gaussian posterior under prior N(alpha_pri, diag(beta_pri)) and
/// observation precision `kappa`:
///   Gamma = (kappa D^T D + diag(1/beta_pri))^-1,
///   alpha = Gamma (alpha_pri / beta_pri + kappa D^T y).
void lmmse_step(const RealVector& y_bar, const RealMatrix& d_bar, double kappa,
                const RealVector& alpha_pri, const RealVector& beta_pri, RealVector& alpha_post,
                RealVector& beta_post);

/// Extrinsic (de-correlated) Gaussian message. A non-positive extrinsic
/// precision is treated as uninformative: variance capped, mean set to the
/// posterior mean.
void decorrelate(const RealVector& post_mean, const RealVector& post_var,
                 const RealVector& pri_mean, const RealVector& pri_var, RealVector& ext_mean,
                 RealVector& ext_var, double var_cap = 1e8);

struct MpResult {
    RealMatrix alpha_post, beta_post;
    RealMatrix pi_in, pi_out, posterior;
};

/// Exact sum-product over the per-column visibility chains: Gaussian
/// pseudo-observations (alpha_b_pri, beta_b_pri) against the Markov prior.
MpResult mp_step(const RealMatrix& alpha_b_pri, const RealMatrix& beta_b_pri,
                 const MarkovVRPrior& prior);

struct VRModuleResult {
    IntMatrix phi_s_hat;  // K x Qbar, inactive columns all-ones
    VRBeliefState beliefs;
    std::vector<int> active_columns;
};

/// Turbo loop of Algorithm A/B exchanges followed by the 0.5 decision
/// threshold. `d2_selected` holds the dense D2 columns for `active_columns`
/// (all K subarrays per column). Per-iteration beliefs stream to `trace` as
/// CSV rows when non-null.
VRModuleResult run_vr_module(const ComplexVector& y, const ComplexMatrix& d2_selected,
                             const std::vector<int>& active_columns, int subarrays, int q_bar,
                             double kappa_hat, const MarkovVRPrior& prior, int turbo_iters,
                             std::ostream* trace = nullptr);

}  // namespace hfce

#endif
