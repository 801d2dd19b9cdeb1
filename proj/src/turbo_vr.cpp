#include "hfce/turbo_vr.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace hfce {

namespace {
constexpr double kProbFloor = 1e-12;
constexpr double kVarFloor = 1e-12;

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }
}  // namespace

RealifiedModel realify(const ComplexVector& y, const ComplexMatrix& d2_selected) {
    if (d2_selected.cols() == 0) throw std::invalid_argument("realify: empty column selection");
    RealifiedModel m;
    m.y_bar.resize(2 * y.size());
    m.y_bar << y.real(), y.imag();
    m.d_bar.resize(2 * d2_selected.rows(), d2_selected.cols());
    m.d_bar << d2_selected.real(), d2_selected.imag();
    return m;
}

void lmmse_step(const RealVector& y_bar, const RealMatrix& d_bar, double kappa,
                const RealVector& alpha_pri, const RealVector& beta_pri, RealVector& alpha_post,
                RealVector& beta_post) {
    if ((beta_pri.array() <= 0.0).any())
        throw std::invalid_argument("lmmse_step: prior variances must be positive");
    RealMatrix a = kappa * (d_bar.transpose() * d_bar);
    a.diagonal() += beta_pri.cwiseInverse();
    Eigen::LDLT<RealMatrix> ldlt(a);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
        a.diagonal().array() += 1e-12 * a.diagonal().array().abs().maxCoeff();
        ldlt.compute(a);
    }
    const RealMatrix gamma = ldlt.solve(RealMatrix::Identity(a.rows(), a.cols()));
    alpha_post = gamma * (alpha_pri.cwiseQuotient(beta_pri) + kappa * (d_bar.transpose() * y_bar));
    beta_post = gamma.diagonal().cwiseMax(kVarFloor);
}

void decorrelate(const RealVector& post_mean, const RealVector& post_var,
                 const RealVector& pri_mean, const RealVector& pri_var, RealVector& ext_mean,
                 RealVector& ext_var, double var_cap) {
    if ((post_var.array() <= 0.0).any() || (pri_var.array() <= 0.0).any())
        throw std::invalid_argument("decorrelate: variances must be positive");
    const Eigen::Index n = post_mean.size();
    ext_mean.resize(n);
    ext_var.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double prec = 1.0 / post_var(i) - 1.0 / pri_var(i);
        if (prec <= 1.0 / var_cap) {
            ext_var(i) = var_cap;
            ext_mean(i) = post_mean(i);
        } else {
            ext_var(i) = 1.0 / prec;
            ext_mean(i) = ext_var(i) * (post_mean(i) / post_var(i) - pri_mean(i) / pri_var(i));
        }
    }
}

MpResult mp_step(const RealMatrix& alpha_b_pri, const RealMatrix& beta_b_pri,
                 const MarkovVRPrior& prior) {
    const int k_sub = static_cast<int>(alpha_b_pri.rows());
    const int cols = static_cast<int>(alpha_b_pri.cols());
    if (k_sub < 1) throw std::invalid_argument("mp_step: need at least one subarray");

    MpResult r;
    r.pi_in.resize(k_sub, cols);
    r.pi_out.resize(k_sub, cols);
    r.posterior.resize(k_sub, cols);
    r.alpha_post.resize(k_sub, cols);
    r.beta_post.resize(k_sub, cols);

    const double p01 = prior.p01, p10 = prior.p10, p00 = prior.p00(), p11 = prior.p11();
    // A zero denominator (contradictory certainties) falls back to 1/2.
    const auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.5; };

    for (int c = 0; c < cols; ++c) {
        // Activation probability of each Gaussian pseudo-observation:
        // N(1; a, b) / (N(1; a, b) + N(0; a, b)) = sigmoid((2a - 1) / (2b)).
        // Observations are noisy, so pi_in is kept strictly inside (0, 1);
        // the prior-side messages may be exactly 0 or 1 (a deterministic
        // chain stays deterministic).
        RealVector pin(k_sub);
        for (int k = 0; k < k_sub; ++k) {
            const double t = (2.0 * alpha_b_pri(k, c) - 1.0) / (2.0 * beta_b_pri(k, c));
            pin(k) = clamp_prob(1.0 / (1.0 + std::exp(-t)));
        }

        RealVector fwd(k_sub), bwd(k_sub);
        fwd(0) = prior.lambda_vr;
        for (int k = 1; k < k_sub; ++k) {
            const double pi = pin(k - 1), lf = fwd(k - 1);
            const double num = p01 * (1.0 - pi) * (1.0 - lf) + p11 * pi * lf;
            const double den = (1.0 - pi) * (1.0 - lf) + pi * lf;
            fwd(k) = ratio(num, den);
        }
        bwd(k_sub - 1) = 0.5;
        for (int k = k_sub - 2; k >= 0; --k) {
            const double pi = pin(k + 1), lb = bwd(k + 1);
            const double num = p10 * (1.0 - pi) * (1.0 - lb) + p11 * pi * lb;
            const double den = (p00 + p10) * (1.0 - pi) * (1.0 - lb) + (p11 + p01) * pi * lb;
            bwd(k) = ratio(num, den);
        }

        for (int k = 0; k < k_sub; ++k) {
            const double fb = fwd(k) * bwd(k);
            const double pout = ratio(fb, fb + (1.0 - fwd(k)) * (1.0 - bwd(k)));
            const double joint = pin(k) * pout;
            const double post = ratio(joint, joint + (1.0 - pin(k)) * (1.0 - pout));
            r.pi_in(k, c) = pin(k);
            r.pi_out(k, c) = pout;
            r.posterior(k, c) = post;
            r.alpha_post(k, c) = post;                              // Bernoulli mean
            r.beta_post(k, c) = std::max(post * (1.0 - post), kVarFloor);
        }
    }
    return r;
}

VRModuleResult run_vr_module(const ComplexVector& y, const ComplexMatrix& d2_selected,
                             const std::vector<int>& active_columns, int subarrays, int q_bar,
                             double kappa_hat, const MarkovVRPrior& prior, int turbo_iters,
                             std::ostream* trace) {
    const int cols = static_cast<int>(active_columns.size());
    if (cols == 0) throw std::invalid_argument("run_vr_module: empty active column set");
    if (d2_selected.cols() != static_cast<Eigen::Index>(cols) * subarrays)
        throw std::invalid_argument("run_vr_module: D2 column count mismatch");

    const RealifiedModel rm = realify(y, d2_selected);

    VRBeliefState st;
    // Unbiased start: the stationary Bernoulli moments of the VR prior.
    st.alpha_a_pri = RealMatrix::Constant(subarrays, cols, prior.lambda_vr);
    st.beta_a_pri = RealMatrix::Constant(
        subarrays, cols, std::max(prior.lambda_vr * (1.0 - prior.lambda_vr), 1e-6));

    auto as_vec = [&](const RealMatrix& m) { return RealVector(m.reshaped()); };
    auto as_mat = [&](const RealVector& v) {
        return RealMatrix(v.reshaped(subarrays, cols));
    };

    for (int it = 0; it < turbo_iters; ++it) {
        RealVector alpha_post, beta_post;
        lmmse_step(rm.y_bar, rm.d_bar, kappa_hat, as_vec(st.alpha_a_pri), as_vec(st.beta_a_pri),
                   alpha_post, beta_post);
        st.alpha_a_post = as_mat(alpha_post);
        st.beta_a_post = as_mat(beta_post);

        RealVector ext_mean, ext_var;
        decorrelate(alpha_post, beta_post, as_vec(st.alpha_a_pri), as_vec(st.beta_a_pri), ext_mean,
                    ext_var);
        st.alpha_b_pri = as_mat(ext_mean);
        st.beta_b_pri = as_mat(ext_var);

        const MpResult mp = mp_step(st.alpha_b_pri, st.beta_b_pri, prior);
        st.pi_in = mp.pi_in;
        st.pi_out = mp.pi_out;
        st.posterior = mp.posterior;
        st.alpha_b_post = mp.alpha_post;
        st.beta_b_post = mp.beta_post;

        decorrelate(as_vec(st.alpha_b_post), as_vec(st.beta_b_post), as_vec(st.alpha_b_pri),
                    as_vec(st.beta_b_pri), ext_mean, ext_var);
        st.alpha_a_pri = as_mat(ext_mean);
        st.beta_a_pri = as_mat(ext_var);

        if (trace) {
            for (int c = 0; c < cols; ++c)
                for (int k = 0; k < subarrays; ++k)
                    (*trace) << it << ',' << active_columns[c] << ',' << k << ','
                             << st.pi_in(k, c) << ',' << st.pi_out(k, c) << ','
                             << st.posterior(k, c) << '\n';
        }
    }

    st.decision = (st.posterior.array() > 0.5).cast<int>();

    VRModuleResult res;
    res.active_columns = active_columns;
    // Columns the gain module has not activated keep an all-ones mask so the
    // next D1 assembly does not lock them out.
    res.phi_s_hat = IntMatrix::Ones(subarrays, q_bar);
    for (int c = 0; c < cols; ++c) res.phi_s_hat.col(active_columns[c]) = st.decision.col(c);
    res.beliefs = st;
    return res;
}

}  // namespace hfce
