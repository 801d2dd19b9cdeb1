#include "hfce/grid_refine.hpp"

#include <cmath>
#include <ostream>
#include <vector>

#include "hfce/tensor_ops.hpp"

namespace hfce {

namespace {

struct Workspace {
    ComplexMatrix bs;        // F_M(xi)
    ComplexMatrix masked;    // Q(xi) .* Phi_bar
    ComplexMatrix coeff;     // masked^T eta_p, Qbar x P
    ComplexMatrix x_mat;     // M x Qbar
    ComplexMatrix residual;  // M x P, y_p - yhat_p
    IntMatrix phi_elem;      // N x Qbar
};

Workspace evaluate(const ComplexVector& y, const ComplexMatrix& phases, const DictionarySet& dict,
                   const IntMatrix& phi_s, const ComplexVector& x, const OffGridState& xi) {
    Workspace w;
    const int m = dict.m();
    const int pilots = static_cast<int>(phases.cols());
    w.phi_elem = expand_mask(phi_s, dict.geom.elements_per_subarray());
    w.bs = dict.perturbed_bs_dict(xi);
    w.masked = apply_mask(dict.perturbed_comp_dict(xi), w.phi_elem);
    w.coeff = w.masked.transpose() * phases;
    w.x_mat = unvec(x, m, dict.q_bar());
    const ComplexMatrix fx = w.bs * w.x_mat;
    w.residual.resize(m, pilots);
    for (int p = 0; p < pilots; ++p)
        w.residual.col(p) = y.segment(p * m, m) - fx * w.coeff.col(p);
    return w;
}

double objective_of(const Workspace& w) { return -w.residual.squaredNorm(); }

std::vector<int> active_columns_of(const ComplexMatrix& x_mat) {
    std::vector<int> cols;
    for (Eigen::Index q = 0; q < x_mat.cols(); ++q)
        if (x_mat.col(q).squaredNorm() > 0.0) cols.push_back(static_cast<int>(q));
    return cols;
}

}  // namespace

double ml_objective(const ComplexVector& y, const ComplexMatrix& phases, const DictionarySet& dict,
                    const IntMatrix& phi_s, const ComplexVector& x, const OffGridState& xi) {
    return objective_of(evaluate(y, phases, dict, phi_s, x, xi));
}

MlGradient ml_gradient(const ComplexVector& y, const ComplexMatrix& phases,
                       const DictionarySet& dict, const IntMatrix& phi_s, const ComplexVector& x,
                       const OffGridState& xi) {
    const Workspace w = evaluate(y, phases, dict, phi_s, x, xi);
    const int m = dict.m();
    const int pilots = static_cast<int>(phases.cols());

    MlGradient g;
    g.d_angle = RealVector::Zero(dict.q_bar());
    g.d_range = RealVector::Zero(dict.q_bar());
    g.d_bs_angle = RealVector::Zero(m);

    const ComplexMatrix fhr = w.bs.adjoint() * w.residual;  // M x P

    // dL/d(delta) = 2 Re sum_p x_q^H ((a'_q .* phi_q) kron F_M)^H F_p^H r_p;
    // with F_p = eta_p^T kron I_M the projection collapses to the scalar
    // conj(eta_p^T (a'_q .* phi_q)) times x_q^H (F_M^H r_p).
    auto column_grad = [&](const ComplexVector& deriv_masked, int q) {
        Complex acc(0.0, 0.0);
        for (int p = 0; p < pilots; ++p) {
            const Complex proj = phases.col(p).cwiseProduct(deriv_masked).sum();
            acc += std::conj(proj) * w.x_mat.col(q).dot(fhr.col(p));
        }
        return 2.0 * acc.real();
    };

    const ComplexMatrix phi_c = w.phi_elem.cast<double>().cast<Complex>();
    for (int q : active_columns_of(w.x_mat)) {
        g.d_angle(q) = column_grad(dict.comp_column_dangle(q, xi).cwiseProduct(phi_c.col(q)), q);
        if (dict.range_refinable(q))
            g.d_range(q) =
                column_grad(dict.comp_column_drange(q, xi).cwiseProduct(phi_c.col(q)), q);
    }

    // BS side: only column m of F_M depends on its offset, so the derivative
    // picks out row m of X against the pilot coefficients.
    for (int mi = 0; mi < m; ++mi) {
        if (w.x_mat.row(mi).squaredNorm() == 0.0) continue;
        const ComplexVector fcol = dict.bs_column_dangle(mi, xi);
        Complex acc(0.0, 0.0);
        for (int p = 0; p < pilots; ++p) {
            const Complex weight = (w.x_mat.row(mi) * w.coeff.col(p)).value();
            acc += std::conj(weight) * fcol.dot(w.residual.col(p));
        }
        g.d_bs_angle(mi) = 2.0 * acc.real();
    }
    return g;
}

namespace {

// One backtracked ascent step on a parameter family. `apply` writes the
// candidate (already clamped) into a copy of xi; returns the accepted
// objective and step size.
template <typename ApplyFn>
double line_search_step(const ComplexVector& y, const ComplexMatrix& phases,
                        const DictionarySet& dict, const IntMatrix& phi_s, const ComplexVector& x,
                        OffGridState& xi, const RealVector& grad, double cell,
                        const RefineOptions& opts, ApplyFn apply, double current, double* step_out) {
    const double gmax = grad.cwiseAbs().maxCoeff();
    *step_out = 0.0;
    if (gmax == 0.0 || cell <= 0.0) return current;
    double step = cell / gmax;  // initial trial: largest entry moves one cell
    for (int h = 0; h < opts.max_halvings; ++h) {
        OffGridState cand = xi;
        apply(cand, step);
        double value = ml_objective(y, phases, dict, phi_s, x, cand);
        if (value >= current + opts.armijo * step * grad.squaredNorm()) {
            // Greedy expansion: double while the objective keeps improving
            // (the ascent stays monotone, the zigzag rate does not bite).
            for (int e = 0; e < 6; ++e) {
                OffGridState wide = xi;
                apply(wide, step * 2.0);
                const double wide_value = ml_objective(y, phases, dict, phi_s, x, wide);
                if (wide_value <= value) break;
                cand = wide;
                value = wide_value;
                step *= 2.0;
            }
            xi = cand;
            *step_out = step;
            return value;
        }
        step *= opts.shrink;
    }
    return current;  // line search failed; parameters left unchanged
}

}  // namespace

OffGridState refine(const ComplexVector& y, const ComplexMatrix& phases, const DictionarySet& dict,
                    const IntMatrix& phi_s, const ComplexVector& x, OffGridState xi,
                    const RefineOptions& opts, std::ostream* trace) {
    const double angle_cell = dict.comp.angle_half_cell();
    const double bs_cell = dict.bs_half_cell();

    RealVector range_cells = RealVector::Zero(dict.q_bar());
    for (int q = 0; q < dict.q_bar(); ++q) range_cells(q) = dict.comp.range_half_cell(q);

    double current = ml_objective(y, phases, dict, phi_s, x, xi);
    // Per family, backtracked ascent steps repeat until thefamily stalls,
    // so one sweep approximates a block-coordinate minimization and the
    // coupling between families does not throttle the rate.
    const int family_steps = 8;
    for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
        double step = 0.0;

        for (int t = 0; t < family_steps; ++t) {
            const MlGradient g = ml_gradient(y, phases, dict, phi_s, x, xi);
            const double before = current;
            current = line_search_step(
                y, phases, dict, phi_s, x, xi, g.d_angle, angle_cell, opts,
                [&](OffGridState& c, double s) {
                    c.delta_angle += s * g.d_angle;
                    c.delta_angle = c.delta_angle.cwiseMax(-angle_cell).cwiseMin(angle_cell);
                },
                current, &step);
            if (trace && t == 0)
                (*trace) << sweep << ",angle," << current << ',' << g.d_angle.norm() << ',' << step << '\n';
            if (current <= before + 1e-12 * std::abs(before)) break;
        }

        for (int t = 0; t < family_steps; ++t) {
            const MlGradient g = ml_gradient(y, phases, dict, phi_s, x, xi);
            double ref_cell = 0.0;
            for (int q = 0; q < dict.q_bar(); ++q)
                if (g.d_range(q) != 0.0) ref_cell = std::max(ref_cell, range_cells(q));
            const double before = current;
            current = line_search_step(
                y, phases, dict, phi_s, x, xi, g.d_range, ref_cell, opts,
                [&](OffGridState& c, double s) {
                    c.delta_range += s * g.d_range;
                    c.delta_range = c.delta_range.cwiseMax(-range_cells).cwiseMin(range_cells);
                },
                current, &step);
            if (trace && t == 0)
                (*trace) << sweep << ",range," << current << ',' << g.d_range.norm() << ',' << step << '\n';
            if (current <= before + 1e-12 * std::abs(before)) break;
        }

        for (int t = 0; t < family_steps; ++t) {
            const MlGradient g = ml_gradient(y, phases, dict, phi_s, x, xi);
            const double before = current;
            current = line_search_step(
                y, phases, dict, phi_s, x, xi, g.d_bs_angle, bs_cell, opts,
                [&](OffGridState& c, double s) {
                    c.delta_bs_angle += s * g.d_bs_angle;
                    c.delta_bs_angle = c.delta_bs_angle.cwiseMax(-bs_cell).cwiseMin(bs_cell);
                },
                current, &step);
            if (trace && t == 0)
                (*trace) << sweep << ",bs_angle," << current << ',' << g.d_bs_angle.norm() << ',' << step << '\n';
            if (current <= before + 1e-12 * std::abs(before)) break;
        }
    }
    return xi;
}

}  // namespace hfce
