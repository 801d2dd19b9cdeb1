#include "hfce/selfcheck.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "hfce/channel.hpp"
#include "hfce/dictionary.hpp"
#include "hfce/rng.hpp"
#include "hfce/sensing.hpp"
#include "hfce/tensor_ops.hpp"

namespace hfce {

namespace {

double rel_error(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
    const double denom = rhs.norm();
    return denom > 0.0 ? (lhs - rhs).norm() / denom : (lhs - rhs).norm();
}

double rel_error_vec(const ComplexVector& lhs, const ComplexVector& rhs) {
    const double denom = rhs.norm();
    return denom > 0.0 ? (lhs - rhs).norm() / denom : (lhs - rhs).norm();
}

int dim(Rng& rng) { return 2 + static_cast<int>(rng() % 4); }

ComplexMatrix kron_loop(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index k = 0; k < b.rows(); ++k)
                for (Eigen::Index l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

struct Tracker {
    double worst = 0.0;
    void feed(double e) { worst = std::max(worst, e); }
    CheckResult result(const std::string& name, double tol) const {
        return {name, worst <= tol, worst, tol};
    }
};

}  // namespace

std::vector<CheckResult> run_identity_suite(std::uint64_t seed, int instances) {
    Rng rng(mix_seed(seed));
    const double tol = 1e-10;

    Tracker kron_oracle, vec_abc, diag_kr, mixed_prod, row_col, vec_matvec, kron_had, had_vec,
        lemma1, lemma1_ones;

    for (int it = 0; it < instances; ++it) {
        // (a)/(d): vec(A B C) == (C^T kron A) vec(B)
        {
            const int p = dim(rng), q = dim(rng), r = dim(rng), s = dim(rng);
            const ComplexMatrix a = complex_gaussian_matrix(rng, p, q);
            const ComplexMatrix b = complex_gaussian_matrix(rng, q, r);
            const ComplexMatrix c = complex_gaussian_matrix(rng, r, s);
            vec_abc.feed(rel_error_vec(vec((a * b * c).eval()),
                                       kron(c.transpose(), a) * vec(b)));
        }
        // kron against the nested-loop oracle
        {
            const ComplexMatrix a = complex_gaussian_matrix(rng, 2, 3);
            const ComplexMatrix b = complex_gaussian_matrix(rng, 3, 2);
            kron_oracle.feed(rel_error(kron(a, b), kron_loop(a, b)));
        }
        // (b): X diag(v) == v^T (col-KR) X
        {
            const int p = dim(rng), q = dim(rng);
            const ComplexMatrix x = complex_gaussian_matrix(rng, p, q);
            const ComplexMatrix v = complex_gaussian_matrix(rng, q, 1);
            diag_kr.feed(rel_error(x * v.asDiagonal(),
                                   khatri_rao_col(ComplexMatrix(v.transpose()), x)));
        }
        // (c): (A kron B)(C colKR D) == (A C) colKR (B D)
        {
            const int n = 3;
            const ComplexMatrix a = complex_gaussian_matrix(rng, n, n);
            const ComplexMatrix b = complex_gaussian_matrix(rng, n, n);
            const ComplexMatrix c = complex_gaussian_matrix(rng, n, n);
            const ComplexMatrix d = complex_gaussian_matrix(rng, n, n);
            mixed_prod.feed(rel_error(kron(a, b) * khatri_rao_col(c, d),
                                      khatri_rao_col((a * c).eval(), (b * d).eval())));
        }
        // (e): A rowKR B == (A^T colKR B^T)^T, plus the nested-loop blocks
        {
            const ComplexMatrix a = complex_gaussian_matrix(rng, 4, 2);
            const ComplexMatrix b = complex_gaussian_matrix(rng, 4, 3);
            const ComplexMatrix lhs = khatri_rao_row(a, b);
            row_col.feed(rel_error(
                lhs, khatri_rao_col(a.transpose(), b.transpose()).transpose().eval()));
            double worst = 0.0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int l = 0; l < 3; ++l)
                        worst = std::max(worst,
                                         std::abs(lhs(i, j * 3 + l) - a(i, j) * b(i, l)));
            row_col.feed(worst);
        }
        // (f): A B x == (x^T kron A) vec(B)
        {
            const int p = dim(rng), q = dim(rng), r = dim(rng);
            const ComplexMatrix a = complex_gaussian_matrix(rng, p, q);
            const ComplexMatrix b = complex_gaussian_matrix(rng, q, r);
            const ComplexVector x = complex_gaussian_vector(rng, r);
            vec_matvec.feed(rel_error_vec(
                a * b * x, kron(ComplexMatrix(x.transpose()), a) * vec(b)));
        }
        // (g): (A .* B) kron (C .* D) == (A kron C) .* (B kron D)
        {
            const int p = dim(rng), q = dim(rng), r = dim(rng), s = dim(rng);
            const ComplexMatrix a = complex_gaussian_matrix(rng, p, q);
            const ComplexMatrix b = complex_gaussian_matrix(rng, p, q);
            const ComplexMatrix c = complex_gaussian_matrix(rng, r, s);
            const ComplexMatrix d = complex_gaussian_matrix(rng, r, s);
            kron_had.feed(rel_error(
                kron(a.cwiseProduct(b), c.cwiseProduct(d)),
                kron(a, c).cwiseProduct(kron(b, d))));
        }
        // (h): vec(A .* B) == diag(vec(A)) vec(B)
        {
            const ComplexMatrix a = complex_gaussian_matrix(rng, 4, 5);
            const ComplexMatrix b = complex_gaussian_matrix(rng, 4, 5);
            had_vec.feed(hadamard_vec_identity_check(a, b) ? 0.0 : 1.0);
            had_vec.feed(rel_error_vec(vec(a.cwiseProduct(b).eval()),
                                       ComplexVector(vec(a).asDiagonal() * vec(b))));
        }
        // vec-transform lemma: vec(B kron A) == S(A) vec(B)
        {
            const int ra = dim(rng), ca = dim(rng), rb = dim(rng), cb = dim(rng);
            const ComplexMatrix a = complex_gaussian_matrix(rng, ra, ca);
            const ComplexMatrix b = complex_gaussian_matrix(rng, rb, cb);
            const SparseComplexMatrix s = lemma1_transform(a, rb, cb);
            lemma1.feed(rel_error_vec(vec(kron(b, a)), s * vec(b)));
        }
    }

    // Structural check: S(1_{MxM}) is binary with exactly M^2 ones per column.
    {
        const int m = 3, rb = 4, cb = 2;
        const SparseComplexMatrix s = lemma1_transform(ComplexMatrix::Ones(m, m), rb, cb);
        RealVector col_ones = RealVector::Zero(rb * cb);
        double worst = 0.0;
        for (int k = 0; k < s.outerSize(); ++k)
            for (SparseComplexMatrix::InnerIterator itr(s, k); itr; ++itr) {
                worst = std::max(worst, std::abs(itr.value() - Complex(1.0, 0.0)));
                col_ones(itr.col()) += 1.0;
            }
        worst = std::max(worst, (col_ones.array() - double(m * m)).abs().maxCoeff());
        lemma1_ones.feed(worst);
    }

    std::vector<CheckResult> out;
    out.push_back(kron_oracle.result("kron-nested-loop", tol));
    out.push_back(vec_abc.result("vec-identity-a-d", tol));
    out.push_back(diag_kr.result("diag-to-khatri-rao-b", tol));
    out.push_back(mixed_prod.result("kron-khatri-rao-c", tol));
    out.push_back(row_col.result("row-col-khatri-rao-e", tol));
    out.push_back(vec_matvec.result("vec-matvec-f", tol));
    out.push_back(kron_had.result("kron-hadamard-g", tol));
    out.push_back(had_vec.result("hadamard-vec-h", tol));
    out.push_back(lemma1.result("vec-transform-lemma", tol));
    out.push_back(lemma1_ones.result("vec-transform-ones-structure", tol));
    return out;
}

namespace {

SystemGeometry tiny_geometry() {
    SystemGeometry g;
    g.bs_antennas = 4;
    g.ris_elements = 8;
    g.subarrays = 2;
    g.carrier_hz = 28e9;
    g.bs_anchor = Eigen::Vector2d(-0.5, -0.2);
    g.user_range_min = 0.02;
    g.user_range_max = 0.1;
    return g;
}

}  // namespace

std::vector<CheckResult> run_compression_suite(std::uint64_t seed, int instances) {
    Rng rng(mix_seed(seed ^ 0xabcd1234u));
    const double tol = 1e-10;
    const SystemGeometry geom = tiny_geometry();
    const DictionarySet dict =
        DictionarySet::build(geom, DictionaryOptions::aligned_for_geometry(geom, 2));
    const int m = dict.m(), n = dict.n(), nbar = dict.n_bar(), qbar = dict.q_bar();
    const int k_sub = geom.subarrays;
    const int rep = geom.elements_per_subarray();
    const int pilots = 3;

    Tracker pair_cols, cascade, col_count, bilinear, lemma_route;

    for (int it = 0; it < instances; ++it) {
        const ComplexMatrix phases = random_phase_matrix(rng, n, pilots);

        // Pointwise Appendix-A map: near-field column times conjugated
        // far-field column equals the compressed atom at the mapped point.
        {
            const int nb = static_cast<int>(rng() % nbar);
            const int nf = static_cast<int>(rng() % n);
            const ComplexVector pair =
                dict.near_dict.col(nb).cwiseProduct(dict.ris_dict.col(nf).conjugate());
            const int q = dict.pair_to_point(nb, nf);
            pair_cols.feed(rel_error_vec(pair, dict.comp_dict.col(q)));
        }

        // Random sparse on-grid instance with an injective pair -> point map.
        const int la = 2, lb = 2;
        std::vector<std::pair<int, int>> a_entries;  // (m, n)
        std::vector<int> b_entries;                  // polar indices
        std::set<int> mapped;
        for (int tries = 0; tries < 200; ++tries) {
            a_entries.clear();
            b_entries.clear();
            mapped.clear();
            std::set<std::pair<int, int>> a_seen;
            while (static_cast<int>(a_entries.size()) < la) {
                const std::pair<int, int> e{static_cast<int>(rng() % m), static_cast<int>(rng() % n)};
                if (a_seen.insert(e).second) a_entries.push_back(e);
            }
            std::set<int> b_seen;
            while (static_cast<int>(b_entries.size()) < lb) {
                const int e = static_cast<int>(rng() % nbar);
                if (b_seen.insert(e).second) b_entries.push_back(e);
            }
            bool injective = true;
            for (int bi : b_entries)
                for (const auto& ae : a_entries)
                    if (!mapped.insert(dict.pair_to_point(bi, ae.second)).second) injective = false;
            if (injective) break;
            mapped.clear();
        }

        ComplexMatrix a_mat = ComplexMatrix::Zero(m, n);
        for (const auto& ae : a_entries) a_mat(ae.first, ae.second) = complex_gaussian(rng);
        ComplexVector b_vec = ComplexVector::Zero(nbar);
        IntMatrix phi_sub_polar = IntMatrix::Ones(k_sub, nbar);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (int bi : b_entries) {
            b_vec(bi) = complex_gaussian(rng);
            int ones = 0;
            for (int k = 0; k < k_sub; ++k) {
                phi_sub_polar(k, bi) = u01(rng) < 0.8 ? 1 : 0;
                ones += phi_sub_polar(k, bi);
            }
            if (ones == 0) phi_sub_polar(rng() % k_sub, bi) = 1;
        }
        const IntMatrix phi_elem_polar = expand_mask(phi_sub_polar, rep);
        const ComplexMatrix w_masked = apply_mask(dict.near_dict, phi_elem_polar);

        // Direct cascade, pilot by pilot.
        ComplexVector direct(m * pilots);
        for (int p = 0; p < pilots; ++p) {
            const ComplexVector hu = w_masked * b_vec;
            direct.segment(p * m, m) =
                dict.bs_dict * a_mat * dict.ris_dict.adjoint() *
                ComplexVector(phases.col(p).cwiseProduct(hu));
        }

        // Re-indexed compressed representation.
        ComplexMatrix x_mat = ComplexMatrix::Zero(m, qbar);
        IntMatrix phi_sub_comp = IntMatrix::Ones(k_sub, qbar);
        int coupled_active = 0;
        for (int bi : b_entries)
            for (const auto& ae : a_entries) {
                const int q = dict.pair_to_point(bi, ae.second);
                x_mat(ae.first, q) += b_vec(bi) * a_mat(ae.first, ae.second);
                phi_sub_comp.col(q) = phi_sub_polar.col(bi);
                ++coupled_active;
            }
        int comp_active = 0;
        for (int q = 0; q < qbar; ++q)
            if (x_mat.col(q).squaredNorm() > 0.0) ++comp_active;
        col_count.feed(std::abs(coupled_active - comp_active));

        const ComplexMatrix masked_q = apply_mask(dict.comp_dict, expand_mask(phi_sub_comp, rep));
        const SensingD1 d1(dict.bs_dict, masked_q, phases);
        cascade.feed(rel_error_vec(d1.apply(vec(x_mat)), direct));

        // Bilinear consistency D1(Phi) x == D2(x) vec(Phi) on random inputs.
        {
            const ComplexVector x = complex_gaussian_vector(rng, m * qbar);
            IntMatrix phi = IntMatrix::Zero(k_sub, qbar);
            for (int q = 0; q < qbar; ++q)
                for (int k = 0; k < k_sub; ++k) phi(k, q) = u01(rng) < 0.7 ? 1 : 0;
            const SensingD1 d1r(dict.bs_dict, apply_mask(dict.comp_dict, expand_mask(phi, rep)),
                                phases);
            const ComplexMatrix d2 =
                assemble_d2_dense(dict.bs_dict, dict.comp_dict, phases, x, k_sub);
            const ComplexVector phi_vec =
                vec(phi.cast<double>().cast<Complex>().eval());
            bilinear.feed(rel_error_vec(ComplexVector(d2 * phi_vec), d1r.apply(x)));

            // Same operator through the literal sparse vec-transform chain.
            const SparseComplexMatrix s_mm = lemma1_transform(ComplexMatrix::Ones(m, m), n, qbar);
            const SparseComplexMatrix s_rep =
                lemma1_transform(ComplexMatrix::Ones(rep, 1), k_sub, qbar);
            const ComplexVector diag_qf = vec(kron(dict.comp_dict, dict.bs_dict));
            ComplexMatrix d2_lit(m * pilots, k_sub * qbar);
            const ComplexMatrix xt = ComplexMatrix(x.transpose());
            for (int p = 0; p < pilots; ++p) {
                const ComplexMatrix front =
                    kron(xt, kron(ComplexMatrix(phases.col(p).transpose()),
                                  ComplexMatrix::Identity(m, m)));
                d2_lit.middleRows(p * m, m) =
                    ComplexMatrix(front * diag_qf.asDiagonal()) * s_mm * s_rep;
            }
            lemma_route.feed(rel_error(d2_lit, d2));
        }
    }

    std::vector<CheckResult> out;
    out.push_back(pair_cols.result("appendix-a-pair-columns", 1e-12));
    out.push_back(cascade.result("compressed-cascade-equivalence", tol));
    out.push_back(col_count.result("active-column-count", 0.0));
    out.push_back(bilinear.result("d1-d2-bilinear-consistency", tol));
    out.push_back(lemma_route.result("d2-vec-transform-route", tol));
    return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
    return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; });
}

void print_results(const std::vector<CheckResult>& results) {
    for (const CheckResult& r : results)
        std::printf("%-36s %s  (worst %.3e, tol %.1e)\n", r.name.c_str(),
                    r.pass ? "PASS" : "FAIL", r.worst_error, r.tolerance);
}

}  // namespace hfce
