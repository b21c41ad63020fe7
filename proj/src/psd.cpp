// psd.cpp - alternating-projection solver for small PSD-constrained programs.
//
// The level search brackets the objective by bisection; an active-face
// polish then pins the blocks' near-null eigenspaces as extra affine rows
// and re-projects, which recovers the exact optimum from a close point.

#include "qk/psd.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>

namespace qk {

namespace {

Eigen::MatrixXcd to_eigen(const Mat<Cx<double>>& m) {
    Eigen::MatrixXcd r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::complex<double>(m(i, j).re, m(i, j).im);
    return r;
}

double re_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a.adjoint() * b).trace().real();
}

// Least-squares projector onto {y : g y = h(level)} in the lifted
// (y, block) geometry; the KKT matrix is factored once per row set.
struct Projector {
    Eigen::MatrixXd g;
    Eigen::VectorXd h;  // fixed part; an optional level slot sits at h(level_row)
    Eigen::Index level_row = -1;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> kkt;

    void factor(const Eigen::MatrixXd& hess) {
        const Eigen::Index nn = hess.rows(), me = g.rows();
        Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nn + me, nn + me);
        k.topLeftCorner(nn, nn) = hess;
        if (me) {
            k.topRightCorner(nn, me) = g.transpose();
            k.bottomLeftCorner(me, nn) = g;
        }
        kkt.compute(k);
    }
};

struct Workspace {
    const PsdProgram& prog;
    std::size_t n;
    std::vector<std::vector<Eigen::MatrixXcd>> coeff;  // [block][var]
    std::vector<Eigen::MatrixXcd> constant;            // [block]
    Eigen::MatrixXd hess;                              // I + sum gram(coeff)
    Eigen::MatrixXd eq;
    Eigen::VectorXd eq_rhs;
    Eigen::VectorXd cvec;
    Projector proj_free;   // equality rows only
    Projector proj_level;  // equality rows plus the objective-level row
    long iters = 0;

    explicit Workspace(const PsdProgram& p) : prog(p), n(p.num_vars) {
        for (const auto& b : p.blocks) {
            std::vector<Eigen::MatrixXcd> cs;
            cs.reserve(n);
            for (const auto& a : b.coeff) cs.push_back(to_eigen(a));
            coeff.push_back(std::move(cs));
            constant.push_back(to_eigen(b.constant));
        }
        const auto nn = static_cast<Eigen::Index>(n);
        hess = Eigen::MatrixXd::Identity(nn, nn);
        for (std::size_t bi = 0; bi < coeff.size(); ++bi)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = i; k < n; ++k) {
                    double v = re_inner(coeff[bi][i], coeff[bi][k]);
                    hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) += v;
                    if (k != i)
                        hess(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) += v;
                }
        const auto me = static_cast<Eigen::Index>(prog.eq.rows());
        eq.resize(me, nn);
        eq_rhs.resize(me);
        for (Eigen::Index i = 0; i < me; ++i) {
            eq_rhs(i) = prog.eq_rhs[static_cast<std::size_t>(i)];
            for (std::size_t j = 0; j < n; ++j)
                eq(i, static_cast<Eigen::Index>(j)) = prog.eq(static_cast<std::size_t>(i), j);
        }
        cvec = Eigen::VectorXd::Zero(nn);
        for (std::size_t j = 0; j < prog.objective.size(); ++j)
            cvec(static_cast<Eigen::Index>(j)) = prog.objective[j];

        proj_free.g = eq;
        proj_free.h = eq_rhs;
        proj_free.factor(hess);

        proj_level.g.resize(me + 1, nn);
        if (me) proj_level.g.topRows(me) = eq;
        proj_level.g.row(me) = cvec.transpose();
        proj_level.h.resize(me + 1);
        if (me) proj_level.h.head(me) = eq_rhs;
        proj_level.h(me) = 0.0;
        proj_level.level_row = me;
        proj_level.factor(hess);
    }

    Eigen::MatrixXcd block_at(std::size_t bi, const Eigen::VectorXd& y) const {
        Eigen::MatrixXcd m = constant[bi];
        for (std::size_t i = 0; i < n; ++i)
            if (y(static_cast<Eigen::Index>(i)) != 0.0)
                m += y(static_cast<Eigen::Index>(i)) * coeff[bi][i];
        return m;
    }

    std::vector<Eigen::MatrixXcd> clamp_blocks(const Eigen::VectorXd& y) const {
        std::vector<Eigen::MatrixXcd> z(coeff.size());
        for (std::size_t bi = 0; bi < coeff.size(); ++bi) {
            Eigen::MatrixXcd m = block_at(bi, y);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint().eval()));
            z[bi] = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                    es.eigenvectors().adjoint();
        }
        return z;
    }

    Eigen::VectorXd project_affine(const Projector& proj, const Eigen::VectorXd& y0,
                                   const std::vector<Eigen::MatrixXcd>& z, double level) const {
        const auto nn = static_cast<Eigen::Index>(n);
        Eigen::VectorXd g = y0;
        for (std::size_t bi = 0; bi < coeff.size(); ++bi) {
            Eigen::MatrixXcd diff = z[bi] - constant[bi];
            for (std::size_t i = 0; i < n; ++i)
                g(static_cast<Eigen::Index>(i)) += re_inner(coeff[bi][i], diff);
        }
        const Eigen::Index me = proj.g.rows();
        Eigen::VectorXd rhs(nn + me);
        rhs.head(nn) = g;
        if (me) rhs.segment(nn, me) = proj.h;
        if (proj.level_row >= 0) rhs(nn + proj.level_row) = level;
        return proj.kkt.solve(rhs).head(nn);
    }

    // Worst constraint violation: most negative block eigenvalue plus the
    // equality residual (the level row is not part of feasibility).
    double violation(const Eigen::VectorXd& y) const {
        double v = 0.0;
        for (std::size_t bi = 0; bi < coeff.size(); ++bi) {
            Eigen::MatrixXcd m = block_at(bi, y);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint().eval()),
                                                               Eigen::EigenvaluesOnly);
            if (es.eigenvalues().size()) v = std::max(v, -es.eigenvalues().minCoeff());
        }
        if (eq.rows()) v = std::max(v, (eq * y - eq_rhs).cwiseAbs().maxCoeff());
        return v;
    }

    // Over-relaxed alternating projections between the affine set and the
    // product PSD cone.
    bool pocs(const Projector& proj, Eigen::VectorXd& y, double level, double feas_tol,
              long budget, const CancelToken& cancel) {
        double prev_window = std::numeric_limits<double>::infinity();
        double cur_best = std::numeric_limits<double>::infinity();
        const double relax = 1.8;
        for (long it = 0; it < budget; ++it) {
            ++iters;
            if ((it & 63) == 0 && cancel.cancelled()) return false;
            Eigen::VectorXd y_proj = project_affine(proj, y, clamp_blocks(y), level);
            y = y + relax * (y_proj - y);
            double viol = violation(y_proj);
            if (viol <= feas_tol) {
                y = y_proj;
                return true;
            }
            cur_best = std::min(cur_best, viol);
            if ((it + 1) % 80 == 0) {  // stagnation window
                if (it >= 320 && cur_best > 0.995 * prev_window) {
                    y = y_proj;
                    return false;
                }
                prev_window = cur_best;
                cur_best = std::numeric_limits<double>::infinity();
            }
        }
        y = project_affine(proj, y, clamp_blocks(y), level);
        return violation(y) <= feas_tol;
    }

    // Near-null face structure at y: constraint rows v_a^dag M(.) v_b and
    // their current residuals (which vanish exactly on the face).
    void face_system(const Eigen::VectorXd& y, double eta, Eigen::MatrixXd& g,
                     Eigen::VectorXd& resid) const {
        const auto nn = static_cast<Eigen::Index>(n);
        std::vector<Eigen::VectorXd> rows;
        std::vector<double> vals;
        for (std::size_t bi = 0; bi < coeff.size(); ++bi) {
            Eigen::MatrixXcd m = block_at(bi, y);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint().eval()));
            std::vector<Eigen::VectorXcd> nulls;
            for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
                if (es.eigenvalues()(k) < eta) nulls.push_back(es.eigenvectors().col(k));
            for (std::size_t a = 0; a < nulls.size(); ++a)
                for (std::size_t b = a; b < nulls.size(); ++b)
                    for (int part = 0; part < (a == b ? 1 : 2); ++part) {
                        Eigen::VectorXd row(nn);
                        for (std::size_t i = 0; i < n; ++i) {
                            std::complex<double> v =
                                (nulls[a].adjoint() * coeff[bi][i] * nulls[b])(0);
                            row(static_cast<Eigen::Index>(i)) = part ? v.imag() : v.real();
                        }
                        std::complex<double> cur = (nulls[a].adjoint() * m * nulls[b])(0);
                        rows.push_back(std::move(row));
                        vals.push_back(part ? cur.imag() : cur.real());
                    }
        }
        g.resize(eq.rows() + static_cast<Eigen::Index>(rows.size()), nn);
        resid.resize(g.rows());
        if (eq.rows()) {
            g.topRows(eq.rows()) = eq;
            resid.head(eq.rows()) = eq * y - eq_rhs;
        }
        for (std::size_t r = 0; r < rows.size(); ++r) {
            g.row(eq.rows() + static_cast<Eigen::Index>(r)) = rows[r].transpose();
            resid(eq.rows() + static_cast<Eigen::Index>(r)) = vals[r];
        }
    }

    // Predictor-corrector slide along the boundary: step in the projected
    // objective direction, then Newton-correct back onto the rotated face.
    // Strict monotone descent with backtracking; stops at face stationarity.
    void face_slide(Eigen::VectorXd& y, double feas_tol, int max_rounds) {
        double block_scale = 1.0;
        for (std::size_t bi = 0; bi < coeff.size(); ++bi) {
            Eigen::MatrixXcd m = block_at(bi, y);
            block_scale = std::max(block_scale, m.cwiseAbs().maxCoeff());
        }
        const double eta = 1e-5 * block_scale;
        double step = 0.05 * (1.0 + y.norm());
        Eigen::MatrixXd g;
        Eigen::VectorXd resid;
        for (int round = 0; round < max_rounds; ++round) {
            face_system(y, eta, g, resid);
            Eigen::VectorXd d = -cvec;
            if (g.rows()) {
                Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(g);
                d -= cod.pseudoInverse() * (g * (-cvec));
            }
            const double dn = d.norm();
            if (dn <= 1e-11 * (1.0 + cvec.norm())) break;
            d /= dn;

            bool moved = false;
            for (int back = 0; back < 14 && !moved; ++back, step *= 0.35) {
                Eigen::VectorXd z = y + step * d;
                for (int corr = 0; corr < 3; ++corr) {  // Newton correction
                    Eigen::MatrixXd gz;
                    Eigen::VectorXd rz;
                    face_system(z, eta, gz, rz);
                    if (!gz.rows()) break;
                    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gz);
                    z -= cod.pseudoInverse() * rz;
                }
                ++iters;
                if (violation(z) <= 30 * feas_tol && cvec.dot(z) < cvec.dot(y) - 1e-14) {
                    y = z;
                    moved = true;
                    step *= 3.0;  // be greedier next round
                }
            }
            if (!moved) break;
        }
    }
};

}  // namespace

PsdResult solve_psd_program(const PsdProgram& prog, const PsdOptions& opts) {
    if (prog.num_vars > opts.dim_cap * opts.dim_cap)
        throw error(errc::dimension_mismatch, "psd program: too many variables");
    for (const auto& b : prog.blocks) {
        if (b.constant.rows() != b.constant.cols() || b.constant.rows() > opts.dim_cap)
            throw error(errc::dimension_mismatch, "psd program: block dimension over cap");
        if (b.coeff.size() != prog.num_vars)
            throw error(errc::dimension_mismatch, "psd program: coeff count != num_vars");
    }
    if (prog.eq.rows() != prog.eq_rhs.size())
        throw error(errc::dimension_mismatch, "psd program: equality shape");

    Workspace ws(prog);
    PsdResult res;
    const double feas_tol = std::min(1e-9, opts.tol * 1e-2);

    auto budget_left = [&] { return opts.max_iter - ws.iters; };

    // 1. find any feasible point
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prog.num_vars));
    if (!ws.pocs(ws.proj_free, y, 0.0, feas_tol, std::min<long>(budget_left(), 20000),
                 opts.cancel)) {
        res.status = PsdStatus::no_convergence;
        res.iterations = ws.iters;
        return res;
    }

    const bool have_objective =
        std::any_of(prog.objective.begin(), prog.objective.end(), [](double v) { return v != 0.0; });
    Eigen::VectorXd best = y;
    double t_hi = ws.cvec.dot(y);

    if (have_objective) {
        // 2. bracket the optimum from below
        double t_lo;
        if (std::isfinite(prog.objective_lower_bound)) {
            t_lo = prog.objective_lower_bound;
        } else {
            t_lo = t_hi;
            double width = std::max(1.0, std::fabs(t_hi));
            bool bounded = false;
            for (int probe = 0; probe < 60 && budget_left() > 0; ++probe) {
                double t = t_lo - width;
                Eigen::VectorXd yt = best;
                if (ws.pocs(ws.proj_level, yt, t, feas_tol, std::min<long>(budget_left(), 4000),
                            opts.cancel)) {
                    best = yt;
                    t_lo = ws.cvec.dot(yt);
                    t_hi = std::min(t_hi, t_lo);
                    width *= 2.0;
                } else {
                    t_lo = t;
                    bounded = true;
                    break;
                }
            }
            if (!bounded) {
                res.status = PsdStatus::no_convergence;
                res.iterations = ws.iters;
                return res;
            }
        }

        // 3. coarse bisection on the objective level, warm-started; the
        // boundary slide below owns the endgame
        const double gap_tol = std::max(1e-4, 1e-4 * std::fabs(t_hi));
        while (t_hi - t_lo > gap_tol && budget_left() > 0) {
            double mid = 0.5 * (t_hi + t_lo);
            Eigen::VectorXd yt = best;
            if (ws.pocs(ws.proj_level, yt, mid, feas_tol, std::min<long>(budget_left(), 2500),
                        opts.cancel)) {
                best = yt;
                t_hi = ws.cvec.dot(yt);
            } else {
                t_lo = mid;
            }
        }

        // 4. boundary slide: descend along the active faces until the
        // objective direction is orthogonal to every remaining face
        // direction; a downward probe then confirms optimality
        for (int round = 0; round < 3 && budget_left() > 0; ++round) {
            ws.face_slide(best, feas_tol, static_cast<int>(8 * prog.num_vars + 32));
            double probe = ws.cvec.dot(best) - std::max(10 * opts.tol, 1e-6);
            Eigen::VectorXd yt = best;
            if (!ws.pocs(ws.proj_level, yt, probe, feas_tol,
                         std::min<long>(budget_left(), 20000), opts.cancel))
                break;
            best = yt;  // the slide stalled early; keep descending
        }
    }

    res.status = PsdStatus::solved;
    res.y.assign(best.data(), best.data() + best.size());
    res.value = ws.cvec.dot(best);
    res.residual = ws.violation(best);  // independent recheck of the returned point
    res.iterations = ws.iters;
    if (res.residual > opts.tol) res.status = PsdStatus::no_convergence;
    return res;
}

}  // namespace qk
