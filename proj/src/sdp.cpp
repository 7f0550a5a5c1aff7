#include "qdb/sdp.hpp"
#include <cstdlib>
#include <cstdio>

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>

#include "qdb/fisher.hpp"

namespace qdb::sdp {

// --- problem assembly -----------------------------------------------------

int SdpProblem::add_var(double obj_coeff) {
    objective.conservativeResize(num_vars + 1);
    objective(num_vars) = obj_coeff;
    return num_vars++;
}

int SdpProblem::add_block(int dim, Cone cone, bool real_only) {
    Block b;
    b.dim = dim;
    b.cone = cone;
    b.real_only = real_only;
    blocks.push_back(std::move(b));
    return static_cast<int>(blocks.size()) - 1;
}

void SdpProblem::add_entry(int block, int var, int row, int col, cd v) {
    if (row == col && std::abs(v.imag()) > 1e-14)
        throw SdpError("add_entry: diagonal entries must be real");
    blocks[block].entries.push_back(Entry{var, row, col, v});
}

void SdpProblem::set_constant(int block, const Mat& f0) {
    require_hermitian(f0, "SdpProblem::set_constant");
    const int n = static_cast<int>(f0.rows());
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            if (std::abs(f0(i, j)) > 0) add_entry(block, -1, i, j, f0(i, j));
}

std::vector<Mat> SdpProblem::apply_map(const RVec& y) const {
    std::vector<Mat> out;
    for (const Block& b : blocks) {
        Mat m = Mat::Zero(b.dim, b.dim);
        for (const Entry& e : b.entries) {
            if (e.var < 0) continue;
            m(e.row, e.col) += y(e.var) * e.value;
            if (e.row != e.col) m(e.col, e.row) += y(e.var) * std::conj(e.value);
        }
        out.push_back(std::move(m));
    }
    return out;
}

RVec SdpProblem::apply_adjoint(const std::vector<Mat>& z) const {
    RVec out = RVec::Zero(num_vars);
    for (size_t k = 0; k < blocks.size(); ++k) {
        const Block& b = blocks[k];
        for (const Entry& e : b.entries) {
            if (e.var < 0) continue;
            cd c = std::conj(e.value) * z[k](e.row, e.col);
            if (e.row != e.col) c += e.value * z[k](e.col, e.row);
            out(e.var) += c.real();
        }
    }
    return out;
}

std::vector<Mat> SdpProblem::assemble(const RVec& y) const {
    std::vector<Mat> out = apply_map(y);
    for (size_t k = 0; k < blocks.size(); ++k) {
        for (const Entry& e : blocks[k].entries) {
            if (e.var >= 0) continue;
            out[k](e.row, e.col) += e.value;
            if (e.row != e.col) out[k](e.col, e.row) += std::conj(e.value);
        }
    }
    return out;
}

int HermVar::diag(int i) const { return base + i; }
int HermVar::re(int i, int j) const {
    // packed upper triangle after the dim diagonal vars
    int lo = std::min(i, j), hi = std::max(i, j);
    int off = lo * dim - lo * (lo + 1) / 2 + (hi - lo - 1);
    return base + dim + 2 * off;
}
int HermVar::im(int i, int j) const { return re(i, j) + 1; }

Mat HermVar::extract(const RVec& y) const {
    Mat m = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) m(i, i) = y(diag(i));
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            m(i, j) = cd(y(re(i, j)), y(im(i, j)));
            m(j, i) = std::conj(m(i, j));
        }
    return m;
}

HermVar add_hermitian_var(SdpProblem& p, int dim, const Mat& obj_weight) {
    HermVar v;
    v.base = p.num_vars;
    v.dim = dim;
    const bool weighted = obj_weight.size() > 0;
    for (int i = 0; i < dim; ++i) p.add_var(weighted ? obj_weight(i, i).real() : 0.0);
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            // Tr[C M] contribution of (re,im) of M_ij: 2 Re(C_ji re + i C_ji im)
            p.add_var(weighted ? 2.0 * obj_weight(j, i).real() : 0.0);
            p.add_var(weighted ? -2.0 * obj_weight(j, i).imag() : 0.0);
        }
    return v;
}

void place_herm_var(SdpProblem& p, int block, const HermVar& v, int row_off, int col_off,
                    cd coeff, bool) {
    const int d = v.dim;
    if (row_off == col_off) {
        for (int i = 0; i < d; ++i) {
            if (std::abs(coeff.imag()) > 1e-14)
                throw SdpError("place_herm_var: diagonal placement needs a real coeff");
            p.add_entry(block, v.diag(i), row_off + i, col_off + i, coeff);
            for (int j = i + 1; j < d; ++j) {
                p.add_entry(block, v.re(i, j), row_off + i, col_off + j, coeff);
                p.add_entry(block, v.im(i, j), row_off + i, col_off + j, coeff * cd(0, 1));
            }
        }
        return;
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) {
                p.add_entry(block, v.diag(i), row_off + i, col_off + i, coeff);
            } else if (i < j) {
                p.add_entry(block, v.re(i, j), row_off + i, col_off + j, coeff);
                p.add_entry(block, v.im(i, j), row_off + i, col_off + j, coeff * cd(0, 1));
            } else {
                p.add_entry(block, v.re(j, i), row_off + i, col_off + j, coeff);
                p.add_entry(block, v.im(j, i), row_off + i, col_off + j, -coeff * cd(0, 1));
            }
        }
}

// --- real embedding and interior-point core --------------------------------

namespace {

RMat embed(const Mat& h) {
    const int n = static_cast<int>(h.rows());
    RMat out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = h.real();
    out.bottomRightCorner(n, n) = h.real();
    out.topRightCorner(n, n) = -h.imag();
    out.bottomLeftCorner(n, n) = h.imag();
    return out;
}

struct RealProblem {
    std::vector<int> dims;
    std::vector<RMat> C;                  // F0 per block
    std::vector<std::vector<RMat>> A;     // A[i][k] = -F_i on block k
    RVec b;
    int m = 0;
};

RealProblem build_real(const SdpProblem& p) {
    RealProblem rp;
    rp.b = p.objective;
    rp.m = p.num_vars;

    // Assemble complex F0 and F_i per block, then embed (nonneg blocks split
    // into 1x1 scalar blocks).
    for (const Block& blk : p.blocks) {
        Mat f0 = Mat::Zero(blk.dim, blk.dim);
        std::vector<Mat> fi(p.num_vars, Mat());
        for (const Entry& e : blk.entries) {
            Mat* target = nullptr;
            if (e.var < 0) {
                target = &f0;
            } else {
                if (fi[e.var].size() == 0) fi[e.var] = Mat::Zero(blk.dim, blk.dim);
                target = &fi[e.var];
            }
            (*target)(e.row, e.col) += e.value;
            if (e.row != e.col) (*target)(e.col, e.row) += std::conj(e.value);
        }
        auto push_block = [&](const Mat& cf0, const std::vector<Mat>& cfi, bool real_only) {
            if (real_only) {
                rp.C.push_back(cf0.real());
            } else {
                rp.C.push_back(embed(cf0));
            }
            rp.dims.push_back(static_cast<int>(rp.C.back().rows()));
            if (rp.A.empty()) rp.A.resize(p.num_vars);
            for (int i = 0; i < p.num_vars; ++i) {
                Mat f = cfi[i].size() ? cfi[i] : Mat::Zero(cf0.rows(), cf0.cols());
                rp.A[i].push_back(real_only ? RMat(-f.real()) : RMat(-embed(f)));
            }
        };
        if (blk.cone == Cone::nonneg) {
            for (int d = 0; d < blk.dim; ++d) {
                Mat cf0(1, 1);
                cf0(0, 0) = f0(d, d);
                std::vector<Mat> cfi(p.num_vars);
                for (int i = 0; i < p.num_vars; ++i) {
                    if (fi[i].size() == 0) continue;
                    Mat e(1, 1);
                    e(0, 0) = fi[i](d, d);
                    cfi[i] = e;
                }
                push_block(cf0, cfi, true);
            }
        } else {
            push_block(f0, fi, blk.real_only);
        }
    }
    if (rp.A.empty()) rp.A.resize(p.num_vars);
    return rp;
}

RMat chol_lower(const RMat& x, const char* who) {
    RMat m = x;
    double jitter = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        Eigen::LLT<RMat> llt(m);
        if (llt.info() == Eigen::Success) return llt.matrixL();
        jitter = (jitter == 0.0) ? 1e-14 * (1.0 + m.trace()) : jitter * 100;
        m = x + jitter * RMat::Identity(x.rows(), x.cols());
    }
    throw NumericalError(std::string(who) + ": Cholesky factorization failed");
}

// Largest step t in [0, 1] with P + t*D staying PD (fraction to boundary).
double step_length(const RMat& p, const RMat& d, double tau) {
    RMat l = chol_lower(p, "step_length");
    RMat t = l.triangularView<Eigen::Lower>().solve(d);
    RMat w = l.triangularView<Eigen::Lower>().solve(RMat(t.transpose()));
    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (w + w.transpose()));
    double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-14) return 1.0;
    return std::min(1.0, -tau / lmin);
}

struct Iterate {
    std::vector<RMat> X, S;
    RVec y;
};

double inner(const std::vector<RMat>& a, const std::vector<RMat>& b) {
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
    return s;
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SolveOptions& opt) {
    RealProblem rp = build_real(p);
    const int m = rp.m;
    const size_t nb = rp.dims.size();
    long ntot = 0;
    for (int d : rp.dims) ntot += d;

    double normC = 0.0, maxA = 0.0;
    for (const RMat& c : rp.C) normC = std::max(normC, c.norm());
    RVec normAi = RVec::Zero(m);
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (const RMat& a : rp.A[i]) s += a.squaredNorm();
        normAi(i) = std::sqrt(s);
        maxA = std::max(maxA, normAi(i));
    }

    double xi = std::max({10.0, std::sqrt(static_cast<double>(ntot))});
    for (int i = 0; i < m; ++i)
        xi = std::max(xi, static_cast<double>(ntot) * (1 + std::abs(rp.b(i))) / (1 + normAi(i)));
    double eta = std::max({10.0, std::sqrt(static_cast<double>(ntot)), normC, maxA,
                           rp.b.size() ? rp.b.cwiseAbs().maxCoeff() : 0.0});

    Iterate it;
    it.y = RVec::Zero(m);
    for (size_t k = 0; k < nb; ++k) {
        it.X.push_back(xi * RMat::Identity(rp.dims[k], rp.dims[k]));
        it.S.push_back(eta * RMat::Identity(rp.dims[k], rp.dims[k]));
    }

    SdpSolution sol;
    double best_score = std::numeric_limits<double>::infinity();
    SdpSolution best;
    int stall_count = 0;
    double prev_rp_norm = std::numeric_limits<double>::infinity();
    double last_step = 1.0;

    auto primal_residual = [&](const Iterate& cur) {
        RVec r = rp.b;
        for (int i = 0; i < m; ++i) r(i) -= inner(rp.A[i], cur.X);
        return r;
    };
    auto dual_residual = [&](const Iterate& cur) {
        std::vector<RMat> rd;
        for (size_t k = 0; k < nb; ++k) {
            RMat d = rp.C[k] - cur.S[k];
            for (int i = 0; i < m; ++i) d -= cur.y(i) * rp.A[i][k];
            rd.push_back(std::move(d));
        }
        return rd;
    };

    const double tol = opt.tol;
    int iter = 0;
    for (; iter < opt.max_iter; ++iter) {
        RVec rpv = primal_residual(it);
        std::vector<RMat> rd = dual_residual(it);

        double pobj = inner(rp.C, it.X);
        double dobj = rp.b.dot(it.y);
        double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
        double rp_norm = rpv.norm() / (1.0 + rp.b.norm());
        double rd_norm = 0.0;
        for (const RMat& d : rd) rd_norm += d.squaredNorm();
        rd_norm = std::sqrt(rd_norm) / (1.0 + normC);

        sol.primal_value = pobj;
        sol.dual_value = dobj;
        sol.gap = gap;
        sol.y = it.y;
        sol.X = it.X;
        sol.iterations = iter;
        if (std::getenv("QDB_SDP_TRACE"))
            std::fprintf(stderr, "it=%3d pobj=%+.6e dobj=%+.6e gap=%.2e rp=%.2e rd=%.2e\n",
                         iter, pobj, dobj, gap, rp_norm, rd_norm);
        double score = std::max({gap, rp_norm, rd_norm});
        if (score < best_score) {
            best_score = score;
            best = sol;
        }

        if (gap <= tol && rp_norm <= std::max(tol, 1e-10) && rd_norm <= std::max(tol, 1e-10)) {
            sol.status = SolveStatus::optimal;
            return sol;
        }

        // Stalled primal infeasibility signals corrupted input programs: the
        // residual sits above 1e-6 for 20 iterations with no real progress
        // while the gap stays wide open.
        if (rp_norm > 1e-6 && rp_norm > 0.995 * prev_rp_norm && gap > 1e-4 && iter > 5) {
            if (++stall_count >= 20) {
                sol.status = SolveStatus::infeasible;
                if (opt.throw_on_failure) throw SdpError("solve: primal residual stalled");
                return sol;
            }
        } else {
            stall_count = 0;
        }
        prev_rp_norm = rp_norm;

        double mu = inner(it.X, it.S) / ntot;
        // Numerical floor: nothing left to gain once complementarity reaches
        // rounding scale; hand back the best iterate.
        double data_scale = 1.0 + std::abs(pobj) + std::abs(dobj);
        if (mu < 1e-14 * data_scale) break;

        // NT scaling per block: W = G G^T with G = Lx V Sigma^{-1/2},
        // where Ls^T Lx = U Sigma V^T.
        std::vector<RMat> W(nb), Sinv(nb);
        bool scaling_ok = true;
        for (size_t k = 0; k < nb && scaling_ok; ++k) {
            try {
                RMat lx = chol_lower(it.X[k], "solve(X)");
                RMat ls = chol_lower(it.S[k], "solve(S)");
                Eigen::JacobiSVD<RMat> svd(RMat(ls.transpose() * lx),
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
                RVec si = svd.singularValues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
                RMat g = lx * svd.matrixV() * si.asDiagonal();
                W[k] = g * g.transpose();
                RMat lsi = ls.triangularView<Eigen::Lower>().solve(
                    RMat::Identity(rp.dims[k], rp.dims[k]));
                Sinv[k] = lsi.transpose() * lsi;
            } catch (const NumericalError&) {
                scaling_ok = false;
            }
        }
        if (!scaling_ok) break;  // iterate degenerated; fall back to the best one

        // Schur complement M_ij = sum_k <A_i, W A_j W>.
        RMat M = RMat::Zero(m, m);
        std::vector<std::vector<RMat>> WAW(m);
        for (int i = 0; i < m; ++i) {
            WAW[i].resize(nb);
            for (size_t k = 0; k < nb; ++k) WAW[i][k] = W[k] * rp.A[i][k] * W[k];
        }
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                double s = 0.0;
                for (size_t k = 0; k < nb; ++k)
                    s += rp.A[i][k].cwiseProduct(WAW[j][k]).sum();
                M(i, j) = s;
                M(j, i) = s;
            }
        Eigen::LDLT<RMat> mf(M + 1e-13 * (1.0 + M.trace() / std::max(1, m)) *
                                     RMat::Identity(m, m));

        auto solve_direction = [&](const std::vector<RMat>& rc, RVec& dy,
                                   std::vector<RMat>& dX, std::vector<RMat>& dS) {
            RVec rhs = rpv;
            for (int i = 0; i < m; ++i) {
                double s = 0.0;
                for (size_t k = 0; k < nb; ++k) {
                    s += rp.A[i][k].cwiseProduct(W[k] * rd[k] * W[k]).sum();
                    s -= rp.A[i][k].cwiseProduct(rc[k]).sum();
                }
                rhs(i) += s;
            }
            dy = mf.solve(rhs);
            dS.resize(nb);
            dX.resize(nb);
            for (size_t k = 0; k < nb; ++k) {
                dS[k] = rd[k];
                for (int i = 0; i < m; ++i) dS[k] -= dy(i) * rp.A[i][k];
                dX[k] = rc[k] - W[k] * dS[k] * W[k];
                dX[k] = 0.5 * (dX[k] + dX[k].transpose()).eval();
            }
        };

        const double tau = 0.98;

        // Predictor.
        std::vector<RMat> rc(nb);
        for (size_t k = 0; k < nb; ++k) rc[k] = -it.X[k];
        RVec dy_a;
        std::vector<RMat> dX_a, dS_a;
        solve_direction(rc, dy_a, dX_a, dS_a);
        double ap = 1.0, ad = 1.0;
        for (size_t k = 0; k < nb; ++k) {
            ap = std::min(ap, step_length(it.X[k], dX_a[k], tau));
            ad = std::min(ad, step_length(it.S[k], dS_a[k], tau));
        }
        double mu_aff = 0.0;
        for (size_t k = 0; k < nb; ++k)
            mu_aff += (it.X[k] + ap * dX_a[k]).cwiseProduct(it.S[k] + ad * dS_a[k]).sum();
        mu_aff /= ntot;
        double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 1e-10, 1.0);
        // Re-center hard whenever the previous combined step collapsed;
        // Mehrotra's exponent misjudges badly off-center iterates.
        if (last_step < 0.1) sigma = std::max(sigma, 0.5);
        if (last_step < 0.01) sigma = std::max(sigma, 0.9);

        // Corrector with a Mehrotra-style second-order term, dropped when it
        // overwhelms the centering target and would wreck the direction.
        for (size_t k = 0; k < nb; ++k) {
            RMat corr = dX_a[k] * dS_a[k] * Sinv[k];
            corr = 0.5 * (corr + corr.transpose()).eval();
            double center_scale = sigma * mu * Sinv[k].norm() + it.X[k].norm();
            if (corr.norm() > 10.0 * center_scale) corr.setZero();
            rc[k] = sigma * mu * Sinv[k] - it.X[k] - corr;
        }
        RVec dy;
        std::vector<RMat> dX, dS;
        solve_direction(rc, dy, dX, dS);

        bool finite_dir = dy.allFinite();
        for (size_t k = 0; k < nb && finite_dir; ++k)
            finite_dir = dX[k].allFinite() && dS[k].allFinite();
        if (!finite_dir) break;

        ap = 1.0;
        ad = 1.0;
        for (size_t k = 0; k < nb; ++k) {
            ap = std::min(ap, step_length(it.X[k], dX[k], tau));
            ad = std::min(ad, step_length(it.S[k], dS[k], tau));
        }

        // Rounding can defeat the fraction-to-boundary rule near convergence;
        // shrink until both cones verify positive definite.
        auto still_pd = [](const RMat& m) {
            Eigen::LLT<RMat> llt(m);
            return llt.info() == Eigen::Success;
        };
        bool stepped = false;
        for (int shrink = 0; shrink < 12; ++shrink) {
            bool ok = true;
            for (size_t k = 0; k < nb && ok; ++k)
                ok = still_pd(it.X[k] + ap * dX[k]) && still_pd(it.S[k] + ad * dS[k]);
            if (ok) {
                stepped = true;
                break;
            }
            ap *= 0.5;
            ad *= 0.5;
        }
        if (!stepped) break;
        last_step = std::min(ap, ad);
        if (std::getenv("QDB_SDP_TRACE"))
            std::fprintf(stderr, "      ap=%.3e ad=%.3e sigma=%.3e mu=%.3e\n", ap, ad,
                         sigma, mu);
        for (size_t k = 0; k < nb; ++k) {
            it.X[k] += ap * dX[k];
            it.S[k] += ad * dS[k];
        }
        it.y += ad * dy;
    }

    best.iterations = iter;
    if (best_score <= tol) {
        best.status = SolveStatus::optimal;
        return best;
    }
    best.status = SolveStatus::max_iterations;
    if (opt.throw_on_failure) throw SdpError("solve: maximum iterations reached");
    return best;
}

// --- builders ---------------------------------------------------------------

namespace {

struct Compression {
    Mat p;  // r x d, rows are support eigenvectors (adjointed)
    int rank = 0;
    double min_pos = 0.0;
    double max_pos = 0.0;
};

Compression compress_support(const Mat& psd) {
    EigDecomp ed = eig_hermitian(psd);
    const int d = static_cast<int>(psd.rows());
    double tol = default_rank_tol(ed.eigenvalues.size() ? ed.eigenvalues.maxCoeff() : 0.0, d);
    std::vector<int> keep;
    for (int j = 0; j < d; ++j)
        if (ed.eigenvalues(j) > tol) keep.push_back(j);
    Compression c;
    c.rank = static_cast<int>(keep.size());
    c.p = Mat::Zero(c.rank, d);
    c.min_pos = std::numeric_limits<double>::infinity();
    for (int r = 0; r < c.rank; ++r) {
        c.p.row(r) = ed.eigenvectors.col(keep[r]).adjoint();
        c.min_pos = std::min(c.min_pos, ed.eigenvalues(keep[r]));
        c.max_pos = std::max(c.max_pos, ed.eigenvalues(keep[r]));
    }
    return c;
}

// The Fisher programs scale exactly under deriv -> deriv / c: the optimal
// (value, M) map to (value/c^2, M/c^2). Normalizing so the optimum is O(1)
// keeps badly scaled instances (tiny gamma, large information) solvable.
double deriv_scale(const Mat& deriv, double min_pos_base) {
    double c2 = deriv.squaredNorm() / std::max(min_pos_base, 1e-12);
    return std::sqrt(std::max(c2, 1.0));
}

SdpSolution run_or_throw(const SdpProblem& p, double tol) {
    SolveOptions opt;
    opt.tol = tol;
    SdpSolution s = solve(p, opt);
    if (s.status == SolveStatus::infeasible)
        throw SdpError("interior-point solve reported infeasibility");
    if (s.status == SolveStatus::max_iterations && s.gap > 100 * tol)
        throw SdpError("interior-point solve did not converge");
    return s;
}

// Basis matrix of one real parameter of a Hermitian matrix variable.
Mat herm_basis(const HermVar& v, int var) {
    Mat b = Mat::Zero(v.dim, v.dim);
    int idx = var - v.base;
    if (idx < v.dim) {
        b(idx, idx) = 1.0;
        return b;
    }
    idx -= v.dim;
    int pair = idx / 2;
    bool imag = idx % 2;
    // invert the packed upper-triangle offset
    int i = 0, off = pair;
    while (off >= v.dim - i - 1) {
        off -= v.dim - i - 1;
        ++i;
    }
    int j = i + 1 + off;
    if (imag) {
        b(i, j) = cd(0, 1);
        b(j, i) = cd(0, -1);
    } else {
        b(i, j) = 1.0;
        b(j, i) = 1.0;
    }
    return b;
}

// Adds image(var) for every parameter of `v`, where `image` maps the basis
// matrix of the parameter to its Hermitian coefficient inside `block`.
void place_mapped_herm_var(SdpProblem& p, int block, const HermVar& v,
                           const std::function<Mat(const Mat&)>& image) {
    const int nvars = v.dim * v.dim;
    for (int k = 0; k < nvars; ++k) {
        int var = v.base + k;
        Mat coeff = image(herm_basis(v, var));
        const int n = static_cast<int>(coeff.rows());
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                cd c = coeff(i, j);
                if (std::abs(c) < 1e-15) continue;
                if (i == j) c = cd(c.real(), 0);
                p.add_entry(block, var, i, j, c);
            }
    }
}

}  // namespace

ExtReal sld_state_sdp(const Mat& rho, const Mat& drho, double tol, BuilderDiag* diag) {
    FinitenessReport rep = finiteness_report(rho, drho, FisherKind::sld);
    if (!rep.finite) return ExtReal::infinity();
    const int d = static_cast<int>(rho.rows());
    Mat big = kron(rho, Mat::Identity(d, d)) + kron(Mat::Identity(d, d), rho.transpose());
    Vec g = vec_gamma(drho);  // (drho (x) I)|Gamma>
    Compression c = compress_support(big);
    double scale = deriv_scale(drho, c.min_pos);
    Mat a = c.p * big * c.p.adjoint();
    Vec gc = c.p * g / scale;

    SdpProblem p;
    int mu = p.add_var(-2.0);  // maximize -2 mu = minimize 2 mu
    int blk = p.add_block(c.rank + 1);
    Mat f0 = Mat::Zero(c.rank + 1, c.rank + 1);
    f0.block(1, 1, c.rank, c.rank) = a;
    f0.block(1, 0, c.rank, 1) = gc;
    f0.block(0, 1, 1, c.rank) = gc.adjoint();
    p.set_constant(blk, f0);
    p.add_entry(blk, mu, 0, 0, 1.0);

    SdpSolution s = run_or_throw(p, tol);
    if (diag) *diag = BuilderDiag{s.gap, s.status, s.iterations};
    return ExtReal(2.0 * s.y(mu) * scale * scale);
}

ExtReal rld_state_sdp(const Mat& rho, const Mat& drho, double tol, BuilderDiag* diag) {
    FinitenessReport rep = finiteness_report(rho, drho, FisherKind::rld);
    if (!rep.finite) return ExtReal::infinity();
    Compression c = compress_support(rho);
    const int r = c.rank;
    double scale = deriv_scale(drho, c.min_pos);
    Mat rhoc = c.p * rho * c.p.adjoint();
    Mat drc = c.p * drho * c.p.adjoint() / scale;

    SdpProblem p;
    HermVar mvar = add_hermitian_var(p, r, Mat(-Mat::Identity(r, r)));  // maximize -Tr M
    int blk = p.add_block(2 * r);
    Mat f0 = Mat::Zero(2 * r, 2 * r);
    f0.block(0, r, r, r) = drc;
    f0.block(r, 0, r, r) = drc.adjoint();
    f0.block(r, r, r, r) = rhoc;
    p.set_constant(blk, f0);
    place_herm_var(p, blk, mvar, 0, 0);

    SdpSolution s = run_or_throw(p, tol);
    if (diag) *diag = BuilderDiag{s.gap, s.status, s.iterations};
    return ExtReal(-s.dual_value * scale * scale);
}

ExtReal rld_channel_sdp(const ChannelFamily& fam, double theta, double tol) {
    Choi ch = fam.at(theta);
    Mat dch = fam.deriv_at(theta);
    FinitenessReport rep = finiteness_report(ch.op, dch, FisherKind::rld);
    if (!rep.finite) return ExtReal::infinity();
    const int dr = ch.dim_in, db = ch.dim_out;
    Compression c = compress_support(ch.op);
    const int r = c.rank;
    double scale = deriv_scale(dch, c.min_pos);
    Mat gc = c.p * ch.op * c.p.adjoint();
    Mat dc = c.p * dch * c.p.adjoint() / scale;

    SdpProblem p;
    int lam = p.add_var(-1.0);  // minimize lambda
    HermVar mvar = add_hermitian_var(p, r, Mat());
    int top = p.add_block(dr);
    int blk = p.add_block(2 * r);

    // lambda I_R - Tr_B[P^dag M' P] >= 0
    place_mapped_herm_var(p, top, mvar, [&](const Mat& basis) {
        return Mat(-partial_trace(Mat(c.p.adjoint() * basis * c.p), dr, db, Subsystem::first));
    });
    for (int i = 0; i < dr; ++i) p.add_entry(top, lam, i, i, 1.0);

    Mat f0 = Mat::Zero(2 * r, 2 * r);
    f0.block(0, r, r, r) = dc;
    f0.block(r, 0, r, r) = dc.adjoint();
    f0.block(r, r, r, r) = gc;
    p.set_constant(blk, f0);
    place_herm_var(p, blk, mvar, 0, 0);

    SdpSolution s = run_or_throw(p, tol);
    return ExtReal(-s.dual_value * scale * scale);
}

namespace {

// Shared scaffold for the two channel-fidelity programs.
struct FidelityProgram {
    SdpProblem p;
    int lam = -1;
};

}  // namespace

double root_fidelity_channel_sdp(const Choi& cn, const Choi& cm, double tol) {
    if (cn.dim_in != cm.dim_in || cn.dim_out != cm.dim_out)
        throw DimMismatchError("root_fidelity_channel_sdp: dimension mismatch");
    const int dr = cn.dim_in, db = cn.dim_out;
    const int n = dr * db;
    // Equal channels have root fidelity exactly 1; skip the solve, whose 1e-11
    // feasibility slack would otherwise leak into the limit estimators.
    if ((cn.op - cm.op).norm() <= 1e-13 * (1.0 + cn.op.norm())) return 1.0;
    auto needs_smoothing = [&](const Mat& g) {
        EigDecomp ed = eig_hermitian(g);
        return ed.eigenvalues.minCoeff() <
               1e-9 * std::max(1.0, ed.eigenvalues.maxCoeff());
    };
    Mat gn = cn.op, gm = cm.op;
    if (needs_smoothing(gn)) gn = smooth_choi(cn, 1e-9).op;
    if (needs_smoothing(gm)) gm = smooth_choi(cm, 1e-9).op;

    SdpProblem p;
    int lam = p.add_var(1.0);  // maximize lambda
    // Q general complex n x n
    std::vector<int> qre(n * n), qim(n * n);
    for (int i = 0; i < n * n; ++i) {
        qre[i] = p.add_var(0.0);
        qim[i] = p.add_var(0.0);
    }
    int top = p.add_block(dr);  // Re Tr_B[Q] - lambda I >= 0
    int big = p.add_block(2 * n);

    // top block: (Re K)_{ij} with K = Tr_B[Q];
    // K_{ij} = sum_b Q[(i,b),(j,b)], Re K = (K + K^dag)/2.
    for (int i = 0; i < dr; ++i) {
        for (int b = 0; b < db; ++b) {
            int row = i * db + b;
            // diagonal: Re K_ii += Re Q[row,row]
            p.add_entry(top, qre[row * n + row], i, i, 1.0);
        }
        for (int j = i + 1; j < dr; ++j)
            for (int b = 0; b < db; ++b) {
                int rij = (i * db + b) * n + (j * db + b);
                int rji = (j * db + b) * n + (i * db + b);
                p.add_entry(top, qre[rij], i, j, 0.5);
                p.add_entry(top, qim[rij], i, j, cd(0, 0.5));
                p.add_entry(top, qre[rji], i, j, 0.5);
                p.add_entry(top, qim[rji], i, j, cd(0, -0.5));
            }
    }
    for (int i = 0; i < dr; ++i) p.add_entry(top, lam, i, i, -1.0);

    Mat f0 = Mat::Zero(2 * n, 2 * n);
    f0.topLeftCorner(n, n) = gn;
    f0.bottomRightCorner(n, n) = gm;
    p.set_constant(big, f0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            // Q at lower-left (n+i, j); Hermitian mirror gives Q^dag above.
            p.add_entry(big, qre[i * n + j], n + i, j, 1.0);
            p.add_entry(big, qim[i * n + j], n + i, j, cd(0, 1));
        }

    SdpSolution s = run_or_throw(p, tol);
    return std::clamp(s.dual_value, 0.0, 1.0);
}

double geo_fidelity_channel_sdp(const Choi& cn, const Choi& cm, double tol) {
    if (cn.dim_in != cm.dim_in || cn.dim_out != cm.dim_out)
        throw DimMismatchError("geo_fidelity_channel_sdp: dimension mismatch");
    const int dr = cn.dim_in, db = cn.dim_out;
    const int n = dr * db;
    if ((cn.op - cm.op).norm() <= 1e-13 * (1.0 + cn.op.norm())) return 1.0;
    auto min_rel_eig = [&](const Mat& g) {
        EigDecomp ed = eig_hermitian(g);
        return ed.eigenvalues.minCoeff() / std::max(1.0, ed.eigenvalues.maxCoeff());
    };
    Mat gm = cm.op;
    if (min_rel_eig(gm) < 1e-9) gm = smooth_choi(cm, 1e-9).op;
    Mat gn = cn.op;

    // X is Hermitian PSD supported on supp(Gamma^N); compress that factor.
    Compression c = compress_support(gn);
    const int r = c.rank;
    Mat gnc = c.p * gn * c.p.adjoint();

    SdpProblem p;
    int mu = p.add_var(1.0);
    HermVar xvar = add_hermitian_var(p, r, Mat());
    int pos = p.add_block(r);       // X' >= 0
    int top = p.add_block(dr);      // Tr_B[P^dag X' P] - mu I >= 0
    int big = p.add_block(r + n);   // [[Gamma^N', X'P],[P^dag X', Gamma^M]]

    place_herm_var(p, pos, xvar, 0, 0);

    // Tr_B[P^dag X' P] - mu I >= 0
    place_mapped_herm_var(p, top, xvar, [&](const Mat& basis) {
        return partial_trace(Mat(c.p.adjoint() * basis * c.p), dr, db, Subsystem::first);
    });
    for (int i = 0; i < dr; ++i) p.add_entry(top, mu, i, i, -1.0);

    Mat f0 = Mat::Zero(r + n, r + n);
    f0.topLeftCorner(r, r) = gnc;
    f0.bottomRightCorner(n, n) = gm;
    p.set_constant(big, f0);
    // X' P at block position (0, r); add_entry mirrors P^dag X' below.
    const int nvars = r * r;
    for (int k = 0; k < nvars; ++k) {
        int var = xvar.base + k;
        Mat xp = herm_basis(xvar, var) * c.p;  // r x n
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < n; ++j) {
                if (std::abs(xp(i, j)) < 1e-15) continue;
                p.add_entry(big, var, i, r + j, xp(i, j));
            }
    }

    SdpSolution s = run_or_throw(p, tol);
    return std::clamp(s.dual_value, 0.0, 1.0);
}

double schur_trace_sdp(const Mat& x, const Mat& y, double tol) {
    require_square(y, "schur_trace_sdp");
    const int d = static_cast<int>(y.rows());
    SdpProblem p;
    HermVar mvar = add_hermitian_var(p, d, Mat(-Mat::Identity(d, d)));
    int blk = p.add_block(2 * d);
    Mat f0 = Mat::Zero(2 * d, 2 * d);
    f0.block(0, d, d, d) = x.adjoint();
    f0.block(d, 0, d, d) = x;
    f0.block(d, d, d, d) = y;
    p.set_constant(blk, f0);
    place_herm_var(p, blk, mvar, 0, 0);
    SdpSolution s = run_or_throw(p, tol);
    return -s.dual_value;
}

// --- seesaw -----------------------------------------------------------------

SeesawResult sld_channel_seesaw(const ChannelFamily& fam, double theta, int iters,
                                double rel_stop) {
    Choi ch = fam.at(theta);
    Mat gamma = ch.op;
    Mat dgamma = fam.deriv_at(theta);
    const int dr = ch.dim_in, db = ch.dim_out;
    const int n = dr * db;

    SeesawResult res;
    FinitenessReport rep = finiteness_report(gamma, dgamma, FisherKind::sld);
    if (!rep.finite) {
        res.lower_bound = ExtReal::infinity();
        return res;
    }

    Vec g = vec_gamma(dgamma);
    Mat sigma = Mat::Identity(dr, dr) / dr;
    double prev = -1.0;
    const double reg = 1e-11;

    // On the orthocomplement of its structural kernel ker(Gamma) (x)
    // conj(ker(Gamma)), H = Gamma (x) M^T + M (x) Gamma^T obeys
    // H >= lambda_min_+(Gamma) I because M = sigma^{-1} (x) I >= I for any
    // state sigma. That bound separates true kernel noise from informative
    // eigenvalues no matter how concentrated sigma becomes.
    double gmin_pos = std::numeric_limits<double>::infinity();
    {
        EigDecomp ed = eig_hermitian(gamma);
        double cut = default_rank_tol(ed.eigenvalues.maxCoeff(), n);
        for (int i = 0; i < ed.eigenvalues.size(); ++i)
            if (ed.eigenvalues(i) > cut) gmin_pos = std::min(gmin_pos, ed.eigenvalues(i));
    }
    const double h_cut = 0.25 * gmin_pos;

    for (int itn = 0; itn < iters; ++itn) {
        Mat sig_reg = ((1.0 - dr * reg) * sigma + reg * Mat::Identity(dr, dr));
        Mat m = kron(pinv_psd(sig_reg), Mat::Identity(db, db));
        Mat h = kron(gamma, m.conjugate()) + kron(m, gamma.conjugate());
        Mat hp = pinv_psd(0.5 * (h + h.adjoint()), h_cut);
        Vec phi = hp * g;
        double value = 2.0 * (g.adjoint() * phi).real()(0);
        res.trace.push_back(value);
        res.iterations = itn + 1;

        if (prev >= 0 && std::abs(value - prev) <= rel_stop * (1.0 + std::abs(value))) {
            res.converged = true;
            break;
        }
        prev = value;

        // (Y, sigma) block update: K_R from W = phi phi^dag, then
        // sigma <- K^{1/2} / Tr[K^{1/2}], which attains min Tr[sigma^{-1} K].
        Mat w = phi * phi.adjoint();
        std::vector<int> dims = {dr, db, dr, db};
        Mat wswap = permute_systems(w, dims, {2, 3, 0, 1});
        Mat ext_gamma = kron(Mat::Identity(n, n), gamma);
        Mat ext_gamma_t = kron(Mat::Identity(n, n), gamma.transpose());
        Mat term1 = partial_trace_systems(Mat(ext_gamma * wswap), dims,
                                          {true, false, false, false})
                        .transpose();
        Mat term2 =
            partial_trace_systems(Mat(ext_gamma_t * w), dims, {true, false, false, false});
        Mat k = 0.5 * (term1 + term2 + (term1 + term2).adjoint());
        Mat khalf = sqrt_psd(k);
        double tr = khalf.trace().real();
        if (tr <= 1e-300) break;  // constant family
        sigma = khalf / tr;
    }
    double best = res.trace.empty() ? 0.0 : *std::max_element(res.trace.begin(), res.trace.end());
    res.lower_bound = ExtReal(best);
    return res;
}

}  // namespace qdb::sdp
