#include "qdb/linalg.hpp"

#include <cmath>

namespace qdb {

Tolerances& tolerances() {
    static Tolerances t;
    return t;
}

bool is_hermitian(const Mat& h, double rel_tol) {
    if (h.rows() != h.cols()) return false;
    double scale = 1.0 + h.cwiseAbs().maxCoeff();
    return (h - h.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

void require_hermitian(const Mat& h, const char* who) {
    if (!is_hermitian(h))
        throw NonHermitianError(std::string(who) + ": operator is not Hermitian");
}

void require_square(const Mat& h, const char* who) {
    if (h.rows() != h.cols())
        throw DimMismatchError(std::string(who) + ": operator is not square");
}

double default_rank_tol(double lambda_max, int dim) {
    return dim * tolerances().rank_rel * std::max(lambda_max, 0.0);
}

EigDecomp eig_hermitian(const Mat& h) {
    require_square(h, "eig_hermitian");
    require_hermitian(h, "eig_hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
    if (es.info() != Eigen::Success)
        throw NoConvergenceError("eig_hermitian: eigensolver failed to converge");
    return EigDecomp{es.eigenvalues(), es.eigenvectors()};
}

SupportSplit support_split(const Mat& h, double rank_tol) {
    EigDecomp ed = eig_hermitian(h);
    const int d = static_cast<int>(h.rows());
    const double lmax = ed.eigenvalues.size() ? ed.eigenvalues.maxCoeff() : 0.0;
    if (rank_tol < 0) rank_tol = default_rank_tol(lmax, d);
    const double floor = std::max(rank_tol, d * 1e-15 * std::max(lmax, 1.0));
    if (ed.eigenvalues.minCoeff() < -10.0 * std::max(floor, 1e-300))
        throw NotPsdError("support_split: operator has a negative eigenvalue beyond tolerance");
    SupportSplit s;
    s.proj_support = Mat::Zero(d, d);
    s.proj_kernel = Mat::Zero(d, d);
    for (int j = 0; j < d; ++j) {
        Mat p = ed.eigenvectors.col(j) * ed.eigenvectors.col(j).adjoint();
        if (ed.eigenvalues(j) > floor) {
            s.proj_support += p;
            ++s.rank;
        } else {
            s.proj_kernel += p;
        }
    }
    return s;
}

Mat apply_on_support(const Mat& h, const std::function<double(double)>& f, double rank_tol) {
    EigDecomp ed = eig_hermitian(h);
    const int d = static_cast<int>(h.rows());
    const double lmax = ed.eigenvalues.size() ? ed.eigenvalues.maxCoeff() : 0.0;
    if (rank_tol < 0) rank_tol = default_rank_tol(lmax, d);
    const double floor = std::max(rank_tol, d * 1e-15 * std::max(lmax, 1.0));
    if (ed.eigenvalues.minCoeff() < -10.0 * std::max(floor, 1e-300))
        throw NotPsdError("apply_on_support: operator has a negative eigenvalue beyond tolerance");
    RVec vals = RVec::Zero(d);
    for (int j = 0; j < d; ++j)
        if (ed.eigenvalues(j) > floor) vals(j) = f(ed.eigenvalues(j));
    return ed.eigenvectors * vals.asDiagonal() * ed.eigenvectors.adjoint();
}

Mat pinv_psd(const Mat& h, double rank_tol) {
    return apply_on_support(h, [](double x) { return 1.0 / x; }, rank_tol);
}
Mat sqrt_psd(const Mat& h, double rank_tol) {
    return apply_on_support(h, [](double x) { return std::sqrt(x); }, rank_tol);
}
Mat inv_sqrt_psd(const Mat& h, double rank_tol) {
    return apply_on_support(h, [](double x) { return 1.0 / std::sqrt(x); }, rank_tol);
}
Mat pow_psd(const Mat& h, double p, double rank_tol) {
    return apply_on_support(h, [p](double x) { return std::pow(x, p); }, rank_tol);
}
Mat log_on_support(const Mat& h, double rank_tol) {
    return apply_on_support(h, [](double x) { return std::log(x); }, rank_tol);
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Mat partial_trace(const Mat& m, int dA, int dB, Subsystem keep) {
    if (m.rows() != m.cols() || m.rows() != static_cast<long>(dA) * dB)
        throw DimMismatchError("partial_trace: dimensions do not factor the operator");
    if (keep == Subsystem::first) {
        Mat out = Mat::Zero(dA, dA);
        for (int i = 0; i < dA; ++i)
            for (int j = 0; j < dA; ++j)
                for (int b = 0; b < dB; ++b) out(i, j) += m(i * dB + b, j * dB + b);
        return out;
    }
    Mat out = Mat::Zero(dB, dB);
    for (int i = 0; i < dB; ++i)
        for (int j = 0; j < dB; ++j)
            for (int a = 0; a < dA; ++a) out(i, j) += m(a * dB + i, a * dB + j);
    return out;
}

namespace {
// Row index -> multi-index for mixed-radix dims, most significant factor first.
void unrank(long idx, const std::vector<int>& dims, std::vector<int>& out) {
    for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
        out[k] = static_cast<int>(idx % dims[k]);
        idx /= dims[k];
    }
}
long rank_of(const std::vector<int>& mi, const std::vector<int>& dims) {
    long idx = 0;
    for (size_t k = 0; k < dims.size(); ++k) idx = idx * dims[k] + mi[k];
    return idx;
}
}  // namespace

Mat permute_systems(const Mat& m, const std::vector<int>& dims, const std::vector<int>& perm) {
    long total = 1;
    for (int d : dims) total *= d;
    if (m.rows() != total || m.cols() != total)
        throw DimMismatchError("permute_systems: dims do not match operator");
    std::vector<int> ndims(dims.size());
    for (size_t k = 0; k < perm.size(); ++k) ndims[k] = dims[perm[k]];
    Mat out(total, total);
    std::vector<int> mi(dims.size()), mj(dims.size()), pi(dims.size()), pj(dims.size());
    for (long i = 0; i < total; ++i) {
        unrank(i, ndims, pi);
        for (size_t k = 0; k < perm.size(); ++k) mi[perm[k]] = pi[k];
        long oi = rank_of(mi, dims);
        for (long j = 0; j < total; ++j) {
            unrank(j, ndims, pj);
            for (size_t k = 0; k < perm.size(); ++k) mj[perm[k]] = pj[k];
            out(i, j) = m(oi, rank_of(mj, dims));
        }
    }
    return out;
}

Mat partial_trace_systems(const Mat& m, const std::vector<int>& dims, const std::vector<bool>& keep) {
    // Move kept factors to the front, then trace the tail as one block.
    std::vector<int> perm;
    int dkeep = 1, dtrace = 1;
    for (size_t k = 0; k < dims.size(); ++k)
        if (keep[k]) {
            perm.push_back(static_cast<int>(k));
            dkeep *= dims[k];
        }
    for (size_t k = 0; k < dims.size(); ++k)
        if (!keep[k]) {
            perm.push_back(static_cast<int>(k));
            dtrace *= dims[k];
        }
    Mat moved = permute_systems(m, dims, perm);
    return partial_trace(moved, dkeep, dtrace, Subsystem::first);
}

Vec gamma_vec(int d) {
    Vec v = Vec::Zero(static_cast<long>(d) * d);
    for (int i = 0; i < d; ++i) v(i * d + i) = 1.0;
    return v;
}

Vec vec_gamma(const Mat& m) {
    require_square(m, "vec_gamma");
    const int d = static_cast<int>(m.rows());
    Vec v(static_cast<long>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) v(i * d + j) = m(i, j);
    return v;
}

Mat unvec_gamma(const Vec& v, int d) {
    if (v.size() != static_cast<long>(d) * d)
        throw DimMismatchError("unvec_gamma: length is not d^2");
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = v(i * d + j);
    return m;
}

Mat geometric_mean(const Mat& x, const Mat& y, double alpha, double eps) {
    require_square(x, "geometric_mean");
    if (x.rows() != y.rows()) throw DimMismatchError("geometric_mean: size mismatch");
    const int d = static_cast<int>(x.rows());
    Mat xe = x + eps * Mat::Identity(d, d);
    Mat xh, xih;
    if (eps > 0) {
        xh = sqrt_psd(xe);
        xih = inv_sqrt_psd(xe);
    } else {
        SupportSplit s = support_split(x);
        if (alpha > 1.0 && s.rank < d) {
            double leak = (s.proj_kernel * y * s.proj_kernel).norm();
            double scale = 1.0 + y.norm();
            if (leak > 1e-10 * scale)
                throw SupportViolationError(
                    "geometric_mean: supp(Y) not contained in supp(X) for alpha > 1");
        }
        xh = sqrt_psd(x);
        xih = inv_sqrt_psd(x);
    }
    Mat mid = xih * y * xih;
    Mat midp = pow_psd(0.5 * (mid + mid.adjoint()), alpha);
    Mat g = xh * midp * xh;
    return 0.5 * (g + g.adjoint());
}

double op_norm(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double op_norm_hermitian(const Mat& h) {
    EigDecomp ed = eig_hermitian(h);
    return std::max(std::abs(ed.eigenvalues.minCoeff()), std::abs(ed.eigenvalues.maxCoeff()));
}

double trace_norm(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues().sum();
}

double min_eig_hermitian(const Mat& h) { return eig_hermitian(h).eigenvalues.minCoeff(); }
double max_eig_hermitian(const Mat& h) { return eig_hermitian(h).eigenvalues.maxCoeff(); }

Mat identity(int d) { return Mat::Identity(d, d); }

}  // namespace qdb
