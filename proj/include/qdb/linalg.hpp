#ifndef QDB_LINALG_HPP
#define QDB_LINALG_HPP

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// Dense complex Hermitian linear algebra: eigendecompositions, support
// projectors, operator functions evaluated on the support, Kronecker and
// partial-trace calculus, vectorization against the unnormalized maximally
// entangled vector, and the weighted operator geometric mean.

namespace qdb {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using cd = std::complex<double>;

struct NonHermitianError : std::runtime_error {
    explicit NonHermitianError(const std::string& what) : std::runtime_error(what) {}
};
struct NotPsdError : std::runtime_error {
    explicit NotPsdError(const std::string& what) : std::runtime_error(what) {}
};
struct DimMismatchError : std::runtime_error {
    explicit DimMismatchError(const std::string& what) : std::runtime_error(what) {}
};
struct SupportViolationError : std::runtime_error {
    explicit SupportViolationError(const std::string& what) : std::runtime_error(what) {}
};
struct NoConvergenceError : std::runtime_error {
    explicit NoConvergenceError(const std::string& what) : std::runtime_error(what) {}
};
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Global tolerance knobs. The CLI maps QDB_TOL_* environment overrides here.
struct Tolerances {
    double rank_rel = 1e-12;       // kernel cut: dim * rank_rel * lambda_max
    double finiteness_rel = 1e-9;  // finiteness residual, relative to deriv scale
    double sdp = 1e-8;             // interior-point duality gap
    double consistency = 1e-6;     // cross-method agreement
};
Tolerances& tolerances();

bool is_hermitian(const Mat& h, double rel_tol = 1e-12);
void require_hermitian(const Mat& h, const char* who);
void require_square(const Mat& h, const char* who);

double default_rank_tol(double lambda_max, int dim);

struct EigDecomp {
    RVec eigenvalues;  // ascending
    Mat eigenvectors;  // columns
};
EigDecomp eig_hermitian(const Mat& h);

struct SupportSplit {
    Mat proj_support;  // projector onto eigenvalues > rank_tol
    Mat proj_kernel;
    int rank = 0;
};
// H must be PSD within -rank_tol; throws NotPsdError if min eigenvalue < -10*rank_tol.
SupportSplit support_split(const Mat& h, double rank_tol = -1.0);

// sum_{lambda_j > tol} f(lambda_j) |psi_j><psi_j|; the kernel always maps to 0.
Mat apply_on_support(const Mat& h, const std::function<double(double)>& f,
                     double rank_tol = -1.0);

Mat pinv_psd(const Mat& h, double rank_tol = -1.0);
Mat sqrt_psd(const Mat& h, double rank_tol = -1.0);
Mat inv_sqrt_psd(const Mat& h, double rank_tol = -1.0);
Mat pow_psd(const Mat& h, double p, double rank_tol = -1.0);
Mat log_on_support(const Mat& h, double rank_tol = -1.0);

Mat kron(const Mat& a, const Mat& b);

enum class Subsystem { first, second };
// M acts on C^{dA} (x) C^{dB}; returns the reduced operator on the kept factor.
Mat partial_trace(const Mat& m, int dA, int dB, Subsystem keep);

// Operator on a tensor product with factor dimensions `dims`; relabels the
// factors so that new factor k is old factor perm[k].
Mat permute_systems(const Mat& m, const std::vector<int>& dims,
                    const std::vector<int>& perm);
// Trace out every factor whose keep flag is false.
Mat partial_trace_systems(const Mat& m, const std::vector<int>& dims,
                          const std::vector<bool>& keep);

// |Gamma> = sum_i |i>|i> and (M (x) I)|Gamma>, which is the row-major
// flattening of M. Satisfies (I (x) M)|Gamma> = (M^T (x) I)|Gamma>.
Vec gamma_vec(int d);
Vec vec_gamma(const Mat& m);
Mat unvec_gamma(const Vec& v, int d);

// X^{1/2} ((X_eps)^{-1/2} Y (X_eps)^{-1/2})^alpha X^{1/2} with X_eps = X + eps I.
// At eps = 0 the inverse square root is taken on the support of X; for
// alpha > 1 this requires supp(Y) within supp(X).
Mat geometric_mean(const Mat& x, const Mat& y, double alpha, double eps = 0.0);

double op_norm(const Mat& m);               // spectral norm
double op_norm_hermitian(const Mat& h);     // max |eigenvalue|
double trace_norm(const Mat& m);
double min_eig_hermitian(const Mat& h);
double max_eig_hermitian(const Mat& h);

inline double fro(const Mat& m) { return m.norm(); }
inline double fro_dist(const Mat& a, const Mat& b) { return (a - b).norm(); }

Mat identity(int d);

}  // namespace qdb

#endif
