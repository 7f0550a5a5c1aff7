#ifndef QDB_SDP_HPP
#define QDB_SDP_HPP

#include <optional>
#include <string>
#include <vector>

#include "qdb/channels.hpp"
#include "qdb/extreal.hpp"
#include "qdb/linalg.hpp"

// A dense primal-dual interior-point solver for block semi-definite programs
// in the standard conic form
//
//   sup { b.y : F0 + sum_i y_i F_i >= 0 }      (block LMI)
//   inf { <F0, X> : <F_i, X> = -b_i, X >= 0 }
//
// with complex Hermitian blocks embedded as real symmetric blocks of doubled
// dimension, plus the builders for the programs used across the library.

namespace qdb::sdp {

enum class Cone { psd, nonneg };
enum class SolveStatus { optimal, max_iterations, infeasible };

struct SdpError : std::runtime_error {
    explicit SdpError(const std::string& what) : std::runtime_error(what) {}
};

struct Entry {
    int var;  // -1 marks the constant term F0
    int row, col;
    cd value;  // stored once; the (col,row) conjugate is implied
};

struct Block {
    int dim = 0;
    Cone cone = Cone::psd;
    bool real_only = false;  // skip the complex->real embedding
    std::vector<Entry> entries;
};

struct SdpProblem {
    std::vector<Block> blocks;
    RVec objective;  // b, maximized
    int num_vars = 0;

    int add_var(double obj_coeff = 0.0);
    int add_block(int dim, Cone cone = Cone::psd, bool real_only = false);
    // Adds v at (row,col) and conj(v) at (col,row) of the coefficient matrix
    // of `var` (or of F0 when var = -1). Diagonal entries must be real.
    void add_entry(int block, int var, int row, int col, cd v);
    void set_constant(int block, const Mat& f0);

    // Hermitian-valued affine map y -> sum_i y_i F_i and its adjoint,
    // exposed for the adjoint-consistency invariant.
    std::vector<Mat> apply_map(const RVec& y) const;
    RVec apply_adjoint(const std::vector<Mat>& z) const;
    std::vector<Mat> assemble(const RVec& y) const;  // F0 + sum y_i F_i
};

// Helper for Hermitian matrix variables: d*d real parameters.
struct HermVar {
    int base = 0;
    int dim = 0;
    // Variable index and coefficient layout: diagonal (i,i) -> one var;
    // off-diagonal (i<j) -> re var then im var.
    int diag(int i) const;
    int re(int i, int j) const;
    int im(int i, int j) const;
    Mat extract(const RVec& y) const;
};
HermVar add_hermitian_var(SdpProblem& p, int dim, const Mat& obj_weight = Mat());
// Places +coeff * M_var at (row_off+i, col_off+j) inside `block`, where M_var
// is the Hermitian matrix variable.
void place_herm_var(SdpProblem& p, int block, const HermVar& v, int row_off, int col_off,
                    cd coeff = 1.0, bool adjoint = false);

struct SdpSolution {
    double primal_value = 0.0;  // conic primal at the final iterate
    double dual_value = 0.0;    // b.y
    double gap = 0.0;           // |primal - dual| / (1 + |primal|)
    SolveStatus status = SolveStatus::max_iterations;
    RVec y;
    std::vector<RMat> X;  // embedded primal blocks
    int iterations = 0;
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 200;
    bool throw_on_failure = false;
};

SdpSolution solve(const SdpProblem& p, const SolveOptions& opt = {});

// --- program builders ---------------------------------------------------

// Solver diagnostics surfaced by the builders (duality gap at the optimum).
struct BuilderDiag {
    double gap = 0.0;
    SolveStatus status = SolveStatus::optimal;
    int iterations = 0;
};

// I_F = 2 inf { mu : [[mu, <Gamma|(drho (x) I)], [(drho (x) I)|Gamma>, rho (x) I + I (x) rho^T]] >= 0 }
ExtReal sld_state_sdp(const Mat& rho, const Mat& drho, double tol = 1e-8,
                      BuilderDiag* diag = nullptr);

// I_F_hat = inf { Tr M : [[M, drho], [drho, rho]] >= 0 }
ExtReal rld_state_sdp(const Mat& rho, const Mat& drho, double tol = 1e-8,
                      BuilderDiag* diag = nullptr);

// inf { lambda : lambda I_R >= Tr_B[M], [[M, dGamma], [dGamma, Gamma]] >= 0 }
ExtReal rld_channel_sdp(const ChannelFamily& fam, double theta, double tol = 1e-8);

// sup { lambda : lambda I_R <= Re Tr_B[Q], [[Gamma^N, Q^dag], [Q, Gamma^M]] >= 0 }
double root_fidelity_channel_sdp(const Choi& cn, const Choi& cm, double tol = 1e-10);

// sup { mu : mu I_R <= Tr_B[X], X >= 0, [[Gamma^N, X], [X, Gamma^M]] >= 0 };
// returns sqrt(F_hat).
double geo_fidelity_channel_sdp(const Choi& cn, const Choi& cm, double tol = 1e-9);

// Test oracle: min Tr[M] s.t. [[M, X^dag], [X, Y]] >= 0 equals Tr[X^dag Y^-1 X].
double schur_trace_sdp(const Mat& x, const Mat& y, double tol = 1e-9);

// --- bilinear seesaw for the SLD Fisher information of channels ---------

struct SeesawResult {
    ExtReal lower_bound;
    std::vector<double> trace;  // value after each input-state update
    int iterations = 0;
    bool converged = false;
};

// Alternates between the (lambda, phi, W) block and the (Y, sigma) block of
// the jointly constrained bilinear program; each block subproblem is solved
// exactly in closed form through the Schur-complement characterization.
// Returns a monotone nondecreasing sequence of lower bounds on I_F.
SeesawResult sld_channel_seesaw(const ChannelFamily& fam, double theta, int iters = 60,
                                double rel_stop = 1e-6);

}  // namespace qdb::sdp

#endif
