#ifndef QDB_FISHER_HPP
#define QDB_FISHER_HPP

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qdb/channels.hpp"
#include "qdb/extreal.hpp"
#include "qdb/linalg.hpp"

// Closed-form SLD/RLD Fisher information for states and channels,
// pure-state specialization, classical-quantum decompositions, finiteness
// diagnostics, and the fidelity / geometric-Renyi limit estimators.

namespace qdb {

enum class FisherKind { sld, rld };

struct FinitenessReport {
    std::string condition;  // human-readable name of the checked condition
    double residual = 0.0;
    double tol = 0.0;
    bool finite = true;
};

enum class FisherMethod { spectral, basis_independent, sdp_route, limit, seesaw };

struct FisherResult {
    ExtReal value;
    FinitenessReport finiteness;
    FisherMethod method = FisherMethod::spectral;
};

// SLD kind: residual = ||Pi_perp deriv Pi_perp||_F;
// RLD kind: residual = ||Pi_perp deriv||_F. Finite iff residual <= tol.
FinitenessReport finiteness_report(const Mat& op, const Mat& deriv, FisherKind kind,
                                   double tol = -1.0);

// 2 sum_{l_j + l_k > 0} |<j|drho|k>|^2 / (l_j + l_k), cross-checked against
// the kernel-cross-term form; +inf when the finiteness condition fails.
FisherResult sld_state(const Mat& rho, const Mat& drho);

// Tr[(drho)^2 rho^{-1}] on the support; +inf when supp(drho) leaves supp(rho).
FisherResult rld_state(const Mat& rho, const Mat& drho);

// 4 [ <dphi|dphi> - |<dphi|phi>|^2 ] for pure-state families.
double sld_pure(const Vec& phi, const Vec& dphi);

// || Tr_B[(dGamma) Gamma^{-1} (dGamma)] ||_inf with the RLD support condition.
FisherResult rld_channel(const ChannelFamily& fam, double theta);

// sup_x over letters of sld_state (amortization collapse for cq channels).
FisherResult sld_cq_channel(const CqFamily& f, double theta);

// I_F(p) + sum_x p(x) I_F(rho^x) evaluated at theta; cond holds (rho, drho)
// pairs per letter.
double cq_state_fisher(const RVec& p, const RVec& dp,
                       const std::vector<std::pair<Mat, Mat>>& cond, FisherKind kind);

enum class LimitRoute { fidelity, geometric, bs };

struct LimitOptions {
    double delta = 1e-3;
    double eps = 1e-6;
    bool central = false;   // central shift theta -/+ delta/2
    double alpha = 2.0;     // geometric route only
};

struct LimitEstimate {
    double value = 0.0;       // estimate at delta
    double value_half = 0.0;  // estimate at delta/2
    double richardson = 0.0;  // 2*value_half - value
    double delta = 0.0;
    double eps = 0.0;
};

// fidelity route -> (8/delta^2)(1 - sqrt F) estimates the SLD value;
// geometric route -> (2/(alpha(alpha-1)delta^2))(Q_hat_alpha - 1) and
// bs route -> (2/delta^2) D_hat estimate the RLD value. Smoothing is applied
// before shifting.
LimitEstimate state_fisher_limits(const std::function<Mat(double)>& family, double theta,
                                  LimitRoute route, const LimitOptions& opt = {});

// (8/delta^2)(1 - sqrt F(N_theta, N_theta+delta)) through the root channel
// fidelity program.
LimitEstimate sld_channel_limit(const ChannelFamily& fam, double theta, double delta = 1e-3,
                                bool central = false);

}  // namespace qdb

#endif
