#ifndef QDB_DIVERGENCES_HPP
#define QDB_DIVERGENCES_HPP

#include <optional>

#include "qdb/channels.hpp"
#include "qdb/extreal.hpp"
#include "qdb/linalg.hpp"

// Geometric Renyi relative entropy of states and channels in all support
// cases, Belavkin-Staszewski, max-relative, Petz, sandwiched and Umegaki
// relative entropies, and the fidelities. Natural logarithm throughout.

namespace qdb {

struct BadAlphaError : std::invalid_argument {
    explicit BadAlphaError(const std::string& what) : std::invalid_argument(what) {}
};

enum class SupportCase { contained, tilde_reduced, infinite };

struct DivergenceValue {
    ExtReal value;
    double alpha = 0.0;
    SupportCase support_case = SupportCase::contained;
    double eps_used = 0.0;  // nonzero when the eps-limit path was taken
};

// Relative quasi-entropy Q_hat_alpha(rho||sigma); exposed because the limit
// estimators and the Chernoff optimizers consume Q rather than D.
DivergenceValue geometric_renyi_q(const Mat& rho, const Mat& sigma, double alpha);
DivergenceValue geometric_renyi(const Mat& rho, const Mat& sigma, double alpha);

// Channel quantity on the data-processing interval (0,1) u (1,2].
DivergenceValue geometric_renyi_channel_q(const Choi& cn, const Choi& cm, double alpha);
DivergenceValue geometric_renyi_channel(const Choi& cn, const Choi& cm, double alpha);

ExtReal bs_relative_entropy(const Mat& rho, const Mat& sigma);
ExtReal bs_channel(const Choi& cn, const Choi& cm);

ExtReal petz_renyi(const Mat& rho, const Mat& sigma, double alpha);
ExtReal sandwiched_renyi(const Mat& rho, const Mat& sigma, double alpha);
ExtReal relative_entropy(const Mat& rho, const Mat& sigma);
ExtReal dmax(const Mat& rho, const Mat& sigma);

double geometric_fidelity(const Mat& rho, const Mat& sigma);
double fidelity(const Mat& rho, const Mat& sigma);
double root_fidelity(const Mat& rho, const Mat& sigma);

}  // namespace qdb

#endif
