#ifndef QDB_CHANNELS_HPP
#define QDB_CHANNELS_HPP

#include <functional>
#include <limits>
#include <vector>

#include "qdb/linalg.hpp"

// Quantum channels and one-parameter channel families: Kraus <-> Choi
// conversion, channel application through the post-selected teleportation
// identity, the generalized amplitude damping families, classical-quantum
// families, and smoothing toward the maximally mixed state.

namespace qdb {

struct NotTracePreservingError : std::runtime_error {
    explicit NotTracePreservingError(const std::string& what) : std::runtime_error(what) {}
};
struct ParamOutOfRangeError : std::runtime_error {
    explicit ParamOutOfRangeError(const std::string& what) : std::runtime_error(what) {}
};

// Choi operator Gamma_RB = (id (x) N)(|Gamma><Gamma|): PSD with Tr_B = I_R.
struct Choi {
    Mat op;
    int dim_in = 0;   // R
    int dim_out = 0;  // B

    Choi() = default;
    Choi(Mat o, int din, int dout) : op(std::move(o)), dim_in(din), dim_out(dout) {}
    void validate(double tp_tol = 1e-9) const;
};

Choi choi_from_kraus(const std::vector<Mat>& kraus);

// N(rho_RA) = <Gamma|_AS rho_RA (x) Gamma_SB |Gamma>_AS, contracted directly.
// `op` may be any operator on R(x)B in place of the Choi operator, which is
// how derivative operators are pushed through the same identity.
Mat apply_choi_op(const Mat& op, int dA, int dB, const Mat& rho_ra, int dR);
Mat apply_channel(const Choi& c, const Mat& rho_ra, int dR);

struct ChannelFamily {
    enum class Mode { analytic, finite_difference };

    std::function<Choi(double)> eval;
    std::function<Mat(double)> deriv_fn;  // set for analytic mode
    Mode mode = Mode::analytic;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    double fd_step = 1e-5;
    int dim_in = 0;
    int dim_out = 0;

    Choi at(double theta) const;
    // Central difference for finite-difference mode, with the stencil clamped
    // to stay inside (lo, hi).
    Mat deriv_at(double theta) const;
    void check_theta(double theta) const;
};

ChannelFamily finite_difference_family(std::function<Choi(double)> eval, int dim_in,
                                       int dim_out, double lo, double hi, double h = 1e-5);

enum class GadcParam { loss, noise, phase };

Mat gadc_choi(double gamma, double N);
Mat gadc_phase_choi(double phi, double gamma, double N);
std::vector<Mat> gadc_kraus(double gamma, double N);

ChannelFamily gadc_loss_family(double N);                      // theta = gamma
ChannelFamily gadc_noise_family(double gamma);                 // theta = N
ChannelFamily gadc_phase_family(double gamma, double N);       // theta = phi
ChannelFamily gadc_family(GadcParam which, double gamma, double N);

// Unitary phase rotation exp(-i theta sigma_Z) as a channel family.
ChannelFamily phase_unitary_family();

struct CqLetter {
    std::function<Mat(double)> state;
    std::function<Mat(double)> deriv;
};
struct CqFamily {
    std::vector<CqLetter> letters;
    int dim_out = 0;
};

// Choi(theta) = sum_x |x><x| (x) omega^{x,theta}.
ChannelFamily cq_channel(const CqFamily& f);

Mat smooth(const Mat& rho, double eps);
Choi smooth_choi(const Choi& c, double eps);

Mat sigma_x();
Mat sigma_y();
Mat sigma_z();

}  // namespace qdb

#endif
