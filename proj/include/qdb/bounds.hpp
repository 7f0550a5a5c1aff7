#ifndef QDB_BOUNDS_HPP
#define QDB_BOUNDS_HPP

#include <string>
#include <vector>

#include "qdb/channels.hpp"
#include "qdb/divergences.hpp"
#include "qdb/extreal.hpp"
#include "qdb/fisher.hpp"

// Estimation and discrimination bound evaluators: Cramer-Rao variance lower
// bounds, the Heisenberg-attainability verdict, the generalized amplitude
// damping closed forms, Chernoff and Hoeffding exponent bounds, and figure
// data generation.

namespace qdb {

enum class Scaling { standard, heisenberg };

// 1/(n I) or 1/(n^2 I); infinite Fisher information gives the vacuous 0.
ExtReal cramer_rao(const ExtReal& fisher, long n, Scaling scaling);

struct HeisenbergVerdict {
    bool blocked = false;  // Heisenberg scaling unattainable
    double finiteness_residual = 0.0;
    ExtReal rld_value;
};
HeisenbergVerdict heisenberg_verdict(const ChannelFamily& fam, double theta);

double gadc_closed_form(GadcParam which, double gamma, double N);

// Achievable exponent: sup over pure bipartite inputs and alpha of
// (1-alpha) D_alpha(N(psi)||M(psi)), via a coarse grid plus Nelder-Mead.
double chernoff_lower(const Choi& cn, const Choi& cm);

// sup_{alpha in (0,1)} (1-alpha) D_hat_alpha(N||M).
double geometric_chernoff_upper(const Choi& cn, const Choi& cm);

// D_hat_{1/2}(N||M) - ln[p(1-p)]/n.
double chernoff_nonasymptotic_upper(const Choi& cn, const Choi& cm, long n, double p);

struct HoeffdingBound {
    ExtReal value;
    bool clamped = false;  // negative optimum reported as 0
    std::string note;
};
// sup_{alpha in (0,1)} ((alpha-1)/alpha) (r - D_hat_alpha(N||M)); +inf when
// r < inf_alpha D_hat_alpha makes the expression unbounded.
HoeffdingBound hoeffding_upper(const Choi& cn, const Choi& cm, double r);

enum class FigureKind { estimate_loss, estimate_noise, estimate_phase, ch_disc };

struct FigureConfig {
    FigureKind kind = FigureKind::estimate_noise;
    double gamma = 0.5;  // fixed loss (estimate-noise / estimate-phase)
    double noise = 0.2;  // fixed noise (estimate-loss / estimate-phase)
    double phi = 0.1;    // evaluation point for the phase family
    double grid_lo = 0.1, grid_hi = 0.9, grid_step = 0.1;
    // ch-disc: the fixed pair; sweep the other pair over the grid
    bool fix_loss = true;
    double gamma1 = 0.8, gamma2 = 0.7;
    double noise1 = 0.2, noise2 = 0.2;
    long n_uses = 1;
    double delta = 1e-2;  // shift for the SLD limit estimator
};

struct FigureData {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

FigureData figure_data(const FigureConfig& cfg);
std::string to_csv(const FigureData& data);

}  // namespace qdb

#endif
