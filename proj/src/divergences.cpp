#include "qdb/divergences.hpp"

#include <cmath>

namespace qdb {

namespace {

constexpr double kIllConditioned = 1e10;

struct SupportInfo {
    SupportSplit split;
    double cond = 1.0;  // condition number restricted to the support
};

SupportInfo analyze(const Mat& psd) {
    SupportInfo info;
    info.split = support_split(psd);
    EigDecomp ed = eig_hermitian(psd);
    const int d = static_cast<int>(psd.rows());
    double cut = default_rank_tol(ed.eigenvalues.maxCoeff(), d);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < d; ++i)
        if (ed.eigenvalues(i) > cut) {
            lo = std::min(lo, ed.eigenvalues(i));
            hi = std::max(hi, ed.eigenvalues(i));
        }
    info.cond = (hi > 0 && std::isfinite(lo)) ? hi / lo : 1.0;
    return info;
}

bool contained_in(const Mat& a, const SupportSplit& sigma_split) {
    double leak = (sigma_split.proj_kernel * a * sigma_split.proj_kernel).norm();
    return leak <= 1e-10 * (1.0 + a.norm());
}

double q_on_support(const Mat& rho, const Mat& sigma, double alpha) {
    Mat sih = inv_sqrt_psd(sigma);
    Mat mid = sih * rho * sih;
    Mat midp = pow_psd(0.5 * (mid + mid.adjoint()), alpha);
    return (sigma * midp).trace().real();
}

double q_eps_limit(const Mat& rho, const Mat& sigma, double alpha, double* eps_used) {
    const int d = static_cast<int>(sigma.rows());
    double q[3];
    const double eps[3] = {1e-4, 1e-6, 1e-8};
    for (int i = 0; i < 3; ++i) {
        Mat se = sigma + eps[i] * Mat::Identity(d, d);
        q[i] = q_on_support(rho, se, alpha);
    }
    *eps_used = eps[2];
    // One step of power-law extrapolation q(eps) ~ q0 + c eps^p when the
    // increments behave; otherwise keep the smallest-eps value.
    double d1 = q[1] - q[0], d2 = q[2] - q[1];
    if (std::abs(d1) > 1e-15 && std::abs(d2) > 1e-15 && d1 * d2 > 0 &&
        std::abs(d2) < std::abs(d1)) {
        double ratio = d2 / d1;
        return q[2] + d2 * ratio / (1.0 - ratio);
    }
    return q[2];
}

Mat tilde_reduce(const Mat& rho, const SupportSplit& s) {
    Mat r00 = s.proj_support * rho * s.proj_support;
    Mat r01 = s.proj_support * rho * s.proj_kernel;
    Mat r11 = s.proj_kernel * rho * s.proj_kernel;
    SupportSplit s11 = support_split(r11);
    double leak = ((Mat::Identity(rho.rows(), rho.cols()) - s11.proj_support) * r01.adjoint())
                      .norm();
    if (leak > 1e-8 * (1.0 + rho.norm()) && r01.norm() > 1e-12 * (1.0 + rho.norm()))
        throw NumericalError("geometric_renyi: range of rho_01^dag leaves supp(rho_11)");
    Mat t = r00 - r01 * pinv_psd(r11) * r01.adjoint();
    t = 0.5 * (t + t.adjoint());
    // The reduction cancels exactly (e.g. every pure rho); clip cancellation
    // dust against the scale of rho so fractional powers cannot revive it.
    double floor = 1e-12 * rho.rows() * (1.0 + rho.norm());
    return apply_on_support(t, [](double x) { return x; }, floor);
}

void check_divergence_inputs(const Mat& rho, const Mat& sigma, const char* who) {
    require_hermitian(rho, who);
    require_hermitian(sigma, who);
    if (rho.rows() != sigma.rows()) throw DimMismatchError(std::string(who) + ": size mismatch");
    if (sigma.cwiseAbs().maxCoeff() == 0.0)
        throw NotPsdError(std::string(who) + ": sigma is zero");
}

ExtReal value_from_q(double q, double alpha) {
    if (q <= 0.0) {
        // ln 0 = -inf; the prefactor sign decides the branch.
        return alpha < 1.0 ? ExtReal::infinity() : ExtReal(-std::numeric_limits<double>::infinity());
    }
    return ExtReal(std::log(q) / (alpha - 1.0));
}

}  // namespace

DivergenceValue geometric_renyi_q(const Mat& rho, const Mat& sigma, double alpha) {
    check_divergence_inputs(rho, sigma, "geometric_renyi");
    if (alpha <= 0.0 || alpha == 1.0)
        throw BadAlphaError("geometric_renyi: alpha must lie in (0,1) u (1,inf)");
    SupportInfo si = analyze(sigma);
    DivergenceValue out;
    out.alpha = alpha;
    bool contained = contained_in(rho, si.split);
    if (contained) {
        out.support_case = SupportCase::contained;
        if (si.cond > kIllConditioned && alpha < 1.0) {
            out.value = ExtReal(q_eps_limit(rho, sigma, alpha, &out.eps_used));
        } else {
            out.value = ExtReal(q_on_support(rho, sigma, alpha));
        }
        return out;
    }
    if (alpha > 1.0) {
        out.support_case = SupportCase::infinite;
        out.value = ExtReal::infinity();
        return out;
    }
    out.support_case = SupportCase::tilde_reduced;
    Mat tr = tilde_reduce(rho, si.split);
    out.value = ExtReal(q_on_support(tr, sigma, alpha));
    return out;
}

DivergenceValue geometric_renyi(const Mat& rho, const Mat& sigma, double alpha) {
    DivergenceValue q = geometric_renyi_q(rho, sigma, alpha);
    DivergenceValue out = q;
    if (q.support_case == SupportCase::infinite || q.value.is_inf()) {
        out.value = ExtReal::infinity();
        return out;
    }
    out.value = value_from_q(q.value.value(), alpha);
    return out;
}

DivergenceValue geometric_renyi_channel_q(const Choi& cn, const Choi& cm, double alpha) {
    if (cn.dim_in != cm.dim_in || cn.dim_out != cm.dim_out)
        throw DimMismatchError("geometric_renyi_channel: dimension mismatch");
    if (!((alpha > 0.0 && alpha < 1.0) || (alpha > 1.0 && alpha <= 2.0)))
        throw BadAlphaError("geometric_renyi_channel: alpha outside the data-processing interval (0,1) u (1,2]");
    const int dr = cn.dim_in, db = cn.dim_out;
    SupportInfo si = analyze(cm.op);
    DivergenceValue out;
    out.alpha = alpha;
    bool contained = contained_in(cn.op, si.split);

    auto reduced = [&](const Mat& gn, const Mat& gm, double eps) {
        Mat g = (eps > 0)
                    ? geometric_mean(gm + eps * Mat::Identity(gm.rows(), gm.cols()), gn, alpha)
                    : geometric_mean(gm, gn, alpha);
        return partial_trace(g, dr, db, Subsystem::first);
    };

    if (!contained && alpha > 1.0) {
        out.support_case = SupportCase::infinite;
        out.value = ExtReal::infinity();
        return out;
    }

    Mat target = cn.op;
    if (!contained) {
        out.support_case = SupportCase::tilde_reduced;
        target = tilde_reduce(cn.op, si.split);
    } else {
        out.support_case = SupportCase::contained;
    }

    if (alpha < 1.0) {
        if (si.cond > kIllConditioned) {
            double q[3];
            const double eps[3] = {1e-4, 1e-6, 1e-8};
            for (int i = 0; i < 3; ++i)
                q[i] = min_eig_hermitian(reduced(cn.op, cm.op, eps[i]));
            out.eps_used = eps[2];
            double d1 = q[1] - q[0], d2 = q[2] - q[1];
            double qv = q[2];
            if (std::abs(d1) > 1e-15 && std::abs(d2) > 1e-15 && d1 * d2 > 0 &&
                std::abs(d2) < std::abs(d1))
                qv = q[2] + d2 * (d2 / d1) / (1.0 - d2 / d1);
            out.value = ExtReal(std::max(qv, 0.0));
        } else {
            out.value = ExtReal(std::max(min_eig_hermitian(reduced(target, cm.op, 0.0)), 0.0));
        }
    } else {
        out.value = ExtReal(op_norm_hermitian(reduced(target, cm.op, 0.0)));
    }
    return out;
}

DivergenceValue geometric_renyi_channel(const Choi& cn, const Choi& cm, double alpha) {
    DivergenceValue q = geometric_renyi_channel_q(cn, cm, alpha);
    DivergenceValue out = q;
    if (q.support_case == SupportCase::infinite || q.value.is_inf()) {
        out.value = ExtReal::infinity();
        return out;
    }
    out.value = value_from_q(q.value.value(), alpha);
    return out;
}

ExtReal bs_relative_entropy(const Mat& rho, const Mat& sigma) {
    check_divergence_inputs(rho, sigma, "bs_relative_entropy");
    SupportInfo si = analyze(sigma);
    if (!contained_in(rho, si.split)) return ExtReal::infinity();
    Mat rh = sqrt_psd(rho);
    Mat m = rh * pinv_psd(sigma) * rh;
    Mat lg = log_on_support(0.5 * (m + m.adjoint()));
    return ExtReal((rho * lg).trace().real());
}

ExtReal bs_channel(const Choi& cn, const Choi& cm) {
    if (cn.dim_in != cm.dim_in || cn.dim_out != cm.dim_out)
        throw DimMismatchError("bs_channel: dimension mismatch");
    SupportInfo si = analyze(cm.op);
    if (!contained_in(cn.op, si.split)) return ExtReal::infinity();
    Mat gh = sqrt_psd(cn.op);
    Mat m = gh * pinv_psd(cm.op) * gh;
    Mat t = gh * log_on_support(0.5 * (m + m.adjoint())) * gh;
    Mat red = partial_trace(t, cn.dim_in, cn.dim_out, Subsystem::first);
    return ExtReal(op_norm_hermitian(red));
}

ExtReal petz_renyi(const Mat& rho, const Mat& sigma, double alpha) {
    check_divergence_inputs(rho, sigma, "petz_renyi");
    if (alpha <= 0.0 || alpha == 1.0)
        throw BadAlphaError("petz_renyi: alpha must lie in (0,1) u (1,inf)");
    if (alpha > 1.0) {
        SupportInfo si = analyze(sigma);
        if (!contained_in(rho, si.split)) return ExtReal::infinity();
    }
    Mat ra = pow_psd(rho, alpha);
    Mat sb = pow_psd(sigma, 1.0 - alpha);
    double q = (ra * sb).trace().real();
    if (q <= 0.0) return ExtReal::infinity();  // disjoint supports, alpha < 1
    return ExtReal(std::log(q) / (alpha - 1.0));
}

ExtReal sandwiched_renyi(const Mat& rho, const Mat& sigma, double alpha) {
    check_divergence_inputs(rho, sigma, "sandwiched_renyi");
    if (alpha <= 0.0 || alpha == 1.0)
        throw BadAlphaError("sandwiched_renyi: alpha must lie in (0,1) u (1,inf)");
    if (alpha > 1.0) {
        SupportInfo si = analyze(sigma);
        if (!contained_in(rho, si.split)) return ExtReal::infinity();
    }
    Mat s = pow_psd(sigma, (1.0 - alpha) / (2.0 * alpha));
    Mat mid = s * rho * s;
    double q = pow_psd(0.5 * (mid + mid.adjoint()), alpha).trace().real();
    if (q <= 0.0) return ExtReal::infinity();
    return ExtReal(std::log(q) / (alpha - 1.0));
}

ExtReal relative_entropy(const Mat& rho, const Mat& sigma) {
    check_divergence_inputs(rho, sigma, "relative_entropy");
    SupportInfo si = analyze(sigma);
    if (!contained_in(rho, si.split)) return ExtReal::infinity();
    EigDecomp ed = eig_hermitian(rho);
    double cut = default_rank_tol(ed.eigenvalues.maxCoeff(), static_cast<int>(rho.rows()));
    double ent = 0.0;
    for (int i = 0; i < ed.eigenvalues.size(); ++i)
        if (ed.eigenvalues(i) > cut) ent += ed.eigenvalues(i) * std::log(ed.eigenvalues(i));
    double cross = (rho * log_on_support(sigma)).trace().real();
    return ExtReal(ent - cross);
}

ExtReal dmax(const Mat& rho, const Mat& sigma) {
    check_divergence_inputs(rho, sigma, "dmax");
    SupportInfo si = analyze(sigma);
    if (!contained_in(rho, si.split)) return ExtReal::infinity();
    Mat sih = inv_sqrt_psd(sigma);
    Mat mid = sih * rho * sih;
    double lmax = max_eig_hermitian(0.5 * (mid + mid.adjoint()));
    if (lmax <= 0.0) return ExtReal(-std::numeric_limits<double>::infinity());
    return ExtReal(std::log(lmax));
}

double geometric_fidelity(const Mat& rho, const Mat& sigma) {
    DivergenceValue q = geometric_renyi_q(rho, sigma, 0.5);
    double v = q.value.is_inf() ? 0.0 : q.value.value();
    return std::clamp(v * v, 0.0, 1.0);
}

double root_fidelity(const Mat& rho, const Mat& sigma) {
    Mat sh = sqrt_psd(sigma);
    Mat mid = sh * rho * sh;
    return sqrt_psd(0.5 * (mid + mid.adjoint())).trace().real();
}

double fidelity(const Mat& rho, const Mat& sigma) {
    double rf = root_fidelity(rho, sigma);
    return rf * rf;
}

}  // namespace qdb
