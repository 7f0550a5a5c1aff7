#include "qdb/fisher.hpp"

#include <cmath>

#include "qdb/divergences.hpp"
#include "qdb/sdp.hpp"

namespace qdb {

FinitenessReport finiteness_report(const Mat& op, const Mat& deriv, FisherKind kind,
                                   double tol) {
    require_hermitian(op, "finiteness_report");
    require_hermitian(deriv, "finiteness_report");
    SupportSplit s = support_split(op);
    FinitenessReport rep;
    if (kind == FisherKind::sld) {
        rep.condition = "Pi_perp deriv Pi_perp = 0";
        rep.residual = (s.proj_kernel * deriv * s.proj_kernel).norm();
    } else {
        rep.condition = "supp(deriv) within supp(op)";
        rep.residual = (s.proj_kernel * deriv).norm();
    }
    rep.tol = tol >= 0 ? tol : tolerances().finiteness_rel * (1.0 + deriv.norm());
    rep.finite = rep.residual <= rep.tol;
    return rep;
}

static void check_state_inputs(const Mat& rho, const Mat& drho, const char* who) {
    require_hermitian(rho, who);
    require_hermitian(drho, who);
    if (rho.rows() != drho.rows()) throw DimMismatchError(std::string(who) + ": size mismatch");
    double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-8)
        throw NotPsdError(std::string(who) + ": input state is not normalized");
    if (std::abs(drho.trace()) > 1e-7 * (1.0 + drho.norm()))
        throw NumericalError(std::string(who) + ": derivative is not traceless");
}

FisherResult sld_state(const Mat& rho, const Mat& drho) {
    check_state_inputs(rho, drho, "sld_state");
    FisherResult res;
    res.finiteness = finiteness_report(rho, drho, FisherKind::sld);
    res.method = FisherMethod::spectral;
    if (!res.finiteness.finite) {
        res.value = ExtReal::infinity();
        return res;
    }
    EigDecomp ed = eig_hermitian(rho);
    const int d = static_cast<int>(rho.rows());
    const double cut = default_rank_tol(ed.eigenvalues.maxCoeff(), d);
    Mat dr_eig = ed.eigenvectors.adjoint() * drho * ed.eigenvectors;

    double total = 0.0;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            double denom = ed.eigenvalues(j) + ed.eigenvalues(k);
            if (denom > cut) total += std::norm(dr_eig(j, k)) / denom;
        }
    total *= 2.0;

    // Kernel-cross-term form, asserted to agree on the finite branch.
    double alt = 0.0;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            if (ed.eigenvalues(j) <= cut || ed.eigenvalues(k) <= cut) continue;
            alt += 2.0 * std::norm(dr_eig(j, k)) / (ed.eigenvalues(j) + ed.eigenvalues(k));
        }
    for (int j = 0; j < d; ++j) {
        if (ed.eigenvalues(j) <= cut) continue;
        cd acc = 0.0;
        for (int k = 0; k < d; ++k)
            if (ed.eigenvalues(k) <= cut) acc += dr_eig(j, k) * dr_eig(k, j);
        alt += 4.0 * acc.real() / ed.eigenvalues(j);
    }
    if (res.finiteness.residual < 0.1 * res.finiteness.tol &&
        std::abs(total - alt) > 1e-8 * (1.0 + std::abs(total)))
        throw NumericalError("sld_state: spectral and kernel-cross-term forms disagree");

    res.value = ExtReal(total);
    return res;
}

FisherResult rld_state(const Mat& rho, const Mat& drho) {
    check_state_inputs(rho, drho, "rld_state");
    FisherResult res;
    res.finiteness = finiteness_report(rho, drho, FisherKind::rld);
    res.method = FisherMethod::spectral;
    if (!res.finiteness.finite) {
        res.value = ExtReal::infinity();
        return res;
    }
    Mat inv = pinv_psd(rho);
    res.value = ExtReal((drho * inv * drho).trace().real());
    return res;
}

double sld_pure(const Vec& phi, const Vec& dphi) {
    if (phi.size() != dphi.size()) throw DimMismatchError("sld_pure: size mismatch");
    if (std::abs(phi.norm() - 1.0) > 1e-9)
        throw NumericalError("sld_pure: state vector is not normalized");
    cd overlap = (phi.adjoint() * dphi)(0);
    if (std::abs(overlap.real()) > 1e-7 * (1.0 + dphi.norm()))
        throw NumericalError("sld_pure: Re<dphi|phi> must vanish for a normalized family");
    double val = 4.0 * ((dphi.adjoint() * dphi)(0).real() - std::norm(overlap));
    return std::max(val, 0.0);
}

FisherResult rld_channel(const ChannelFamily& fam, double theta) {
    Choi ch = fam.at(theta);
    Mat dch = fam.deriv_at(theta);
    FisherResult res;
    res.finiteness = finiteness_report(ch.op, dch, FisherKind::rld);
    res.method = FisherMethod::spectral;
    if (!res.finiteness.finite) {
        res.value = ExtReal::infinity();
        return res;
    }
    Mat mid = dch * pinv_psd(ch.op) * dch;
    Mat red = partial_trace(mid, ch.dim_in, ch.dim_out, Subsystem::first);
    res.value = ExtReal(op_norm_hermitian(red));
    return res;
}

FisherResult sld_cq_channel(const CqFamily& f, double theta) {
    FisherResult out;
    out.method = FisherMethod::spectral;
    out.value = ExtReal(0.0);
    out.finiteness.condition = "per-letter Pi_perp d omega Pi_perp = 0";
    out.finiteness.finite = true;
    for (const CqLetter& letter : f.letters) {
        Mat w = letter.state(theta);
        Mat dw = letter.deriv(theta);
        FisherResult r = sld_state(w, dw);
        out.finiteness.residual = std::max(out.finiteness.residual, r.finiteness.residual);
        out.finiteness.tol = std::max(out.finiteness.tol, r.finiteness.tol);
        if (r.value.is_inf()) {
            out.value = ExtReal::infinity();
            out.finiteness.finite = false;
            return out;
        }
        if (out.value < r.value) out.value = r.value;
    }
    return out;
}

double cq_state_fisher(const RVec& p, const RVec& dp,
                       const std::vector<std::pair<Mat, Mat>>& cond, FisherKind kind) {
    if (p.size() != dp.size() || static_cast<size_t>(p.size()) != cond.size())
        throw DimMismatchError("cq_state_fisher: letter count mismatch");
    double classical = 0.0;
    for (int x = 0; x < p.size(); ++x)
        if (p(x) > 1e-15) classical += dp(x) * dp(x) / p(x);
    double quantum = 0.0;
    for (int x = 0; x < p.size(); ++x) {
        if (p(x) <= 1e-15) continue;
        FisherResult r = (kind == FisherKind::sld) ? sld_state(cond[x].first, cond[x].second)
                                                   : rld_state(cond[x].first, cond[x].second);
        if (r.value.is_inf()) return std::numeric_limits<double>::infinity();
        quantum += p(x) * r.value.value();
    }
    return classical + quantum;
}

namespace {

double one_shot_estimate(const std::function<Mat(double)>& family, double theta,
                         LimitRoute route, const LimitOptions& opt, double delta) {
    double t0 = opt.central ? theta - delta / 2 : theta;
    double t1 = opt.central ? theta + delta / 2 : theta + delta;
    Mat a = smooth(family(t0), opt.eps);
    Mat b = smooth(family(t1), opt.eps);
    switch (route) {
        case LimitRoute::fidelity: {
            double rf = root_fidelity(a, b);
            return (8.0 / (delta * delta)) * (1.0 - rf);
        }
        case LimitRoute::geometric: {
            const double al = opt.alpha;
            if (al <= 0 || al == 1.0)
                throw std::invalid_argument("state_fisher_limits: alpha outside (0,1)u(1,inf)");
            DivergenceValue q = geometric_renyi(b, a, al);
            if (q.value.is_inf()) return std::numeric_limits<double>::infinity();
            double qhat = std::exp((al - 1.0) * q.value.value());
            return 2.0 * (qhat - 1.0) / (al * (al - 1.0) * delta * delta);
        }
        case LimitRoute::bs: {
            ExtReal d = bs_relative_entropy(b, a);
            if (d.is_inf()) return std::numeric_limits<double>::infinity();
            return 2.0 * d.value() / (delta * delta);
        }
    }
    throw std::invalid_argument("state_fisher_limits: unknown route");
}

}  // namespace

LimitEstimate state_fisher_limits(const std::function<Mat(double)>& family, double theta,
                                  LimitRoute route, const LimitOptions& opt) {
    LimitEstimate e;
    e.delta = opt.delta;
    e.eps = opt.eps;
    e.value = one_shot_estimate(family, theta, route, opt, opt.delta);
    e.value_half = one_shot_estimate(family, theta, route, opt, opt.delta / 2);
    e.richardson = 2.0 * e.value_half - e.value;
    return e;
}

LimitEstimate sld_channel_limit(const ChannelFamily& fam, double theta, double delta,
                                bool central) {
    auto estimate = [&](double d) {
        double t0 = central ? theta - d / 2 : theta;
        double t1 = central ? theta + d / 2 : theta + d;
        fam.check_theta(t0);
        fam.check_theta(t1);
        double rf = sdp::root_fidelity_channel_sdp(fam.at(t0), fam.at(t1), 1e-10);
        return (8.0 / (d * d)) * (1.0 - rf);
    };
    LimitEstimate e;
    e.delta = delta;
    e.eps = 0.0;
    e.value = estimate(delta);
    e.value_half = estimate(delta / 2);
    e.richardson = 2.0 * e.value_half - e.value;
    return e;
}

}  // namespace qdb
