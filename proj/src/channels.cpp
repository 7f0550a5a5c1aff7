#include "qdb/channels.hpp"

#include <cmath>

namespace qdb {

void Choi::validate(double tp_tol) const {
    if (op.rows() != static_cast<long>(dim_in) * dim_out)
        throw DimMismatchError("Choi: operator size does not match dims");
    require_hermitian(op, "Choi");
    double lmin = min_eig_hermitian(op);
    double scale = std::max(1.0, max_eig_hermitian(op));
    if (lmin < -10.0 * default_rank_tol(scale, static_cast<int>(op.rows())) - 1e-12)
        throw NotPsdError("Choi: operator is not PSD");
    Mat red = partial_trace(op, dim_in, dim_out, Subsystem::first);
    if ((red - Mat::Identity(dim_in, dim_in)).cwiseAbs().maxCoeff() > tp_tol)
        throw NotTracePreservingError("Choi: Tr_B does not equal the identity");
}

Choi choi_from_kraus(const std::vector<Mat>& kraus) {
    if (kraus.empty()) throw DimMismatchError("choi_from_kraus: no Kraus operators");
    const int dout = static_cast<int>(kraus[0].rows());
    const int din = static_cast<int>(kraus[0].cols());
    Mat sum = Mat::Zero(din, din);
    for (const Mat& k : kraus) {
        if (k.rows() != dout || k.cols() != din)
            throw DimMismatchError("choi_from_kraus: inconsistent Kraus shapes");
        sum += k.adjoint() * k;
    }
    if ((sum - Mat::Identity(din, din)).cwiseAbs().maxCoeff() > 1e-9)
        throw NotTracePreservingError("choi_from_kraus: sum K^dag K != I");
    Mat g = Mat::Zero(static_cast<long>(din) * dout, static_cast<long>(din) * dout);
    for (const Mat& k : kraus) {
        // (I (x) K)|Gamma> = row-major vec of K^T
        Vec v(static_cast<long>(din) * dout);
        for (int i = 0; i < din; ++i)
            for (int b = 0; b < dout; ++b) v(i * dout + b) = k(b, i);
        g += v * v.adjoint();
    }
    return Choi{std::move(g), din, dout};
}

Mat apply_choi_op(const Mat& op, int dA, int dB, const Mat& rho_ra, int dR) {
    if (op.rows() != static_cast<long>(dA) * dB)
        throw DimMismatchError("apply_choi_op: Choi dims mismatch");
    if (rho_ra.rows() != static_cast<long>(dR) * dA)
        throw DimMismatchError("apply_choi_op: input dims mismatch");
    // out[(r,b),(r',b')] = sum_{a,a'} rho[(r,a),(r',a')] op[(a,b),(a',b')]
    Mat out = Mat::Zero(static_cast<long>(dR) * dB, static_cast<long>(dR) * dB);
    for (int r = 0; r < dR; ++r)
        for (int rp = 0; rp < dR; ++rp)
            for (int b = 0; b < dB; ++b)
                for (int bp = 0; bp < dB; ++bp) {
                    cd acc = 0.0;
                    for (int a = 0; a < dA; ++a)
                        for (int ap = 0; ap < dA; ++ap)
                            acc += rho_ra(r * dA + a, rp * dA + ap) * op(a * dB + b, ap * dB + bp);
                    out(r * dB + b, rp * dB + bp) = acc;
                }
    return out;
}

Mat apply_channel(const Choi& c, const Mat& rho_ra, int dR) {
    return apply_choi_op(c.op, c.dim_in, c.dim_out, rho_ra, dR);
}

void ChannelFamily::check_theta(double theta) const {
    if (!(theta > lo && theta < hi))
        throw ParamOutOfRangeError("ChannelFamily: theta outside the valid interval");
}

Choi ChannelFamily::at(double theta) const {
    check_theta(theta);
    return eval(theta);
}

Mat ChannelFamily::deriv_at(double theta) const {
    check_theta(theta);
    if (mode == Mode::analytic) return deriv_fn(theta);
    double h = fd_step;
    double a = theta - h, b = theta + h;
    if (a <= lo) { a = theta; b = theta + 2 * h; }
    if (b >= hi) { b = theta; a = theta - 2 * h; }
    return (eval(b).op - eval(a).op) / (b - a);
}

ChannelFamily finite_difference_family(std::function<Choi(double)> eval, int dim_in,
                                       int dim_out, double lo, double hi, double h) {
    ChannelFamily f;
    f.eval = std::move(eval);
    f.mode = ChannelFamily::Mode::finite_difference;
    f.lo = lo;
    f.hi = hi;
    f.fd_step = h;
    f.dim_in = dim_in;
    f.dim_out = dim_out;
    return f;
}

Mat sigma_x() {
    Mat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
Mat sigma_y() {
    Mat m(2, 2);
    m << 0, cd(0, -1), cd(0, 1), 0;
    return m;
}
Mat sigma_z() {
    Mat m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

std::vector<Mat> gadc_kraus(double gamma, double N) {
    Mat k1(2, 2), k2(2, 2), k3(2, 2), k4(2, 2);
    k1 << std::sqrt(1 - N), 0, 0, std::sqrt(1 - N) * std::sqrt(1 - gamma);
    k2 << 0, std::sqrt(gamma * (1 - N)), 0, 0;
    k3 << std::sqrt(N) * std::sqrt(1 - gamma), 0, 0, std::sqrt(N);
    k4 << 0, 0, std::sqrt(gamma * N), 0;
    return {k1, k2, k3, k4};
}

Mat gadc_choi(double gamma, double N) {
    Mat g = Mat::Zero(4, 4);
    g(0, 0) = 1 - gamma * N;
    g(0, 3) = std::sqrt(1 - gamma);
    g(3, 0) = std::sqrt(1 - gamma);
    g(1, 1) = gamma * N;
    g(2, 2) = gamma * (1 - N);
    g(3, 3) = 1 - gamma * (1 - N);
    return g;
}

Mat gadc_phase_choi(double phi, double gamma, double N) {
    Mat g = gadc_choi(gamma, N);
    g(0, 3) = std::exp(cd(0, -2 * phi)) * std::sqrt(1 - gamma);
    g(3, 0) = std::exp(cd(0, 2 * phi)) * std::sqrt(1 - gamma);
    return g;
}

static void check_gadc_params(double gamma, double N) {
    if (!(gamma > 0 && gamma < 1) || !(N > 0 && N < 1))
        throw ParamOutOfRangeError("gadc: gamma and N must lie in (0,1)");
}

ChannelFamily gadc_loss_family(double N) {
    if (!(N > 0 && N < 1)) throw ParamOutOfRangeError("gadc_loss_family: N outside (0,1)");
    ChannelFamily f;
    f.eval = [N](double g) { return Choi{gadc_choi(g, N), 2, 2}; };
    f.deriv_fn = [N](double g) {
        Mat d = Mat::Zero(4, 4);
        d(0, 0) = -N;
        d(1, 1) = N;
        d(2, 2) = 1 - N;
        d(3, 3) = -(1 - N);
        d(0, 3) = -1.0 / (2.0 * std::sqrt(1 - g));
        d(3, 0) = d(0, 3);
        return d;
    };
    f.lo = 0;
    f.hi = 1;
    f.dim_in = f.dim_out = 2;
    return f;
}

ChannelFamily gadc_noise_family(double gamma) {
    if (!(gamma > 0 && gamma < 1))
        throw ParamOutOfRangeError("gadc_noise_family: gamma outside (0,1)");
    ChannelFamily f;
    f.eval = [gamma](double n) { return Choi{gadc_choi(gamma, n), 2, 2}; };
    f.deriv_fn = [gamma](double) { return Mat(-gamma * kron(Mat::Identity(2, 2), sigma_z())); };
    f.lo = 0;
    f.hi = 1;
    f.dim_in = f.dim_out = 2;
    return f;
}

ChannelFamily gadc_phase_family(double gamma, double N) {
    check_gadc_params(gamma, N);
    ChannelFamily f;
    f.eval = [gamma, N](double phi) { return Choi{gadc_phase_choi(phi, gamma, N), 2, 2}; };
    f.deriv_fn = [gamma, N](double phi) {
        Mat d = Mat::Zero(4, 4);
        d(0, 3) = cd(0, -2) * std::exp(cd(0, -2 * phi)) * std::sqrt(1 - gamma);
        d(3, 0) = cd(0, 2) * std::exp(cd(0, 2 * phi)) * std::sqrt(1 - gamma);
        return d;
    };
    f.lo = -std::numeric_limits<double>::infinity();
    f.hi = std::numeric_limits<double>::infinity();
    f.dim_in = f.dim_out = 2;
    return f;
}

ChannelFamily gadc_family(GadcParam which, double gamma, double N) {
    switch (which) {
        case GadcParam::loss: return gadc_loss_family(N);
        case GadcParam::noise: return gadc_noise_family(gamma);
        case GadcParam::phase: return gadc_phase_family(gamma, N);
    }
    throw ParamOutOfRangeError("gadc_family: unknown parameter tag");
}

ChannelFamily phase_unitary_family() {
    auto u = [](double t) {
        Mat m = Mat::Zero(2, 2);
        m(0, 0) = std::exp(cd(0, -t));
        m(1, 1) = std::exp(cd(0, t));
        return m;
    };
    ChannelFamily f;
    f.eval = [u](double t) { return choi_from_kraus({u(t)}); };
    f.deriv_fn = [u](double t) {
        Mat ut = u(t);
        Mat du = cd(0, -1) * sigma_z() * ut;
        Mat g0 = gamma_vec(2) * gamma_vec(2).adjoint();
        Mat iu = kron(Mat::Identity(2, 2), ut);
        Mat idu = kron(Mat::Identity(2, 2), du);
        Mat d = idu * g0 * iu.adjoint() + iu * g0 * idu.adjoint();
        return d;
    };
    f.dim_in = f.dim_out = 2;
    return f;
}

ChannelFamily cq_channel(const CqFamily& f) {
    const int nx = static_cast<int>(f.letters.size());
    const int db = f.dim_out;
    ChannelFamily fam;
    fam.eval = [f, nx, db](double theta) {
        Mat g = Mat::Zero(static_cast<long>(nx) * db, static_cast<long>(nx) * db);
        for (int x = 0; x < nx; ++x)
            g.block(x * db, x * db, db, db) = f.letters[x].state(theta);
        return Choi{std::move(g), nx, db};
    };
    fam.deriv_fn = [f, nx, db](double theta) {
        Mat g = Mat::Zero(static_cast<long>(nx) * db, static_cast<long>(nx) * db);
        for (int x = 0; x < nx; ++x)
            g.block(x * db, x * db, db, db) = f.letters[x].deriv(theta);
        return g;
    };
    fam.dim_in = nx;
    fam.dim_out = db;
    return fam;
}

Mat smooth(const Mat& rho, double eps) {
    if (!(eps >= 0 && eps < 1)) throw ParamOutOfRangeError("smooth: eps outside [0,1)");
    const int d = static_cast<int>(rho.rows());
    return (1 - eps) * rho + (eps / d) * Mat::Identity(d, d);
}

Choi smooth_choi(const Choi& c, double eps) {
    // Mixes with the channel that replaces the input by the maximally mixed
    // state, so the result is again a valid Choi operator.
    Mat mixed = kron(Mat::Identity(c.dim_in, c.dim_in),
                     Mat::Identity(c.dim_out, c.dim_out) / c.dim_out);
    return Choi{(1 - eps) * c.op + eps * mixed, c.dim_in, c.dim_out};
}

}  // namespace qdb
