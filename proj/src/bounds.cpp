#include "qdb/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qdb/sdp.hpp"

namespace qdb {

ExtReal cramer_rao(const ExtReal& fisher, long n, Scaling scaling) {
    if (n < 1) throw std::invalid_argument("cramer_rao: n must be >= 1");
    if (fisher.is_inf()) return ExtReal(0.0);
    double denom = fisher.value();
    if (denom <= 0.0) return ExtReal::infinity();
    double uses = (scaling == Scaling::standard) ? static_cast<double>(n)
                                                 : static_cast<double>(n) * n;
    return ExtReal(1.0 / (uses * denom));
}

HeisenbergVerdict heisenberg_verdict(const ChannelFamily& fam, double theta) {
    FisherResult r = rld_channel(fam, theta);
    HeisenbergVerdict v;
    v.finiteness_residual = r.finiteness.residual;
    v.rld_value = r.value;
    v.blocked = r.value.is_finite();
    return v;
}

double gadc_closed_form(GadcParam which, double gamma, double N) {
    if (!(gamma > 0 && gamma < 1) || !(N > 0 && N < 1))
        throw ParamOutOfRangeError("gadc_closed_form: gamma and N must lie in (0,1)");
    switch (which) {
        case GadcParam::loss: {
            double f1 = (1.0 / (N - gamma * N) + 1.0 / (1.0 - N) - 4.0) / (4.0 * gamma * gamma);
            double f2 =
                (1.0 / ((1.0 - gamma) * (1.0 - N)) + 1.0 / N - 4.0) / (4.0 * gamma * gamma);
            return N <= 0.5 ? f1 : f2;
        }
        case GadcParam::noise:
            return 1.0 / (N * (1.0 - N));
        case GadcParam::phase: {
            double step = N > 0.5 ? 1.0 : 0.0;
            double inner = N + (1.0 - 2.0 * N) * step;
            return 4.0 * (1.0 - gamma) * (1.0 - gamma * inner) /
                   ((1.0 - N) * N * gamma * gamma);
        }
    }
    throw ParamOutOfRangeError("gadc_closed_form: unknown parameter tag");
}

namespace {

// Golden-section maximization of a unimodal-ish function after a coarse
// bracket scan; evaluates endpoints-adjacent candidates as well.
double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  double xtol, int coarse = 33) {
    double best_x = lo, best_v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= coarse; ++i) {
        double x = lo + (hi - lo) * i / coarse;
        double v = f(x);
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
    }
    double a = std::max(lo, best_x - (hi - lo) / coarse);
    double b = std::min(hi, best_x + (hi - lo) / coarse);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > xtol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    double xm = 0.5 * (a + b);
    return std::max(best_v, f(xm));
}

// Petz-Renyi quasi-entropy scan over alpha with precomputed overlaps.
struct PetzScan {
    RVec a, b;       // eigenvalues of rho, sigma
    RMat overlap;    // |<u_i|v_j>|^2
    double acut = 0.0, bcut = 0.0;

    PetzScan(const Mat& rho, const Mat& sigma) {
        EigDecomp er = eig_hermitian(rho), es = eig_hermitian(sigma);
        a = er.eigenvalues;
        b = es.eigenvalues;
        acut = default_rank_tol(a.maxCoeff(), static_cast<int>(a.size()));
        bcut = default_rank_tol(b.maxCoeff(), static_cast<int>(b.size()));
        Mat cross = er.eigenvectors.adjoint() * es.eigenvectors;
        overlap = cross.cwiseAbs2();
    }

    // Q_alpha = sum_ij a_i^alpha b_j^(1-alpha) |<u_i|v_j>|^2 over the supports.
    double q(double alpha) const {
        double s = 0.0;
        for (int i = 0; i < a.size(); ++i) {
            if (a(i) <= acut) continue;
            for (int j = 0; j < b.size(); ++j) {
                if (b(j) <= bcut) continue;
                s += std::pow(a(i), alpha) * std::pow(b(j), 1.0 - alpha) * overlap(i, j);
            }
        }
        return s;
    }

    // Q_0+ = Tr[Pi_rho sigma].
    double q_zero() const {
        double s = 0.0;
        for (int i = 0; i < a.size(); ++i) {
            if (a(i) <= acut) continue;
            for (int j = 0; j < b.size(); ++j)
                if (b(j) > bcut) s += b(j) * overlap(i, j);
        }
        return s;
    }

    // sup_{alpha in (0,1)} (1-alpha) D_alpha = sup -ln Q_alpha, including the
    // alpha -> 0 endpoint.
    double chernoff() const {
        auto obj = [&](double al) {
            double qv = q(al);
            return qv > 0 ? -std::log(qv) : std::numeric_limits<double>::infinity();
        };
        double interior = golden_max(obj, 1e-4, 1.0 - 1e-4, 1e-6);
        double q0 = q_zero();
        double endpoint = q0 > 0 ? -std::log(q0) : std::numeric_limits<double>::infinity();
        return std::max(interior, endpoint);
    }
};

// Geometric-Renyi quasi-entropy scan for a channel pair: eigendecompositions
// are done once, each alpha costs one small sandwich.
struct GeoChannelScan {
    bool contained = true;
    int dr = 0, db = 0;
    Mat mh;          // Gamma_M^{1/2}
    Mat u;           // eigenvectors of T = Gamma_M^{-1/2} target Gamma_M^{-1/2}
    RVec t;          // eigenvalues of T
    double tcut = 0.0;

    GeoChannelScan(const Choi& cn, const Choi& cm) {
        dr = cn.dim_in;
        db = cn.dim_out;
        SupportSplit s = support_split(cm.op);
        Mat target = cn.op;
        double leak = (s.proj_kernel * cn.op * s.proj_kernel).norm();
        if (leak > 1e-10 * (1.0 + cn.op.norm())) {
            contained = false;
            Mat r01 = s.proj_support * cn.op * s.proj_kernel;
            Mat r11 = s.proj_kernel * cn.op * s.proj_kernel;
            Mat red = s.proj_support * cn.op * s.proj_support -
                      r01 * pinv_psd(r11) * r01.adjoint();
            red = 0.5 * (red + red.adjoint());
            double floor = 1e-12 * red.rows() * (1.0 + cn.op.norm());
            target = apply_on_support(red, [](double x) { return x; }, floor);
        }
        mh = sqrt_psd(cm.op);
        Mat mih = inv_sqrt_psd(cm.op);
        Mat mid = mih * target * mih;
        EigDecomp ed = eig_hermitian(0.5 * (mid + mid.adjoint()));
        t = ed.eigenvalues;
        u = ed.eigenvectors;
        tcut = default_rank_tol(t.size() ? std::max(t.maxCoeff(), 0.0) : 0.0,
                                static_cast<int>(t.size()));
    }

    // Q_hat_alpha: lambda_min(Tr_B[G_alpha]) for alpha<1, the infinity norm
    // for alpha in (1,2].
    double q(double alpha) const {
        RVec powed = RVec::Zero(t.size());
        for (int i = 0; i < t.size(); ++i)
            powed(i) = t(i) > tcut ? std::pow(t(i), alpha) : 0.0;
        Mat g = mh * u * powed.asDiagonal() * u.adjoint() * mh;
        Mat red = partial_trace(0.5 * (g + g.adjoint()), dr, db, Subsystem::first);
        return alpha < 1.0 ? std::max(min_eig_hermitian(red), 0.0) : op_norm_hermitian(red);
    }

    double dhat(double alpha) const {
        if (alpha > 1.0 && !contained) return std::numeric_limits<double>::infinity();
        double qv = q(alpha);
        if (qv <= 0.0) return std::numeric_limits<double>::infinity();
        return std::log(qv) / (alpha - 1.0);
    }
};

// Pure bipartite input |psi> = (X (x) I)|Gamma> with X = D(s) V^dag,
// V^dag = Ry(beta) Rz(phi); the outer unitary factor is dropped because the
// divergences are isometrically invariant.
Mat pure_input(double s, double beta, double phi) {
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = std::sqrt(s);
    d(1, 1) = std::sqrt(1.0 - s);
    Mat ry(2, 2);
    ry << std::cos(beta / 2), -std::sin(beta / 2), std::sin(beta / 2), std::cos(beta / 2);
    Mat rz = Mat::Zero(2, 2);
    rz(0, 0) = std::exp(cd(0, -phi / 2));
    rz(1, 1) = std::exp(cd(0, phi / 2));
    Mat x = d * ry * rz;
    Vec v = kron(x, Mat::Identity(2, 2)) * gamma_vec(2);
    Mat psi = v * v.adjoint();
    return psi;
}

// Simple Nelder-Mead maximizer in k dimensions.
RVec nelder_mead_max(const std::function<double(const RVec&)>& f, RVec x0, double scale,
                     int iters) {
    const int k = static_cast<int>(x0.size());
    std::vector<RVec> pts(k + 1, x0);
    std::vector<double> vals(k + 1);
    for (int i = 1; i <= k; ++i) pts[i](i - 1) += scale;
    for (int i = 0; i <= k; ++i) vals[i] = f(pts[i]);
    for (int it = 0; it < iters; ++it) {
        // order descending (maximization)
        std::vector<int> idx(k + 1);
        for (int i = 0; i <= k; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] > vals[b]; });
        std::vector<RVec> np(k + 1);
        std::vector<double> nv(k + 1);
        for (int i = 0; i <= k; ++i) {
            np[i] = pts[idx[i]];
            nv[i] = vals[idx[i]];
        }
        pts = np;
        vals = nv;
        if (std::abs(vals[0] - vals[k]) < 1e-10 * (1.0 + std::abs(vals[0]))) break;
        RVec centroid = RVec::Zero(k);
        for (int i = 0; i < k; ++i) centroid += pts[i];
        centroid /= k;
        RVec xr = centroid + (centroid - pts[k]);
        double fr = f(xr);
        if (fr > vals[0]) {
            RVec xe = centroid + 2.0 * (centroid - pts[k]);
            double fe = f(xe);
            if (fe > fr) {
                pts[k] = xe;
                vals[k] = fe;
            } else {
                pts[k] = xr;
                vals[k] = fr;
            }
        } else if (fr > vals[k - 1]) {
            pts[k] = xr;
            vals[k] = fr;
        } else {
            RVec xc = centroid + 0.5 * (pts[k] - centroid);
            double fc = f(xc);
            if (fc > vals[k]) {
                pts[k] = xc;
                vals[k] = fc;
            } else {
                for (int i = 1; i <= k; ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i <= k; ++i)
        if (vals[i] > vals[best]) best = i;
    return pts[best];
}

}  // namespace

double chernoff_lower(const Choi& cn, const Choi& cm) {
    if (cn.dim_in != 2 || cn.dim_out != 2 || cm.dim_in != 2 || cm.dim_out != 2)
        throw DimMismatchError("chernoff_lower: qubit channels only");
    auto value_at = [&](double s, double beta, double phi) {
        double sc = std::clamp(s, 0.0, 1.0);
        Mat psi = pure_input(sc, beta, phi);
        Mat out_n = apply_channel(cn, psi, 2);
        Mat out_m = apply_channel(cm, psi, 2);
        PetzScan scan(out_n, out_m);
        return scan.chernoff();
    };
    double best = 0.0;
    RVec best_x(3);
    best_x << 0.5, 0.0, 0.0;
    const int g = 12;
    for (int i = 0; i <= g; ++i)
        for (int j = 0; j < g; ++j)
            for (int k = 0; k < g; ++k) {
                double s = static_cast<double>(i) / g;
                double beta = M_PI * j / g;
                double phi = 2.0 * M_PI * k / g;
                double v = value_at(s, beta, phi);
                if (v > best) {
                    best = v;
                    best_x << s, beta, phi;
                }
            }
    RVec refined = nelder_mead_max(
        [&](const RVec& x) { return value_at(x(0), x(1), x(2)); }, best_x, 0.5 / g, 200);
    best = std::max(best, value_at(refined(0), refined(1), refined(2)));
    return best;
}

double geometric_chernoff_upper(const Choi& cn, const Choi& cm) {
    GeoChannelScan scan(cn, cm);
    auto obj = [&](double al) {
        double qv = scan.q(al);
        return qv > 0 ? -std::log(qv) : std::numeric_limits<double>::infinity();
    };
    // (1-alpha) D_hat_alpha = -ln Q_hat_alpha on (0,1); include the alpha->0
    // endpoint value.
    double interior = golden_max(obj, 1e-4, 1.0 - 1e-4, 1e-6);
    double endpoint = obj(1e-9);
    return std::max(interior, endpoint);
}

double chernoff_nonasymptotic_upper(const Choi& cn, const Choi& cm, long n, double p) {
    if (!(p > 0 && p < 1)) throw std::invalid_argument("chernoff_nonasymptotic_upper: prior");
    if (n < 1) throw std::invalid_argument("chernoff_nonasymptotic_upper: n must be >= 1");
    DivergenceValue d = geometric_renyi_channel(cn, cm, 0.5);
    double base = d.value.is_inf() ? std::numeric_limits<double>::infinity() : d.value.value();
    return base - std::log(p * (1.0 - p)) / n;
}

HoeffdingBound hoeffding_upper(const Choi& cn, const Choi& cm, double r) {
    if (!(r > 0)) throw std::invalid_argument("hoeffding_upper: r must be positive");
    GeoChannelScan scan(cn, cm);
    // D_hat is nondecreasing in alpha, so its infimum over (0,1) sits at 0+.
    double d_low = scan.dhat(1e-7);
    HoeffdingBound out;
    if (r < d_low) {
        out.value = ExtReal::infinity();
        out.note = "r below the alpha->0 limit of D_hat; exponent unbounded";
        return out;
    }
    auto obj = [&](double al) {
        double dv = scan.dhat(al);
        if (!std::isfinite(dv)) return -std::numeric_limits<double>::infinity();
        return (al - 1.0) / al * (r - dv);
    };
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 99; ++i) best = std::max(best, obj(0.01 * i));
    double refined = golden_max(obj, 1e-4, 1.0 - 1e-4, 1e-7);
    best = std::max(best, refined);
    if (best < 0.0) {
        out.value = ExtReal(0.0);
        out.clamped = true;
        out.note = "negative optimum clamped to 0: r >= D_hat_alpha for all alpha";
        return out;
    }
    out.value = ExtReal(best);
    return out;
}

namespace {

std::vector<double> grid_points(double lo, double hi, double step) {
    std::vector<double> g;
    for (double x = lo; x <= hi + 1e-12; x += step) g.push_back(x);
    return g;
}

}  // namespace

FigureData figure_data(const FigureConfig& cfg) {
    FigureData data;
    const double n = static_cast<double>(cfg.n_uses);
    if (cfg.kind == FigureKind::ch_disc) {
        data.header = {"x1", "x2", "upper", "lower", "gap"};
        for (double x1 : grid_points(cfg.grid_lo, cfg.grid_hi, cfg.grid_step))
            for (double x2 : grid_points(cfg.grid_lo, cfg.grid_hi, cfg.grid_step)) {
                Choi a = cfg.fix_loss ? Choi{gadc_choi(cfg.gamma1, x1), 2, 2}
                                      : Choi{gadc_choi(x1, cfg.noise1), 2, 2};
                Choi b = cfg.fix_loss ? Choi{gadc_choi(cfg.gamma2, x2), 2, 2}
                                      : Choi{gadc_choi(x2, cfg.noise2), 2, 2};
                DivergenceValue up = geometric_renyi_channel(a, b, 0.5);
                double upper = up.value.is_inf() ? std::numeric_limits<double>::infinity()
                                                 : up.value.value();
                double lower = chernoff_lower(a, b);
                data.rows.push_back({x1, x2, upper, lower, upper - lower});
            }
        return data;
    }

    data.header = {"x", "rld_bound_log", "sld_bound_log"};
    for (double x : grid_points(cfg.grid_lo, cfg.grid_hi, cfg.grid_step)) {
        ChannelFamily fam;
        double theta = x;
        double rld;
        switch (cfg.kind) {
            case FigureKind::estimate_loss:
                fam = gadc_loss_family(cfg.noise);
                rld = gadc_closed_form(GadcParam::loss, x, cfg.noise);
                break;
            case FigureKind::estimate_noise:
                fam = gadc_noise_family(cfg.gamma);
                rld = gadc_closed_form(GadcParam::noise, cfg.gamma, x);
                break;
            case FigureKind::estimate_phase:
                fam = gadc_phase_family(x, cfg.noise);
                theta = cfg.phi;
                rld = gadc_closed_form(GadcParam::phase, x, cfg.noise);
                break;
            default:
                throw std::invalid_argument("figure_data: unknown figure");
        }
        LimitEstimate sld = sld_channel_limit(fam, theta, cfg.delta, /*central=*/true);
        double rld_bound = 1.0 / (n * rld);
        double sld_bound = 1.0 / (n * sld.value);
        data.rows.push_back({x, std::log(rld_bound), std::log(sld_bound)});
    }
    return data;
}

std::string to_csv(const FigureData& data) {
    std::ostringstream os;
    os.precision(12);
    for (size_t i = 0; i < data.header.size(); ++i) {
        if (i) os << ",";
        os << data.header[i];
    }
    os << "\n";
    for (const auto& row : data.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) os << ",";
            os << row[i];
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace qdb
