#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdb/divergences.hpp"
#include "qdb/fisher.hpp"
#include "qdb/random.hpp"

using namespace qdb;

namespace {

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

Mat bernoulli(double th) { return diag2(th, 1 - th); }
Mat dbernoulli() { return diag2(1, -1); }

// sqrt(2) sup_X |Tr[X drho]| over Tr[(XX*+X*X) rho] <= 1 probed at random
// feasible points: a lower bound on the root SLD value.
double root_sld_probe(rnd::Rng& rng, const Mat& rho, const Mat& drho, int tries) {
    double best = 0.0;
    const int d = static_cast<int>(rho.rows());
    for (int t = 0; t < tries; ++t) {
        Mat x = rnd::ginibre(rng, d, d);
        double scale = ((x * x.adjoint() + x.adjoint() * x) * rho).trace().real();
        if (scale <= 0) continue;
        x /= std::sqrt(scale);
        best = std::max(best, std::abs((x * drho).trace()));
    }
    return std::sqrt(2.0) * best;
}

}  // namespace

TEST_CASE("finiteness reports") {
    Mat rho = bernoulli(0.4);
    CHECK(finiteness_report(rho, dbernoulli(), FisherKind::sld).finite);
    CHECK(finiteness_report(rho, dbernoulli(), FisherKind::rld).finite);

    Mat pure = diag2(1.0, 0.0);
    Mat sx(2, 2);
    sx << 0, 1, 1, 0;
    CHECK(finiteness_report(pure, sx, FisherKind::sld).finite);
    CHECK(!finiteness_report(pure, sx, FisherKind::rld).finite);

    // kernel-block component breaks both conditions
    Mat bad = Mat::Zero(2, 2);
    bad(0, 0) = 1.0;
    bad(1, 1) = -1.0;
    CHECK(!finiteness_report(pure, bad, FisherKind::sld).finite);
    CHECK(!finiteness_report(pure, bad, FisherKind::rld).finite);
}

TEST_CASE("sld_state on the Bernoulli family and edge branches") {
    FisherResult r = sld_state(bernoulli(0.3), dbernoulli());
    CHECK(r.value.value() == doctest::Approx(1.0 / (0.3 * 0.7)).epsilon(1e-9));

    // constant family
    CHECK(sld_state(bernoulli(0.3), Mat(Mat::Zero(2, 2))).value.value() ==
          doctest::Approx(0.0));

    // rank-deficient state with off-diagonal derivative stays finite
    Mat pure = diag2(1.0, 0.0);
    Mat sx(2, 2);
    sx << 0, 1, 1, 0;
    FisherResult rp = sld_state(pure, sx);
    REQUIRE(rp.value.is_finite());
    CHECK(rp.value.value() == doctest::Approx(4.0).epsilon(1e-9));

    // kernel-block derivative diverges
    Mat bad = diag2(1.0, -1.0);
    CHECK(sld_state(pure, bad).value.is_inf());
}

TEST_CASE("rld_state values and support branch") {
    CHECK(rld_state(bernoulli(0.5), dbernoulli()).value.value() ==
          doctest::Approx(4.0).epsilon(1e-10));
    Mat pure = diag2(1.0, 0.0);
    Mat sx(2, 2);
    sx << 0, 1, 1, 0;
    CHECK(rld_state(pure, sx).value.is_inf());

    rnd::Rng rng(61);
    for (int t = 0; t < 20; ++t) {
        Mat rho = rnd::density(rng, 3);
        Mat drho = rnd::state_derivative(rng, rho);
        double direct = (drho * rho.inverse() * drho).trace().real();
        CHECK(rld_state(rho, drho).value.value() ==
              doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("RLD dominates SLD on random full-rank families") {
    rnd::Rng rng(67);
    for (int t = 0; t < 200; ++t) {
        Mat rho = rnd::density(rng, 2);
        Mat drho = rnd::state_derivative(rng, rho);
        CHECK(rld_state(rho, drho).value.value() >=
              sld_state(rho, drho).value.value() - 1e-9);
    }
}

TEST_CASE("pure-state reduction") {
    // phi_theta = cos(theta)|0> + sin(theta)|1> at theta = 0
    Vec phi(2), dphi(2);
    phi << 1, 0;
    dphi << 0, 1;
    CHECK(sld_pure(phi, dphi) == doctest::Approx(4.0));

    Vec zero = Vec::Zero(2);
    CHECK(sld_pure(phi, zero) == doctest::Approx(0.0));

    rnd::Rng rng(71);
    for (int t = 0; t < 10; ++t) {
        Vec p = rnd::unit_vec(rng, 3);
        Vec praw = rnd::unit_vec(rng, 3);
        Vec dp = praw - p * (p.adjoint() * praw)(0);
        Mat rho = p * p.adjoint();
        Mat drho = dp * p.adjoint() + p * dp.adjoint();
        CHECK(sld_pure(p, dp) ==
              doctest::Approx(sld_state(rho, drho).value.value()).epsilon(1e-8));
    }
}

TEST_CASE("rld_channel closed forms for the GADC families") {
    // f2 branch: N > 1/2
    FisherResult loss = rld_channel(gadc_loss_family(0.6), 0.5);
    CHECK(loss.value.value() == doctest::Approx(8.0 / 3.0).epsilon(1e-9));

    FisherResult phase = rld_channel(gadc_phase_family(0.5, 0.2), 0.0);
    CHECK(phase.value.value() == doctest::Approx(45.0).epsilon(1e-9));

    // nonconstant unitary family has infinite RLD information
    FisherResult uni = rld_channel(phase_unitary_family(), 0.3);
    CHECK(uni.value.is_inf());
}

TEST_CASE("cq channel information collapses to the best letter") {
    CqFamily f;
    f.dim_out = 2;
    f.letters.push_back(
        CqLetter{[](double th) { return bernoulli(th); }, [](double) { return dbernoulli(); }});
    f.letters.push_back(CqLetter{[](double) { return Mat(0.5 * Mat::Identity(2, 2)); },
                                 [](double) { return Mat(Mat::Zero(2, 2)); }});
    FisherResult r = sld_cq_channel(f, 0.5);
    CHECK(r.value.value() == doctest::Approx(4.0));

    CqFamily constant;
    constant.dim_out = 2;
    constant.letters.push_back(f.letters[1]);
    CHECK(sld_cq_channel(constant, 0.1).value.value() == doctest::Approx(0.0));
}

TEST_CASE("cq state decomposition") {
    RVec p(2), dp(2);
    p << 0.5, 0.5;
    dp << 1.0, -1.0;
    Mat id2 = 0.5 * Mat::Identity(2, 2);
    Mat zero = Mat::Zero(2, 2);
    // classical term only
    CHECK(cq_state_fisher(p, dp, {{id2, zero}, {id2, zero}}, FisherKind::sld) ==
          doctest::Approx(4.0));

    // constant distribution, one Bernoulli conditional with weight 0.3
    RVec q(2), dq(2);
    q << 0.3, 0.7;
    dq << 0.0, 0.0;
    CHECK(cq_state_fisher(q, dq, {{bernoulli(0.5), dbernoulli()}, {id2, zero}},
                          FisherKind::sld) == doctest::Approx(1.2));

    // all constant
    CHECK(cq_state_fisher(q, dq, {{id2, zero}, {id2, zero}}, FisherKind::rld) ==
          doctest::Approx(0.0));
}

TEST_CASE("data processing under random channels") {
    rnd::Rng rng(73);
    for (int t = 0; t < 40; ++t) {
        Mat rho = rnd::density(rng, 2);
        Mat drho = rnd::state_derivative(rng, rho);
        Choi ch = choi_from_kraus(rnd::kraus_set(rng, 2, 2, 2));
        Mat out = apply_choi_op(ch.op, 2, 2, rho, 1);
        Mat dout = apply_choi_op(ch.op, 2, 2, drho, 1);
        CHECK(sld_state(out, dout).value.value() <=
              sld_state(rho, drho).value.value() + 1e-7);
        CHECK(rld_state(out, dout).value.value() <=
              rld_state(rho, drho).value.value() + 1e-7);
    }
}

TEST_CASE("physical consistency under vanishing smoothing") {
    rnd::Rng rng(79);
    Mat rho = rnd::density(rng, 3);
    Mat drho = rnd::state_derivative(rng, rho);
    double exact = sld_state(rho, drho).value.value();
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {1e-3, 1e-5, 1e-7}) {
        double v = sld_state(smooth(rho, eps), Mat((1 - eps) * drho)).value.value();
        double err = std::abs(v - exact);
        CHECK(err <= prev + 1e-12);
        prev = err;
    }

    // divergence like c/eps when the finiteness condition fails
    Mat pure = diag2(1.0, 0.0);
    Mat bad = diag2(1.0, -1.0);
    double v3 = sld_state(smooth(pure, 1e-3), Mat((1 - 1e-3) * bad)).value.value();
    double v5 = sld_state(smooth(pure, 1e-5), Mat((1 - 1e-5) * bad)).value.value();
    CHECK(v5 > 50.0 * v3);
    CHECK(v3 * 1e-3 == doctest::Approx(v5 * 1e-5).epsilon(0.05));
}

TEST_CASE("root SLD probe stays below the root of the SLD value") {
    rnd::Rng rng(83);
    for (int t = 0; t < 10; ++t) {
        Mat rho = rnd::density(rng, 2);
        Mat drho = rnd::state_derivative(rng, rho);
        double root = std::sqrt(sld_state(rho, drho).value.value());
        CHECK(root_sld_probe(rng, rho, drho, 50) <= root + 1e-9);
    }
}

TEST_CASE("limit estimators on the Bernoulli family") {
    auto family = [](double th) { return bernoulli(th); };
    double exact = 1.0 / (0.3 * 0.7);

    LimitOptions opt;
    opt.eps = 1e-6;
    LimitEstimate f = state_fisher_limits(family, 0.3, LimitRoute::fidelity, opt);
    CHECK(std::abs(f.value - exact) / exact < 1e-2);

    LimitEstimate g = state_fisher_limits(family, 0.3, LimitRoute::geometric, opt);
    CHECK(std::abs(g.value - exact) / exact < 1e-2);

    LimitEstimate b = state_fisher_limits(family, 0.3, LimitRoute::bs, opt);
    CHECK(std::abs(b.value - exact) / exact < 1e-2);

    // constant family
    auto constant = [](double) { return bernoulli(0.4); };
    CHECK(std::abs(state_fisher_limits(constant, 0.3, LimitRoute::fidelity, opt).value) <
          1e-6);

    // Richardson extrapolation cancels the leading shift error
    double e_base = std::abs(f.value - exact);
    double e_rich = std::abs(f.richardson - exact);
    CHECK(e_rich <= e_base / 3.0);
}

TEST_CASE("channel limit estimator against the cq collapse and RLD ordering") {
    CqFamily f;
    f.dim_out = 2;
    f.letters.push_back(
        CqLetter{[](double th) { return bernoulli(th); }, [](double) { return dbernoulli(); }});
    ChannelFamily fam = cq_channel(f);
    LimitEstimate e = sld_channel_limit(fam, 0.5, 1e-3);
    CHECK(std::abs(e.value - 4.0) < 1e-2);

    ChannelFamily noise = gadc_noise_family(0.5);
    LimitEstimate en = sld_channel_limit(noise, 0.3, 1e-3);
    double rld = rld_channel(noise, 0.3).value.value();
    CHECK(en.value <= rld + 1e-2);

    // constant family
    Choi fixed{gadc_choi(0.5, 0.2), 2, 2};
    ChannelFamily constant;
    constant.eval = [fixed](double) { return fixed; };
    constant.deriv_fn = [](double) { return Mat(Mat::Zero(4, 4)); };
    constant.dim_in = constant.dim_out = 2;
    CHECK(std::abs(sld_channel_limit(constant, 0.0, 1e-3).value) < 1e-6);
}

TEST_CASE("additivity across tensor products") {
    rnd::Rng rng(89);
    for (int t = 0; t < 20; ++t) {
        Mat r1 = rnd::density(rng, 2), r2 = rnd::density(rng, 2);
        Mat d1 = rnd::state_derivative(rng, r1), d2 = rnd::state_derivative(rng, r2);
        Mat rp = kron(r1, r2);
        Mat dp = kron(d1, r2) + kron(r1, d2);
        CHECK(sld_state(rp, dp).value.value() ==
              doctest::Approx(sld_state(r1, d1).value.value() +
                              sld_state(r2, d2).value.value())
                  .epsilon(1e-7));
        CHECK(rld_state(rp, dp).value.value() ==
              doctest::Approx(rld_state(r1, d1).value.value() +
                              rld_state(r2, d2).value.value())
                  .epsilon(1e-7));
    }
}

TEST_CASE("RLD chain rule and amortization on GADC instances") {
    rnd::Rng rng(97);
    for (int t = 0; t < 30; ++t) {
        double g = 0.2 + 0.6 * rnd::uniform(rng);
        double nn = 0.2 + 0.6 * rnd::uniform(rng);
        ChannelFamily fam = gadc_noise_family(g);
        Mat rho = rnd::density(rng, 4);
        Mat drho = rnd::state_derivative(rng, rho);
        Mat out = apply_channel(fam.at(nn), rho, 2);
        Mat dout = apply_choi_op(fam.at(nn).op, 2, 2, drho, 2) +
                   apply_choi_op(fam.deriv_at(nn), 2, 2, rho, 2);
        double lhs = rld_state(out, dout).value.value();
        double chan = rld_channel(fam, nn).value.value();
        double in = rld_state(rho, drho).value.value();
        CHECK(lhs <= chan + in + 1e-6);
        CHECK(lhs - in <= chan + 1e-6);
    }
}

TEST_CASE("root SLD chain rule with the channel term from the limit estimator") {
    rnd::Rng rng(101);
    for (int t = 0; t < 6; ++t) {
        double g = 0.3 + 0.4 * rnd::uniform(rng);
        double nn = 0.3 + 0.4 * rnd::uniform(rng);
        ChannelFamily fam = gadc_noise_family(g);
        Mat rho = rnd::density(rng, 4);
        Mat drho = rnd::state_derivative(rng, rho);
        Mat out = apply_channel(fam.at(nn), rho, 2);
        Mat dout = apply_choi_op(fam.at(nn).op, 2, 2, drho, 2) +
                   apply_choi_op(fam.deriv_at(nn), 2, 2, rho, 2);
        double lhs = std::sqrt(sld_state(out, dout).value.value());
        double chan = sld_channel_limit(fam, nn, 1e-2, true).value;
        double in = std::sqrt(sld_state(rho, drho).value.value());
        CHECK(lhs <= std::sqrt(std::max(chan, 0.0)) + in + 1e-3);
    }
}
