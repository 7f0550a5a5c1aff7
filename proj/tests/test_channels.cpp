#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdb/channels.hpp"
#include "qdb/random.hpp"

using namespace qdb;

TEST_CASE("identity channel Choi is the entangled projector") {
    Choi c = choi_from_kraus({Mat::Identity(2, 2)});
    Vec g = gamma_vec(2);
    CHECK((c.op - g * g.adjoint()).norm() < 1e-14);
    c.validate();
}

TEST_CASE("GADC Kraus operators reproduce the Choi matrix entries") {
    Choi c = choi_from_kraus(gadc_kraus(0.5, 0.2));
    CHECK(c.op(0, 0).real() == doctest::Approx(0.9));
    CHECK(c.op(0, 3).real() == doctest::Approx(std::sqrt(0.5)));
    CHECK(c.op(1, 1).real() == doctest::Approx(0.1));
    CHECK(c.op(2, 2).real() == doctest::Approx(0.4));
    CHECK(c.op(3, 3).real() == doctest::Approx(0.6));
    CHECK((c.op - gadc_choi(0.5, 0.2)).norm() < 1e-12);
    c.validate();

    Mat red = partial_trace(gadc_choi(0.5, 0.2), 2, 2, Subsystem::first);
    CHECK((red - Mat::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("non-trace-preserving Kraus sets are rejected") {
    Mat half = 0.5 * Mat::Identity(2, 2);
    CHECK_THROWS_AS(choi_from_kraus({half}), NotTracePreservingError);
}

TEST_CASE("completely depolarizing channel") {
    std::vector<Mat> ks = {0.5 * Mat::Identity(2, 2), 0.5 * sigma_x(), 0.5 * sigma_y(),
                           0.5 * sigma_z()};
    Choi c = choi_from_kraus(ks);
    CHECK((c.op - 0.5 * Mat::Identity(4, 4)).norm() < 1e-14);

    Mat phi = 0.5 * gamma_vec(2) * gamma_vec(2).adjoint();
    Mat out = apply_channel(c, phi, 2);
    CHECK((out - 0.25 * Mat::Identity(4, 4)).norm() < 1e-12);
}

TEST_CASE("apply_channel through post-selected teleportation") {
    rnd::Rng rng(41);
    Choi ident = choi_from_kraus({Mat::Identity(2, 2)});
    Mat rho = rnd::density(rng, 4);
    CHECK((apply_channel(ident, rho, 2) - rho).norm() < 1e-12);

    // full amplitude decay sends |1><1| to |0><0|
    Mat k1 = Mat::Zero(2, 2), k2 = Mat::Zero(2, 2);
    k1(0, 0) = 1.0;
    k2(0, 1) = 1.0;
    Choi c = choi_from_kraus({k1, k2});
    Mat one = Mat::Zero(2, 2);
    one(1, 1) = 1.0;
    Mat out = apply_channel(c, one, 1);
    CHECK(out(0, 0).real() == doctest::Approx(1.0));
    CHECK(std::abs(out(1, 1)) < 1e-12);
}

TEST_CASE("GADC families carry analytic derivatives") {
    ChannelFamily noise = gadc_noise_family(0.7);
    Mat dn = noise.deriv_at(0.4);
    Mat expect = -0.7 * kron(Mat::Identity(2, 2), sigma_z());
    CHECK((dn - expect).norm() < 1e-14);

    ChannelFamily loss = gadc_loss_family(0.3);
    Mat dg = loss.deriv_at(0.75);
    CHECK(dg(0, 3).real() == doctest::Approx(-1.0));
    CHECK(dg(0, 0).real() == doctest::Approx(-0.3));
    CHECK(dg(2, 2).real() == doctest::Approx(0.7));

    for (GadcParam p : {GadcParam::loss, GadcParam::noise, GadcParam::phase}) {
        ChannelFamily fam = gadc_family(p, 0.5, 0.2);
        double theta = p == GadcParam::loss ? 0.5 : (p == GadcParam::noise ? 0.2 : 0.15);
        ChannelFamily fd =
            finite_difference_family(fam.eval, fam.dim_in, fam.dim_out, fam.lo, fam.hi);
        CHECK((fam.deriv_at(theta) - fd.deriv_at(theta)).norm() <=
              1e-6 * (1.0 + fam.deriv_at(theta).norm()));
        Mat red = partial_trace(fam.deriv_at(theta), 2, 2, Subsystem::first);
        CHECK(red.cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("family parameter interval is enforced") {
    ChannelFamily loss = gadc_loss_family(0.2);
    CHECK_THROWS_AS(loss.at(1.5), ParamOutOfRangeError);
    CHECK_THROWS_AS(loss.at(0.0), ParamOutOfRangeError);
    CHECK_THROWS_AS(gadc_noise_family(1.2), ParamOutOfRangeError);
}

TEST_CASE("cq channel families") {
    CqFamily f;
    f.dim_out = 2;
    f.letters.push_back(CqLetter{[](double th) {
                                     Mat m = Mat::Zero(2, 2);
                                     m(0, 0) = th;
                                     m(1, 1) = 1 - th;
                                     return m;
                                 },
                                 [](double) {
                                     Mat m = Mat::Zero(2, 2);
                                     m(0, 0) = 1;
                                     m(1, 1) = -1;
                                     return m;
                                 }});
    f.letters.push_back(CqLetter{[](double) { return Mat(0.5 * Mat::Identity(2, 2)); },
                                 [](double) { return Mat(Mat::Zero(2, 2)); }});
    ChannelFamily fam = cq_channel(f);
    Choi c = fam.at(0.3);
    CHECK(c.op(0, 0).real() == doctest::Approx(0.3));
    CHECK(c.op(1, 1).real() == doctest::Approx(0.7));
    CHECK(c.op(2, 2).real() == doctest::Approx(0.5));
    CHECK(std::abs(c.op(0, 2)) < 1e-15);
    c.validate();
    Mat red = partial_trace(fam.deriv_at(0.3), 2, 2, Subsystem::first);
    CHECK(red.cwiseAbs().maxCoeff() < 1e-12);

    CqFamily g;
    g.dim_out = 2;
    g.letters.push_back(f.letters[1]);
    CHECK(cq_channel(g).deriv_at(0.5).norm() < 1e-15);
}

TEST_CASE("smoothing toward the maximally mixed state") {
    Mat zero = Mat::Zero(2, 2);
    zero(0, 0) = 1.0;
    CHECK((smooth(zero, 0.0) - zero).norm() < 1e-15);
    Mat s = smooth(zero, 0.1);
    CHECK(s(0, 0).real() == doctest::Approx(0.95));
    CHECK(s(1, 1).real() == doctest::Approx(0.05));

    rnd::Rng rng(43);
    for (int t = 0; t < 10; ++t) {
        Vec v = rnd::unit_vec(rng, 3);
        Mat rho = v * v.adjoint();
        double eps = 0.3 * rnd::uniform(rng);
        CHECK(min_eig_hermitian(smooth(rho, eps)) >= eps / 3 - 1e-12);
    }
    CHECK_THROWS_AS(smooth(zero, 1.0), ParamOutOfRangeError);
}

TEST_CASE("apply_channel preserves trace and positivity on random inputs") {
    rnd::Rng rng(47);
    for (int t = 0; t < 10; ++t) {
        Choi c = choi_from_kraus(rnd::kraus_set(rng, 2, 2, 3));
        Mat rho = rnd::density(rng, 4);
        Mat out = apply_channel(c, rho, 2);
        CHECK(std::abs(out.trace().real() - 1.0) < 1e-10);
        CHECK(min_eig_hermitian(out) > -1e-9);
    }
}

TEST_CASE("pure bipartite inputs act on the Choi operator by conjugation") {
    rnd::Rng rng(53);
    Choi c = choi_from_kraus(rnd::kraus_set(rng, 2, 2, 2));
    Mat z = rnd::ginibre(rng, 2, 2);
    z /= std::sqrt((z.adjoint() * z).trace().real());
    Mat zi = kron(z, Mat::Identity(2, 2));
    Mat psi = zi * gamma_vec(2) * gamma_vec(2).adjoint() * zi.adjoint();
    CHECK((apply_channel(c, psi, 2) - zi * c.op * zi.adjoint()).norm() < 1e-12);
}
