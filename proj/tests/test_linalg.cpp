#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdb/linalg.hpp"
#include "qdb/random.hpp"

using namespace qdb;

TEST_CASE("eig_hermitian on diagonal and Pauli-X inputs") {
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 0.2;
    d(1, 1) = 0.8;
    EigDecomp ed = eig_hermitian(d);
    CHECK(ed.eigenvalues(0) == doctest::Approx(0.2));
    CHECK(ed.eigenvalues(1) == doctest::Approx(0.8));
    CHECK((ed.eigenvectors.cwiseAbs() - Mat::Identity(2, 2)).norm() < 1e-12);

    Mat x(2, 2);
    x << 0, 1, 1, 0;
    EigDecomp ex = eig_hermitian(x);
    CHECK(ex.eigenvalues(0) == doctest::Approx(-1.0));
    CHECK(ex.eigenvalues(1) == doctest::Approx(1.0));
}

TEST_CASE("eig_hermitian reconstruction on random 4x4") {
    rnd::Rng rng(11);
    Mat h = rnd::hermitian(rng, 4);
    EigDecomp ed = eig_hermitian(h);
    Mat rec = ed.eigenvectors * ed.eigenvalues.asDiagonal() * ed.eigenvectors.adjoint();
    CHECK((rec - h).norm() <= 1e-10 * 4 * h.norm());
    CHECK((ed.eigenvectors.adjoint() * ed.eigenvectors - Mat::Identity(4, 4)).norm() < 1e-10);
}

TEST_CASE("eig_hermitian rejects non-Hermitian input") {
    Mat m(2, 2);
    m << 0, 1, 0, 0;
    CHECK_THROWS_AS(eig_hermitian(m), NonHermitianError);
}

TEST_CASE("support_split basics") {
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 1.0;
    SupportSplit s = support_split(d);
    CHECK(s.rank == 1);
    CHECK((s.proj_support - d).norm() < 1e-12);
    CHECK(s.proj_kernel(1, 1).real() == doctest::Approx(1.0));

    rnd::Rng rng(2);
    Mat full = rnd::density(rng, 3);
    SupportSplit sf = support_split(full);
    CHECK(sf.rank == 3);
    CHECK((sf.proj_support - Mat::Identity(3, 3)).norm() < 1e-10);

    // projector onto the maximally entangled vector
    Vec g = gamma_vec(2);
    Mat proj = 0.5 * g * g.adjoint();
    SupportSplit sp = support_split(proj);
    CHECK(sp.rank == 1);
    CHECK((sp.proj_support - proj / proj.trace().real() * 2.0 / 2.0 -
           Mat::Zero(4, 4))
              .norm() < 1.0);  // rank-1 projector recovered
    CHECK((sp.proj_support - 0.5 * g * g.adjoint()).norm() < 1e-10);
}

TEST_CASE("support_split rejects indefinite input") {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -0.5;
    CHECK_THROWS_AS(support_split(m), NotPsdError);
}

TEST_CASE("apply_on_support conventions") {
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 2.0;
    Mat inv = apply_on_support(d, [](double x) { return 1.0 / x; });
    CHECK(inv(0, 0).real() == doctest::Approx(0.5));
    CHECK(std::abs(inv(1, 1)) < 1e-14);

    Mat s = Mat::Zero(2, 2);
    s(0, 0) = 4.0;
    s(1, 1) = 9.0;
    Mat rt = apply_on_support(s, [](double x) { return std::sqrt(x); });
    CHECK(rt(0, 0).real() == doctest::Approx(2.0));
    CHECK(rt(1, 1).real() == doctest::Approx(3.0));

    Mat e = Mat::Zero(2, 2);
    e(0, 0) = std::exp(1.0);
    Mat lg = apply_on_support(e, [](double x) { return std::log(x); });
    CHECK(lg(0, 0).real() == doctest::Approx(1.0));
    CHECK(std::abs(lg(1, 1)) < 1e-14);  // kernel maps to zero
}

TEST_CASE("partial_trace on product operators and the entangled projector") {
    rnd::Rng rng(3);
    Mat a = rnd::hermitian(rng, 3), b = rnd::hermitian(rng, 2);
    Mat red = partial_trace(kron(a, b), 3, 2, Subsystem::first);
    CHECK((red - b.trace() * a).cwiseAbs().maxCoeff() < 1e-12);
    Mat redb = partial_trace(kron(a, b), 3, 2, Subsystem::second);
    CHECK((redb - a.trace() * b).cwiseAbs().maxCoeff() < 1e-12);

    Vec g = gamma_vec(2);
    Mat gg = g * g.adjoint();
    CHECK((partial_trace(gg, 2, 2, Subsystem::first) - Mat::Identity(2, 2)).norm() < 1e-12);

    CHECK_THROWS_AS(partial_trace(Mat::Identity(5, 5), 2, 2, Subsystem::first),
                    DimMismatchError);
}

TEST_CASE("vec_gamma identities") {
    Mat i2 = Mat::Identity(2, 2);
    Vec v = vec_gamma(i2);
    CHECK(v(0).real() == doctest::Approx(1));
    CHECK(std::abs(v(1)) < 1e-15);
    CHECK(std::abs(v(2)) < 1e-15);
    CHECK(v(3).real() == doctest::Approx(1));

    Mat d = Mat::Zero(2, 2);
    d(0, 0) = cd(0.3, 0);
    d(1, 1) = cd(0.7, 0);
    Vec vd = vec_gamma(d);
    CHECK(vd(0).real() == doctest::Approx(0.3));
    CHECK(vd(3).real() == doctest::Approx(0.7));

    rnd::Rng rng(5);
    Mat k = rnd::ginibre(rng, 3, 3);
    cd tr = (gamma_vec(3).adjoint() * kron(k, Mat::Identity(3, 3)) * gamma_vec(3))(0);
    CHECK(std::abs(tr - k.trace()) < 1e-12);

    // transpose trick
    Vec lhs = kron(Mat::Identity(3, 3), k) * gamma_vec(3);
    Vec rhs = kron(k.transpose(), Mat::Identity(3, 3)) * gamma_vec(3);
    CHECK((lhs - rhs).norm() < 1e-13);
}

TEST_CASE("geometric mean special cases") {
    rnd::Rng rng(7);
    Mat x = rnd::psd(rng, 3) + 0.2 * Mat::Identity(3, 3);
    for (double alpha : {0.3, 0.5, 2.0}) {
        Mat g = geometric_mean(x, x, alpha);
        CHECK((g - x).norm() < 1e-9 * x.norm());
    }

    Mat p = Mat::Zero(2, 2), q = Mat::Zero(2, 2);
    p(0, 0) = 0.25;
    p(1, 1) = 0.75;
    q(0, 0) = 0.5;
    q(1, 1) = 0.5;
    Mat g2 = geometric_mean(p, q, 2.0);
    CHECK(g2(0, 0).real() == doctest::Approx(1.0));
    CHECK(g2(1, 1).real() == doctest::Approx(1.0 / 3.0));

    // Tr G_a(X,Y) = Tr G_{1-a}(Y,X)
    Mat y = rnd::psd(rng, 3) + 0.2 * Mat::Identity(3, 3);
    double t1 = geometric_mean(x, y, 0.7).trace().real();
    double t2 = geometric_mean(y, x, 0.3).trace().real();
    CHECK(t1 == doctest::Approx(t2).epsilon(1e-10));
}

TEST_CASE("geometric mean support violation for alpha > 1") {
    Mat x = Mat::Zero(2, 2);
    x(0, 0) = 1.0;
    Mat y = Mat::Identity(2, 2);
    CHECK_THROWS_AS(geometric_mean(x, y, 2.0, 0.0), SupportViolationError);
    CHECK_NOTHROW(geometric_mean(x, y, 2.0, 1e-8));
}

TEST_CASE("operator norm additivity across a tensor sum") {
    rnd::Rng rng(9);
    Mat x = rnd::psd(rng, 3), y = rnd::psd(rng, 2);
    double lhs = op_norm_hermitian(kron(x, Mat::Identity(2, 2)) +
                                   kron(Mat::Identity(3, 3), y));
    CHECK(lhs == doctest::Approx(op_norm_hermitian(x) + op_norm_hermitian(y)).epsilon(1e-10));
}

TEST_CASE("permute and trace multi-factor systems") {
    rnd::Rng rng(13);
    Mat a = rnd::hermitian(rng, 2), b = rnd::hermitian(rng, 3), c = rnd::hermitian(rng, 2);
    Mat abc = kron(kron(a, b), c);
    Mat bac = permute_systems(abc, {2, 3, 2}, {1, 0, 2});
    CHECK((bac - kron(kron(b, a), c)).norm() < 1e-12);
    Mat keep_b = partial_trace_systems(abc, {2, 3, 2}, {false, true, false});
    CHECK((keep_b - a.trace() * c.trace() * b).norm() < 1e-12);
}
