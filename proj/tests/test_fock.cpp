#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "kerrq/fock.hpp"

using namespace kerrq;

namespace {
constexpr cplx I{0.0, 1.0};

FockVector coh(const std::string& m, cplx z, int n) { return FockVector::coherent(m, z, n, 1e-14); }
}  // namespace

TEST_CASE("coherent amplitudes: vacuum") {
  const CVec q = coherent_amplitudes(0.0, 4);
  CHECK(q.size() == 5);
  CHECK(std::abs(q[0] - 1.0) == 0.0);
  for (int n = 1; n < 5; ++n) CHECK(std::abs(q[n]) == 0.0);
}

TEST_CASE("coherent amplitudes: Q_1(1)") {
  const CVec q = coherent_amplitudes(1.0, 20);
  CHECK(q[1].real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("coherent amplitudes at z=0.3 match a 40-digit series") {
  // Frozen from an arbitrary-precision evaluation of z^n/sqrt(n!) exp(-z^2/2).
  const double ref[] = {0.95599748183309990701,  0.2867992445499299721,   0.060839307198130339626,
                        0.010537677116445266406, 0.0015806515674667899609, 0.00021206666121584024457,
                        0.000025972755571723794571, 2.9450336616792162701e-6, 3.1236799094940336153e-7,
                        3.1236799094940336153e-8,  2.9633829585929302625e-9};
  const CVec q = coherent_amplitudes(0.3, 10);
  for (int n = 0; n <= 10; ++n) CHECK(std::abs(q[n] - ref[n]) < 1e-14);
}

TEST_CASE("coherent amplitudes reject a heavy tail") {
  CHECK_THROWS_AS(coherent_amplitudes(3.0, 4, 1e-12), TailTooHeavy);
  CHECK(coherent_tail(3.0, cutoff_for(3.0, 1e-12)) <= 1e-12);
  CHECK(coherent_tail(3.0, cutoff_for(3.0, 1e-12) - 1) > 1e-12);
}

TEST_CASE("cross-Kerr") {
  const FockVector s = tensor(coh("a", cplx(1.2, 0.3), 30), coh("c", 0.4, 12));
  SUBCASE("chi = 0 is the identity") {
    CHECK((apply_cross_kerr(s, "a", "c", 0.0).amplitudes() - s.amplitudes()).norm() == 0.0);
  }
  SUBCASE("unknown mode") { CHECK_THROWS_AS(apply_cross_kerr(s, "a", "x", 0.1), UnknownMode); }
  SUBCASE("|alpha>|n> picks up the phase chi*n") {
    const int n = 3;
    CVec fock = CVec::Zero(6);
    fock[n] = 1.0;
    const FockVector in = tensor(coh("a", 1.5, 30), FockVector::single("c", fock));
    const double chi = 0.2;
    const FockVector out = apply_cross_kerr(in, "a", "c", chi);
    const FockVector expect = tensor(coh("a", 1.5 * std::exp(I * (chi * n)), 30), FockVector::single("c", fock));
    CHECK(std::abs(std::abs(inner(expect, out)) - 1.0) < 1e-12);
  }
  SUBCASE("coherent pair matches the photon-number expansion term by term") {
    const cplx al(1.1, -0.4);
    const cplx ga(0.3, 0.1);
    const double chi = 0.01;
    const int na = 30, nc = 14;
    const FockVector out = apply_cross_kerr(tensor(coh("a", al, na), coh("c", ga, nc)), "a", "c", chi);
    const CVec qg = coherent_amplitudes(ga, nc, 1e-14);
    CVec direct = CVec::Zero((na + 1) * (nc + 1));
    for (int n = 0; n <= nc; ++n) {
      const CVec qa = coherent_amplitudes(al * std::exp(I * (chi * n)), na, 1e-14);
      for (int m = 0; m <= na; ++m) direct[m * (nc + 1) + n] += qa[m] * qg[n];
    }
    CHECK((direct - out.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("beamsplitter") {
  SUBCASE("theta = 0 is the identity") {
    const FockVector s = tensor(coh("c", 0.5, 20), coh("d", cplx(0, 0.3), 20));
    CHECK((apply_beamsplitter(s, "c", "d", 0.0).amplitudes() - s.amplitudes()).norm() < 1e-15);
  }
  SUBCASE("coherent in, coherent out") {
    const cplx u(0.7, -0.2), v(-0.4, 0.9);
    const double th = 0.6;
    const int n = 40;
    const FockVector out = apply_beamsplitter(tensor(coh("c", u, n), coh("d", v, n)), "c", "d", th);
    const FockVector expect = tensor(coh("c", u * std::cos(th) + I * v * std::sin(th), n),
                                     coh("d", v * std::cos(th) + I * u * std::sin(th), n));
    CHECK(std::norm(inner(expect, out)) > 1 - 1e-10);
  }
  SUBCASE("cancelling reference leaves i sin(theta)(gx - g1) in d") {
    const cplx gx(0.1, 0.05), g1(-0.08, 0.02);
    const double th = 0.5;
    const cplx gt1 = -I * g1 * std::tan(th);
    const int n = 30;
    const FockVector out = apply_beamsplitter(tensor(coh("c", gx, n), coh("d", gt1, n)), "c", "d", th);
    const DensOp rd = discard_mode(out, "c");
    CHECK(fidelity(rd, coh("d", I * std::sin(th) * (gx - g1), n)) > 1 - 1e-10);
  }
  SUBCASE("unitarity at theta = pi/7") {
    CVec a(36);
    for (int k = 0; k < 36; ++k) a[k] = cplx(std::sin(1.3 * k + 0.2), std::cos(0.7 * k * k)) / (1.0 + k);
    const FockVector s(std::vector<std::string>{"c", "d"}, {6, 6}, a, 1.0);
    const FockVector out = apply_beamsplitter(s, "c", "d", M_PI / 7);
    CHECK(std::abs(out.norm2() - s.norm2()) < 1e-12);
  }
  SUBCASE("overflow when weight sits beyond the two-mode cutoff") {
    CVec a = CVec::Zero(16);
    a[3 * 4 + 3] = 1.0;
    const FockVector s(std::vector<std::string>{"c", "d"}, {4, 4}, a, 1e-12);
    CHECK_THROWS_AS(apply_beamsplitter(s, "c", "d", 0.3), TruncationOverflow);
  }
}

TEST_CASE("displacement") {
  const FockVector vac = FockVector::vacuum({"c"}, {25});
  SUBCASE("d = 0") {
    CHECK((apply_displacement(coh("c", 0.3, 24), "c", 0.0).amplitudes() - coh("c", 0.3, 24).amplitudes()).norm() < 1e-14);
  }
  SUBCASE("vacuum to coherent") {
    const cplx g(0.4, -0.3);
    const FockVector out = apply_displacement(vac, "c", g);
    CHECK((out.amplitudes() - coherent_amplitudes(g, 24, 1e-14)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("|0.2> displaced by -0.2 returns to vacuum") {
    const FockVector out = apply_displacement(coh("c", 0.2, 24), "c", -0.2);
    CHECK(std::norm(inner(vac, out)) >= 1 - 1e-10);
  }
  SUBCASE("sign convention: D(-g1) shifts |g1> to vacuum") {
    const cplx g1(0.1, 0.2);
    CHECK(std::norm(inner(vac, apply_displacement(coh("c", g1, 24), "c", -g1))) >= 1 - 1e-12);
  }
  SUBCASE("overflow") { CHECK_THROWS_AS(apply_displacement(vac, "c", 4.0), TruncationOverflow); }
}

TEST_CASE("click projectors") {
  SUBCASE("vacuum never clicks") {
    CHECK(project_click(FockVector::vacuum({"d"}, {5}), "d", true).norm2() == 0.0);
  }
  const cplx g(0.3, 0.4);
  const FockVector s = coh("d", g, 25);
  CHECK(project_click(s, "d", false).norm2() == doctest::Approx(std::exp(-std::norm(g))).epsilon(1e-13));
  CHECK(project_click(s, "d", true).norm2() == doctest::Approx(1 - std::exp(-std::norm(g))).epsilon(1e-12));
  CHECK_THROWS_AS(project_click(s, "x", true), UnknownMode);
}

TEST_CASE("partial trace") {
  SUBCASE("product state") {
    const FockVector a = coh("a", 0.5, 20);
    const DensOp r = discard_mode(tensor(a, coh("c", 0.2, 15)), "c");
    CHECK(fidelity(r, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.trace() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("Bell state of two qubit modes") {
    CVec a = CVec::Zero(4);
    a[0] = a[3] = 1 / std::sqrt(2.0);
    const FockVector b(std::vector<std::string>{"a", "b"}, {2, 2}, a);
    const CMat r = discard_mode(b, "b").matrix();
    CHECK(std::abs(r(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(r(1, 1) - 0.5) < 1e-15);
    CHECK(std::abs(r(0, 1)) < 1e-15);
    CHECK(partial_trace(DensOp::pure(b), {"b"}).matrix().isApprox(r, 1e-14));
  }
  SUBCASE("Kerr-entangled probe traced out is a Poisson mixture of rotated coherent states") {
    const cplx al(1.0, 0.5), ga(0.1, 0.0);
    const double chi = 0.3;
    const int na = 28, nc = 10;
    const FockVector psi = apply_cross_kerr(tensor(coh("a", al, na), coh("c", ga, nc)), "a", "c", chi);
    const CMat r = discard_mode(psi, "c").matrix();
    const CVec qg = coherent_amplitudes(ga, nc, 1e-14);
    CMat direct = CMat::Zero(na + 1, na + 1);
    for (int n = 0; n <= nc; ++n) {
      const CVec v = coherent_amplitudes(al * std::exp(I * (chi * n)), na, 1e-14);
      direct += std::norm(qg[n]) * v * v.adjoint();
    }
    CHECK((r - direct).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("unknown mode") {
    CHECK_THROWS_AS(discard_mode(coh("a", 0.1, 5), "z"), UnknownMode);
  }
}

TEST_CASE("metrics") {
  SUBCASE("fidelity with itself") {
    const FockVector s = coh("a", cplx(0.3, 1.0), 30);
    CHECK(fidelity(DensOp::pure(s), s) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(fidelity(DensOp::pure(s), DensOp::pure(s)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(trace_distance(DensOp::pure(s), DensOp::pure(s)) < 1e-7);
  }
  SUBCASE("orthogonal Fock states") {
    CVec e1 = CVec::Zero(3), e2 = CVec::Zero(3);
    e1[1] = 1;
    e2[2] = 1;
    const auto s1 = FockVector::single("a", e1), s2 = FockVector::single("a", e2);
    CHECK(fidelity(DensOp::pure(s1), s2) == 0.0);
    CHECK(trace_distance(DensOp::pure(s1), DensOp::pure(s2)) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("coherent overlap modulus") {
    const double a2 = 4.0, chi = 0.3;
    const cplx al = std::sqrt(a2);
    const cplx ov = inner(coh("a", al, 50), coh("a", al * std::exp(I * chi), 50));
    CHECK(std::abs(ov) == doctest::Approx(std::exp(-a2 * (1 - std::cos(chi)))).epsilon(1e-12));
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(inner(coh("a", 0.1, 5), coh("a", 0.1, 6)), ShapeMismatch);
  }
  SUBCASE("mixed-state trace distance against the dense formula") {
    CMat m(3, 3);
    m << 0.5, 0.1, 0.0, 0.1, 0.3, cplx(0, 0.05), 0.0, cplx(0, -0.05), 0.2;
    CMat n(3, 3);
    n << 0.2, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.3;
    const DensOp r = DensOp::from_matrix({"a"}, {3}, m), s = DensOp::from_matrix({"a"}, {3}, n);
    Eigen::SelfAdjointEigenSolver<CMat> es(m - n);
    CHECK(trace_distance(r, s) == doctest::Approx(0.5 * es.eigenvalues().cwiseAbs().sum()).epsilon(1e-12));
  }
}

TEST_CASE("density operator utilities") {
  CMat m(2, 2);
  m << 0.75, 0.0, 0.0, 0.25;
  const DensOp r = DensOp::from_matrix({"a"}, {2}, m);
  CHECK(von_neumann_entropy(r) == doctest::Approx(0.8112781244591328).epsilon(1e-12));
  const Eigen::VectorXd ev = r.eigenvalues();
  CHECK(ev[0] == doctest::Approx(0.75));
  const DensOp doubled = mix(r, r);
  CHECK(doubled.trace() == doctest::Approx(2.0));
  CHECK(doubled.compressed().factor().cols() == 2);
  CHECK(std::abs(r.principal_vector().amplitudes()[0]) == doctest::Approx(1.0));
  CHECK_THROWS_AS(DensOp::from_matrix({"a"}, {2}, -m), DomainError);
}

TEST_CASE("binary dump round trip") {
  const FockVector s = tensor(coh("a", cplx(0.3, 0.2), 16), coh("b", cplx(-0.1, 0.4), 15));
  std::stringstream buf;
  dump_binary(s, buf);
  CHECK(buf.str().size() == s.size() * 16);
  // first amplitude: real part then imaginary part, little-endian
  double re0;
  std::memcpy(&re0, buf.str().data(), 8);
  CHECK(re0 == s.amplitudes()[0].real());
  const FockVector back = load_binary(buf, s.modes(), s.dims());
  CHECK((back.amplitudes() - s.amplitudes()).norm() == 0.0);
}
