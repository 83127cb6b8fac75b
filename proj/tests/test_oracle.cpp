#include "kerrio/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "doctest.h"
#include "kerrio/model.hpp"
#include "kerrio/observables.hpp"
#include "kerrio/resum.hpp"

using namespace kerrio;

namespace {

ModelParams params_of(double delta, double u, cplx f, double n_b) {
  ModelParams p;
  p.delta = delta;
  p.kappa = 1.0;
  p.u = u;
  p.f = f;
  p.n_b = n_b;
  return p;
}

cplx linear_amplitude(const ModelParams& p) {
  return -std::sqrt(p.kappa) * p.f / cplx(p.kappa / 2.0, -p.delta);
}

Eigen::MatrixXcd as_matrix(const SteadyState& s) {
  Eigen::MatrixXcd rho(s.dim, s.dim);
  for (int i = 0; i < s.dim; ++i) {
    for (int j = 0; j < s.dim; ++j) rho(i, j) = s.rho[size_t(i) * s.dim + j];
  }
  return rho;
}

}  // namespace

TEST_CASE("steady state is a proper density matrix") {
  ModelParams p = params_of(0.3, 0.1, cplx(0.2, 0.0), 0.25);
  auto state = steady_state(p, FockConfig{});
  CHECK(state.dim == 30);
  CHECK(state.trace_error <= 1e-10);
  auto rho = as_matrix(state);
  CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  CHECK(std::abs(rho.trace() - cplx(1.0, 0.0)) <= 1e-12);
}

TEST_CASE("u = 0 steady state is the displaced coherent state") {
  ModelParams p = params_of(0.3, 0.0, cplx(0.2, 0.1), 0.0);
  auto state = steady_state(p, FockConfig{});
  cplx a0 = linear_amplitude(p);
  CHECK(std::abs(fock_moment(state, 0, 1) - a0) < 1e-10);
  CHECK(std::abs(fock_moment(state, 1, 1) - std::norm(a0)) < 1e-10);
  CHECK(std::abs(fock_moment(state, 0, 2) - a0 * a0) < 1e-10);
}

TEST_CASE("undriven steady state is thermal") {
  ModelParams p = params_of(0.2, 0.0, cplx(0.0, 0.0), 0.3);
  auto state = steady_state(p, FockConfig{});
  CHECK(std::abs(fock_moment(state, 0, 1)) < 1e-12);
  CHECK(std::abs(fock_moment(state, 1, 1) - p.n_b) < 1e-10);
  // geometric level populations
  const double q = p.n_b / (p.n_b + 1.0);
  double expect = 1.0 - q;
  for (int n = 0; n < 4; ++n) {
    CHECK(std::abs(state.rho[size_t(n) * state.dim + n] - expect) < 1e-10);
    expect *= q;
  }
}

TEST_CASE("thermal drive shifts the mean without disturbing it") {
  // first moments stay linear at u = 0, whatever the temperature
  ModelParams p = params_of(-0.4, 0.0, cplx(0.2, 0.0), 0.25);
  auto state = steady_state(p, FockConfig{});
  cplx a0 = linear_amplitude(p);
  CHECK(std::abs(fock_moment(state, 0, 1) - a0) < 1e-10);
  CHECK(std::abs(fock_moment(state, 1, 1) - (std::norm(a0) + p.n_b)) < 1e-10);
  CHECK(std::abs(oracle_reflection(p, FockConfig{}) - 1.0) < 1e-12);
}

TEST_CASE("frozen interacting point") {
  // Cross-checked against an independent dense solver outside this codebase.
  ModelParams p = params_of(0.3, 0.1, cplx(0.2, 0.0), 0.0);
  auto state = steady_state(p, FockConfig{});
  CHECK(std::abs(fock_moment(state, 0, 1) -
                 cplx(-0.3061096584615709, -0.1662774180141688)) < 1e-8);
  CHECK(oracle_reflection(p, FockConfig{}) ==
        doctest::Approx(0.9726859840072463).epsilon(1e-8));
  auto g2v = oracle_g2(p, FockConfig{}, {0.0});
  CHECK(g2v[0] == doctest::Approx(0.6327431704358008).epsilon(1e-8));
}

TEST_CASE("evolution preserves the trace") {
  ModelParams p = params_of(0.3, 0.1, cplx(0.2, 0.0), 0.25);
  auto values = two_time(p, FockConfig{}, {}, {}, {0.0, 1.0, 2.0, 3.0});
  for (cplx v : values) CHECK(std::abs(v - cplx(1.0, 0.0)) < 1e-12);
}

TEST_CASE("linear regression decays at the cavity rate") {
  ModelParams p = params_of(0.4, 0.0, cplx(0.2, 0.0), 0.3);
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.4 * i);
  auto values =
      two_time(p, FockConfig{}, {LadderOp::Raise}, {LadderOp::Lower}, grid);
  cplx a0 = linear_amplitude(p);
  for (size_t i = 0; i < grid.size(); ++i) {
    cplx expect = std::norm(a0) +
                  p.n_b * std::exp(cplx(-p.kappa / 2.0, -p.delta) * grid[i]);
    CHECK(std::abs(values[i] - expect) < 1e-9);
  }
}

TEST_CASE("two-time samples reduce to moments at zero delay") {
  ModelParams p = params_of(0.3, 0.1, cplx(0.2, 0.0), 0.25);
  auto state = steady_state(p, FockConfig{});
  auto occ = two_time(p, FockConfig{}, {LadderOp::Raise, LadderOp::Lower}, {},
                      {0.0});
  CHECK(std::abs(occ[0] - fock_moment(state, 1, 1)) < 1e-12);
  auto pair = two_time(p, FockConfig{}, {LadderOp::Raise, LadderOp::Lower},
                       {LadderOp::Raise, LadderOp::Lower}, {0.0});
  CHECK(std::abs(pair[0] - fock_moment(state, 2, 2)) < 1e-12);
}

TEST_CASE("oracle and diagrams agree on the reflection dip") {
  for (double delta : {0.3, -0.5}) {
    ModelParams p = params_of(delta, 0.1, cplx(0.2, 0.0), 0.0);
    double pert = reflection(p, SummationMode::bare(2)).r;
    double exact = oracle_reflection(p, FockConfig{});
    CHECK(std::abs(pert - exact) <= 0.02);
    CHECK(exact < 1.0);
  }
}

TEST_CASE("u = 0 output correlators are coherent") {
  ModelParams p = params_of(0.3, 0.0, cplx(0.2, 0.0), 0.0);
  auto g1v = oracle_g1(p, FockConfig{}, {0.0, 0.7, 2.5});
  for (cplx v : g1v) CHECK(std::abs(v - cplx(std::norm(p.f), 0.0)) < 1e-10);
  auto g2v = oracle_g2(p, FockConfig{}, {0.0, 0.7, 2.5});
  for (double v : g2v) CHECK(std::abs(v - 1.0) < 1e-10);
}

TEST_CASE("interacting g2 relaxes back to unity") {
  ModelParams p = params_of(0.3, 0.1, cplx(0.2, 0.0), 0.0);
  auto g2v = oracle_g2(p, FockConfig{}, {0.0, 40.0});
  CHECK(g2v[0] < 1.0);
  CHECK(std::abs(g2v[1] - 1.0) < 1e-6);
}

TEST_CASE("truncation pressure raises the truncation error") {
  // mean occupation ~ 3.2 cannot fit in four levels
  ModelParams p = params_of(0.0, 0.0, cplx(0.9, 0.0), 0.0);
  try {
    steady_state(p, FockConfig{4, 1e-6});
    FAIL("expected a truncation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Truncation);
    CHECK(std::string(e.what()).find("population") != std::string::npos);
  }
}

TEST_CASE("convergence margin is tiny in the studied regimes") {
  ModelParams p = params_of(0.3, 0.1, cplx(0.2, 0.0), 0.25);
  FockConfig cfg{};
  CHECK(truncation_margin(p, cfg) <= 1e-6);
  require_converged(p, cfg);  // must not throw
  try {
    require_converged(p, FockConfig{30, 1e-18});
    FAIL("expected a truncation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Truncation);
    CHECK(std::string(e.what()).find("drifted") != std::string::npos);
  }
}

TEST_CASE("oracle rejects invalid requests") {
  ModelParams p = params_of(0.3, 0.1, cplx(0.2, 0.0), 0.25);
  try {
    oracle_g1(p, FockConfig{}, {0.0, 1.0});
    FAIL("expected a capability error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Capability);
  }
  ModelParams quiet = params_of(0.3, 0.1, cplx(0.0, 0.0), 0.0);
  try {
    oracle_g2(quiet, FockConfig{}, {0.0});
    FAIL("expected an invalid-parameter error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidParameter);
  }
  ModelParams cold = params_of(0.3, 0.1, cplx(0.2, 0.0), 0.0);
  try {
    steady_state(cold, FockConfig{1, 1e-6});
    FAIL("expected an invalid-parameter error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidParameter);
  }
  try {
    two_time(cold, FockConfig{}, {LadderOp::Raise}, {LadderOp::Lower},
             {1.0, 0.5});
    FAIL("expected an invalid-parameter error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidParameter);
  }
}
