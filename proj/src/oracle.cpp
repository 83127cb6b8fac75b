#include "kerrio/oracle.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdio>
#include <string>

namespace kerrio {
namespace {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RowMat =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_config(const FockConfig& cfg) {
  if (cfg.n_max < 2) {
    throw Error(ErrorKind::InvalidParameter,
                "Fock truncation needs at least two levels");
  }
  if (!(cfg.convergence_margin > 0.0)) {
    throw Error(ErrorKind::InvalidParameter,
                "convergence margin must be positive");
  }
}

void check_tau_grid(const std::vector<double>& grid) {
  if (grid.empty()) {
    throw Error(ErrorKind::InvalidParameter, "tau grid must not be empty");
  }
  if (grid.front() < 0.0) {
    throw Error(ErrorKind::InvalidParameter, "tau grid must be non-negative");
  }
  for (size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw Error(ErrorKind::InvalidParameter,
                  "tau grid must be strictly increasing");
    }
  }
}

Mat lowering(int dim) {
  Mat a = Mat::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

Mat hamiltonian(const ModelParams& p, int dim) {
  Mat h = Mat::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    h(n, n) = -p.delta * n + p.u * double(n) * double(n - 1);
  }
  const Mat a = lowering(dim);
  const cplx g = cplx(0.0, -1.0) * std::sqrt(p.kappa) * p.f;
  h += g * a.adjoint() + std::conj(g) * a;
  return h;
}

Mat kron(const Mat& x, const Mat& y) {
  Mat out(x.rows() * y.rows(), x.cols() * y.cols());
  for (int i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return out;
}

// Vectorization is column-major, vec(A X B) = (B^T kron A) vec(X).
Mat liouvillian(const ModelParams& p, int dim) {
  const Mat a = lowering(dim);
  const Mat ad = a.adjoint();
  const Mat id = Mat::Identity(dim, dim);
  const Mat h = hamiltonian(p, dim);
  Mat l = cplx(0.0, -1.0) * (kron(id, h) - kron(h.transpose(), id));
  const Mat nd = ad * a;
  const Mat nu = a * ad;
  const double down = p.kappa * (p.n_b + 1.0);
  const double up = p.kappa * p.n_b;
  l += down * (kron(a, a) -
               0.5 * (kron(id, nd) + kron(nd.transpose(), id)));
  if (up != 0.0) {
    l += up * (kron(ad, ad) -
               0.5 * (kron(id, nu) + kron(nu.transpose(), id)));
  }
  return l;
}

Vec thermal_start(const ModelParams& p, int dim) {
  Vec x = Vec::Zero(dim * dim);
  const double q = p.n_b / (p.n_b + 1.0);
  double w = 1.0, tot = 0.0;
  for (int n = 0; n < dim; ++n) {
    x(n * dim + n) = w;
    tot += w;
    w *= q;
  }
  return x / tot;
}

// Null vector of the vectorized Liouvillian: shifted inverse iteration with
// a prebuilt factorization, explicit time integration as the fallback.
Mat solve_steady(const Mat& l, const ModelParams& p, int dim) {
  const int n2 = dim * dim;
  const double lnorm = l.cwiseAbs().rowwise().sum().maxCoeff();
  Vec x = thermal_start(p, dim);
  bool ok = false;
  {
    const double shift = 1e-8 * p.kappa;
    Eigen::PartialPivLU<Mat> lu(l - shift * Mat::Identity(n2, n2));
    for (int it = 0; it < 40 && !ok; ++it) {
      x = lu.solve(x);
      x /= x.lpNorm<Eigen::Infinity>();
      ok = (l * x).lpNorm<Eigen::Infinity>() <= 1e-13 * lnorm;
    }
  }
  if (!ok) {
    x = thermal_start(p, dim);
    const double dt = 1.0 / lnorm;
    const long steps = long(50.0 / (p.kappa * dt)) + 1;
    for (long s = 0; s < steps; ++s) {
      Vec k1 = l * x;
      Vec k2 = l * (x + 0.5 * dt * k1);
      Vec k3 = l * (x + 0.5 * dt * k2);
      Vec k4 = l * (x + dt * k3);
      x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    ok = (l * x).lpNorm<Eigen::Infinity>() <=
         1e-10 * lnorm * x.lpNorm<Eigen::Infinity>();
    if (!ok) {
      throw Error(ErrorKind::Accuracy,
                  "Lindblad steady-state solve did not converge");
    }
  }
  Mat rho = Eigen::Map<Mat>(x.data(), dim, dim);
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-14) {
    throw Error(ErrorKind::Accuracy,
                "Lindblad steady-state solve returned a traceless matrix");
  }
  rho /= tr;
  rho = 0.5 * (rho + rho.adjoint()).eval();

  const double edge = rho(dim - 1, dim - 1).real();
  if (!(edge <= 1e-10)) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "Fock truncation too small: population %.3e at the last "
                  "kept level (n = %d)",
                  edge, dim - 1);
    throw Error(ErrorKind::Truncation, buf);
  }
  return rho;
}

SteadyState pack_state(const Mat& rho) {
  SteadyState out;
  out.dim = int(rho.rows());
  out.rho.resize(size_t(out.dim) * out.dim);
  Eigen::Map<RowMat>(out.rho.data(), out.dim, out.dim) = rho;
  out.trace_error = std::abs(rho.trace() - cplx(1.0, 0.0));
  return out;
}

// Samples Tr[left exp(L tau) init] on the grid. The exponential is computed
// per distinct grid gap and reused, so uniform grids cost one of them.
std::vector<cplx> propagate(const Mat& l, const Mat& left, const Mat& init,
                            const std::vector<double>& grid) {
  const int n2 = int(init.size());
  Vec x = Eigen::Map<const Vec>(init.data(), n2);
  const Mat leftt = left.transpose();
  const Eigen::Map<const Vec> w(leftt.data(), n2);
  std::vector<cplx> out;
  out.reserve(grid.size());
  Mat step;
  double cached_gap = -1.0;
  double at = 0.0;
  for (double tau : grid) {
    const double gap = tau - at;
    if (gap > 0.0) {
      if (gap != cached_gap) {
        step = (l * gap).exp();
        cached_gap = gap;
      }
      x = step * x;
      at = tau;
    }
    out.push_back((w.array() * x.array()).sum());
  }
  return out;
}

Mat op_string(const std::vector<LadderOp>& ops, int dim) {
  Mat out = Mat::Identity(dim, dim);
  const Mat a = lowering(dim);
  const Mat ad = a.adjoint();
  for (LadderOp op : ops) out = out * (op == LadderOp::Raise ? ad : a);
  return out;
}

Mat output_op(const ModelParams& p, int dim) {
  return p.f * Mat::Identity(dim, dim) + std::sqrt(p.kappa) * lowering(dim);
}

void require_coherent_input(const ModelParams& p) {
  if (p.n_b != 0.0) {
    throw Error(ErrorKind::Capability,
                "multi-operator output correlators have an oracle only for "
                "coherent input (n_b = 0)");
  }
}

struct Moments {
  cplx mean;
  cplx occupation;
  cplx pair;
};

Moments cavity_moments(const ModelParams& p, int dim) {
  const Mat l = liouvillian(p, dim);
  const Mat rho = solve_steady(l, p, dim);
  const Mat a = lowering(dim);
  const Mat ad = a.adjoint();
  Moments m;
  m.mean = (a * rho).trace();
  m.occupation = (ad * a * rho).trace();
  m.pair = (ad * ad * a * a * rho).trace();
  return m;
}

}  // namespace

SteadyState steady_state(const ModelParams& params, const FockConfig& cfg) {
  params.check();
  check_config(cfg);
  const Mat l = liouvillian(params, cfg.n_max);
  return pack_state(solve_steady(l, params, cfg.n_max));
}

cplx fock_moment(const SteadyState& state, int raise_pow, int lower_pow) {
  if (raise_pow < 0 || lower_pow < 0) {
    throw Error(ErrorKind::InvalidParameter,
                "ladder powers must be non-negative");
  }
  const Eigen::Map<const RowMat> rho(state.rho.data(), state.dim, state.dim);
  const Mat a = lowering(state.dim);
  Mat op = Mat::Identity(state.dim, state.dim);
  for (int i = 0; i < raise_pow; ++i) op = op * a.adjoint();
  for (int i = 0; i < lower_pow; ++i) op = op * a;
  return (op * rho).trace();
}

std::vector<cplx> two_time(const ModelParams& params, const FockConfig& cfg,
                           const std::vector<LadderOp>& at_tau,
                           const std::vector<LadderOp>& at_zero,
                           const std::vector<double>& tau_grid) {
  params.check();
  check_config(cfg);
  check_tau_grid(tau_grid);
  const int dim = cfg.n_max;
  const Mat l = liouvillian(params, dim);
  const Mat rho = solve_steady(l, params, dim);
  const Mat sample = op_string(at_tau, dim);
  std::vector<LadderOp> lowers, raisers;
  for (LadderOp op : at_zero) {
    (op == LadderOp::Raise ? raisers : lowers).push_back(op);
  }
  const Mat init = op_string(lowers, dim) * rho * op_string(raisers, dim);
  return propagate(l, sample, init, tau_grid);
}

cplx oracle_mean_output(const ModelParams& params, const FockConfig& cfg) {
  const SteadyState state = steady_state(params, cfg);
  return params.f + std::sqrt(params.kappa) * fock_moment(state, 0, 1);
}

double oracle_reflection(const ModelParams& params, const FockConfig& cfg) {
  if (params.f == cplx(0.0, 0.0)) {
    throw Error(ErrorKind::InvalidParameter,
                "reflection is undefined for f = 0");
  }
  return std::norm(oracle_mean_output(params, cfg) / params.f);
}

std::vector<cplx> oracle_g1(const ModelParams& params, const FockConfig& cfg,
                            const std::vector<double>& tau_grid) {
  params.check();
  check_config(cfg);
  check_tau_grid(tau_grid);
  require_coherent_input(params);
  const int dim = cfg.n_max;
  const Mat l = liouvillian(params, dim);
  const Mat rho = solve_steady(l, params, dim);
  const Mat b = output_op(params, dim);
  return propagate(l, b.adjoint(), b * rho, tau_grid);
}

std::vector<double> oracle_g2(const ModelParams& params, const FockConfig& cfg,
                              const std::vector<double>& tau_grid) {
  params.check();
  check_config(cfg);
  check_tau_grid(tau_grid);
  require_coherent_input(params);
  if (params.f == cplx(0.0, 0.0)) {
    throw Error(ErrorKind::InvalidParameter,
                "g2 normalization is undefined for f = 0");
  }
  const int dim = cfg.n_max;
  const Mat l = liouvillian(params, dim);
  const Mat rho = solve_steady(l, params, dim);
  const Mat b = output_op(params, dim);
  const Mat bdb = b.adjoint() * b;
  const double flux = (bdb * rho).trace().real();
  const auto raw = propagate(l, bdb, b * rho * b.adjoint(), tau_grid);
  std::vector<double> out;
  out.reserve(raw.size());
  for (cplx v : raw) out.push_back(v.real() / (flux * flux));
  return out;
}

double truncation_margin(const ModelParams& params, const FockConfig& cfg) {
  params.check();
  check_config(cfg);
  const Moments base = cavity_moments(params, cfg.n_max);
  const Moments deep = cavity_moments(params, cfg.n_max + 5);
  auto drift = [](cplx a, cplx b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-12);
  };
  double worst = drift(base.mean, deep.mean);
  worst = std::max(worst, drift(base.occupation, deep.occupation));
  worst = std::max(worst, drift(base.pair, deep.pair));
  return worst;
}

void require_converged(const ModelParams& params, const FockConfig& cfg) {
  params.check();
  check_config(cfg);
  const Moments base = cavity_moments(params, cfg.n_max);
  const Moments deep = cavity_moments(params, cfg.n_max + 5);
  const char* names[] = {"<a>", "<a+a>", "<a+a+aa>"};
  const cplx pairs[][2] = {{base.mean, deep.mean},
                           {base.occupation, deep.occupation},
                           {base.pair, deep.pair}};
  for (int i = 0; i < 3; ++i) {
    const double drift = std::abs(pairs[i][0] - pairs[i][1]) /
                         std::max(std::abs(pairs[i][1]), 1e-12);
    if (drift > cfg.convergence_margin) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "truncation not converged: %s drifted %.3e (margin %.3e) "
                    "under n_max %d -> %d",
                    names[i], drift, cfg.convergence_margin, cfg.n_max,
                    cfg.n_max + 5);
      throw Error(ErrorKind::Truncation, buf);
    }
  }
}

}  // namespace kerrio
