#include "cavcool/coefficient_oracle.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include "cavcool/fpe_coefficients.hpp"

namespace cavcool {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using namespace std::complex_literals;

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// vec(A rho) = (I kron A) vec(rho)
MatrixXcd left_mul(const MatrixXcd& a) {
  return kron(MatrixXcd::Identity(a.rows(), a.cols()), a);
}

// vec(rho B) = (B^T kron I) vec(rho)
MatrixXcd right_mul(const MatrixXcd& b) {
  return kron(b.transpose(), MatrixXcd::Identity(b.rows(), b.cols()));
}

// vec(A rho B) = (B^T kron A) vec(rho)
MatrixXcd sandwich(const MatrixXcd& a, const MatrixXcd& b) {
  return kron(b.transpose(), a);
}

VectorXcd vec(const MatrixXcd& m) {
  return Eigen::Map<const VectorXcd>(m.data(), m.size());
}

MatrixXcd unvec(const VectorXcd& v, int fock_dim) {
  return Eigen::Map<const MatrixXcd>(v.data(), fock_dim, fock_dim);
}

std::complex<double> trace_prod(const MatrixXcd& a, const MatrixXcd& b) {
  return (a * b).trace();
}

double real_checked(std::complex<double> z, double scale) {
  if (std::abs(z.imag()) > 1e-7 * (scale + std::abs(z.real())))
    throw std::runtime_error("coefficient_oracle: coefficient has non-negligible imaginary part");
  return z.real();
}

// Solves L z = y with Tr z = 0 for traceless y, deflating the known null pair:
// the right null vector vec(sigma_s) and the left null vector vec(I).
class TracelessSolver {
 public:
  TracelessSolver(const MatrixXcd& generator, const MatrixXcd& sigma)
      : generator_(generator), fock_dim_(static_cast<int>(sigma.rows())) {
    const VectorXcd id = vec(MatrixXcd::Identity(fock_dim_, fock_dim_));
    MatrixXcd deflated = generator + vec(sigma) * id.adjoint();
    lu_.compute(deflated);
  }

  MatrixXcd solve(const MatrixXcd& y) const {
    const VectorXcd yv = vec(y);
    const VectorXcd zv = lu_.solve(yv);
    const double ynorm = yv.norm();
    const double resid = (generator_ * zv - yv).norm();
    if (resid > 1e-8 * std::max(ynorm, 1e-300)) {
      std::ostringstream msg;
      msg << "coefficient_oracle: deflated solve residual " << resid / ynorm
          << " exceeds 1e-8 (rcond estimate " << lu_.rcond() << ")";
      throw std::runtime_error(msg.str());
    }
    return unvec(zv, fock_dim_);
  }

 private:
  MatrixXcd generator_;
  Eigen::FullPivLU<MatrixXcd> lu_;
  int fock_dim_;
};

}  // namespace

MatrixXcd annihilation_op(int fock_dim) {
  MatrixXcd a = MatrixXcd::Zero(fock_dim, fock_dim);
  for (int n = 1; n < fock_dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

TruncatedLiouvillian build_liouvillian(std::span<const double> x, const Params& params,
                                       int n_max, bool spontaneous) {
  if (n_max < 1) throw std::invalid_argument("build_liouvillian: n_max must be >= 1");
  TruncatedLiouvillian liou;
  liou.n_max = n_max;
  liou.fock_dim = n_max + 1;
  liou.dim = liou.fock_dim * liou.fock_dim;
  liou.spontaneous = spontaneous;
  liou.positions.assign(x.begin(), x.end());
  liou.params = params;

  double sum_cos = 0.0, sum_cos2 = 0.0;
  for (double xi : x) {
    const double c = std::cos(xi);
    sum_cos += c;
    sum_cos2 += c * c;
  }
  const double gamma_p = spontaneous ? params.drv.scatter_rate : 0.0;
  const double delta_eff = params.cavity.delta_c - params.drv.light_shift * sum_cos2;
  const double kappa_tot = params.cavity.kappa + 0.5 * gamma_p * sum_cos2;
  const double pump = params.drv.pump_amp * sum_cos;
  const double quad_pump = 0.5 * gamma_p * params.drv.pump_ratio * sum_cos;

  const MatrixXcd a = annihilation_op(liou.fock_dim);
  const MatrixXcd ad = a.adjoint();
  const MatrixXcd num = ad * a;
  const MatrixXcd q = a + ad;   // a + a^dag
  const MatrixXcd w = a - ad;   // a - a^dag

  // i delta_eff [n, .] - i pump [(a+a^dag), .] + quad_pump [(a-a^dag), .]
  //   + kappa_tot (2 a . a^dag - n . - . n)
  liou.generator =
      1i * delta_eff * (left_mul(num) - right_mul(num)) -
      1i * pump * (left_mul(q) - right_mul(q)) +
      quad_pump * (left_mul(w) - right_mul(w)) +
      kappa_tot * (2.0 * sandwich(a, ad) - left_mul(num) - right_mul(num));
  return liou;
}

MatrixXcd steady_state(const TruncatedLiouvillian& liou) {
  const int m = liou.fock_dim;
  const int d = liou.dim;
  const double gen_scale = std::max(1.0, liou.generator.cwiseAbs().maxCoeff());

  // one eigenvalue at zero, everything else strictly decaying
  Eigen::ComplexEigenSolver<MatrixXcd> es(liou.generator, false);
  int n_null = 0;
  for (int i = 0; i < d; ++i)
    if (std::abs(es.eigenvalues()[i]) < 1e-9 * gen_scale) ++n_null;
  if (n_null != 1)
    throw std::runtime_error("steady_state: null space of the Liouvillian is not one-dimensional");

  // least squares on [L0; trace-row] x = [0; 1]
  MatrixXcd sys(d + 1, d);
  sys.topRows(d) = liou.generator;
  VectorXcd trace_row = VectorXcd::Zero(d);
  for (int i = 0; i < m; ++i) trace_row[i * m + i] = 1.0;
  sys.row(d) = trace_row.adjoint();
  VectorXcd rhs = VectorXcd::Zero(d + 1);
  rhs[d] = 1.0;
  const VectorXcd sol = sys.colPivHouseholderQr().solve(rhs);

  const double resid = (liou.generator * sol).norm();
  if (resid > 1e-10 * gen_scale)
    throw std::runtime_error("steady_state: stationarity residual exceeds 1e-10");

  // Hermitize and project to a density matrix
  MatrixXcd sigma = unvec(sol, m);
  sigma = 0.5 * (sigma + sigma.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> h(sigma);
  if (h.eigenvalues().minCoeff() < -1e-10)
    throw std::runtime_error("steady_state: negative population beyond tolerance");
  const VectorXd clipped = h.eigenvalues().cwiseMax(0.0);
  sigma = h.eigenvectors() * clipped.asDiagonal() * h.eigenvectors().adjoint();
  sigma /= sigma.trace().real();
  return sigma;
}

MatrixXcd force_operator(const TruncatedLiouvillian& liou, int atom) {
  if (atom < 0 || atom >= static_cast<int>(liou.positions.size()))
    throw std::invalid_argument("force_operator: atom index out of range");
  const double xj = liou.positions[atom];
  const auto& drv = liou.params.drv;
  const MatrixXcd a = annihilation_op(liou.fock_dim);
  const MatrixXcd ad = a.adjoint();
  MatrixXcd f = drv.pump_amp * std::sin(xj) * (a + ad) +
                drv.light_shift * std::sin(2.0 * xj) * (ad * a);
  if (liou.spontaneous)
    f -= 1i * (0.5 * drv.scatter_rate * drv.pump_ratio * std::sin(xj)) * (ad - a);
  return f;
}

OracleCoefficients coefficient_integrals(const TruncatedLiouvillian& liou,
                                         const MatrixXcd& sigma) {
  const int n = static_cast<int>(liou.positions.size());
  const auto& drv = liou.params.drv;
  const double inv_mass = 2.0 * drv.recoil_freq;  // 1/m with hbar = k = 1

  std::vector<MatrixXcd> force(n);
  for (int j = 0; j < n; ++j) force[j] = force_operator(liou, j);

  OracleCoefficients out;
  out.drift.resize(n);
  out.friction.setZero(n, n);
  out.diffusion.setZero(n, n);
  out.cross.setZero(n, n);

  const double fscale = [&] {
    double s = 0.0;
    for (const auto& f : force) s = std::max(s, f.cwiseAbs().maxCoeff());
    return s;
  }();

  for (int j = 0; j < n; ++j)
    out.drift[j] = real_checked(trace_prod(sigma, force[j]), fscale);

  const TracelessSolver solver(liou.generator, sigma);

  for (int l = 0; l < n; ++l) {
    // friction kernel: tau-weighted integral of e^{L tau} [F_l, sigma]
    const MatrixXcd comm = force[l] * sigma - sigma * force[l];
    const MatrixXcd z_fric = solver.solve(solver.solve(comm));
    // diffusion kernel: (1/2){sigma, F_l}_+ - Phi_l sigma
    const MatrixXcd sym =
        0.5 * (sigma * force[l] + force[l] * sigma) - out.drift[l] * sigma;
    const MatrixXcd z_diff = solver.solve(sym);
    const MatrixXcd z_cross = solver.solve(z_diff);

    for (int j = 0; j < n; ++j) {
      out.friction(j, l) = real_checked(1i * inv_mass * trace_prod(force[j], z_fric), fscale);
      out.diffusion(j, l) = real_checked(-trace_prod(force[j], z_diff), fscale);
      out.cross(j, l) = real_checked(inv_mass * trace_prod(force[j], z_cross), fscale);
    }
  }

  if (liou.spontaneous && drv.scatter_rate > 0.0) {
    const MatrixXcd a = annihilation_op(liou.fock_dim);
    const MatrixXcd ad = a.adjoint();
    const MatrixXcd num = ad * a;
    const double half_gp = 0.5 * drv.scatter_rate;
    const double s_ratio = drv.pump_ratio;
    const double u2 = liou.params.atom.u2bar;

    // recoil-heating kernels shared by all column indices
    const MatrixXcd decay_kernel = num * sigma + sigma * num - 2.0 * (a * sigma * ad);
    const MatrixXcd z_decay2 = solver.solve(solver.solve(decay_kernel));
    const MatrixXcd comm_n = num * sigma - sigma * num;
    const MatrixXcd z_comm1 = solver.solve(comm_n);
    const MatrixXcd z_comm2 = solver.solve(z_comm1);

    const double n_mean = real_checked(trace_prod(sigma, num), 1.0);
    const double q_mean = real_checked(trace_prod(sigma, a + ad), 1.0);

    for (int l = 0; l < n; ++l) {
      const double sin2l = std::sin(2.0 * liou.positions[l]);
      for (int j = 0; j < n; ++j) {
        out.friction(j, l) +=
            half_gp * inv_mass * sin2l * real_checked(trace_prod(force[j], z_decay2), fscale);
        // rescattering of a cavity photon, kept here although it is dropped
        // from the low-field diffusion matrix
        out.diffusion(j, l) +=
            half_gp * sin2l * real_checked(0.5i * trace_prod(force[j], z_comm1), fscale);
        out.cross(j, l) += half_gp * (0.5 * inv_mass) * sin2l *
                           real_checked(-1i * trace_prod(force[j], z_comm2), fscale);
      }
      const double sl = std::sin(liou.positions[l]);
      const double cl = std::cos(liou.positions[l]);
      out.diffusion(l, l) += half_gp * (n_mean * (sl * sl + u2 * cl * cl) +
                                        s_ratio * u2 * (q_mean * cl + s_ratio));
    }
  }
  // only the symmetric part of the diffusion integral enters the dynamics
  out.diffusion = (0.5 * (out.diffusion + out.diffusion.transpose())).eval();
  return out;
}

OracleCoefficients oracle_coefficients(std::span<const double> x, const Params& params,
                                       int n_max, bool spontaneous) {
  const auto liou = build_liouvillian(x, params, n_max, spontaneous);
  const auto sigma = steady_state(liou);
  return coefficient_integrals(liou, sigma);
}

FieldExpectations field_expectations(const MatrixXcd& sigma) {
  const int m = static_cast<int>(sigma.rows());
  const MatrixXcd a = annihilation_op(m);
  FieldExpectations fe;
  fe.a_mean = (sigma * a).trace();
  fe.n_mean = (sigma * (a.adjoint() * a)).trace().real();
  return fe;
}

namespace {

double family_shift(const MatrixXd& coarse, const MatrixXd& fine) {
  const double scale = std::max(fine.cwiseAbs().maxCoeff(), 1e-300);
  return (coarse - fine).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

double oracle_convergence_shift(std::span<const double> x, const Params& params,
                                int n_max, bool spontaneous) {
  const auto coarse = oracle_coefficients(x, params, n_max, spontaneous);
  const auto fine = oracle_coefficients(x, params, n_max + 1, spontaneous);
  double shift = family_shift(coarse.drift, fine.drift);
  shift = std::max(shift, family_shift(coarse.friction, fine.friction));
  shift = std::max(shift, family_shift(coarse.diffusion, fine.diffusion));
  shift = std::max(shift, family_shift(coarse.cross, fine.cross));
  return shift;
}

namespace {

double family_deviation(const MatrixXd& oracle, const MatrixXd& analytic) {
  double scale = analytic.cwiseAbs().maxCoeff();
  if (scale == 0.0) scale = oracle.cwiseAbs().maxCoeff();
  if (scale < 1e-300) return 0.0;
  return (oracle - analytic).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

double oracle_vs_analytic_deviation(std::span<const double> x, const Params& params,
                                    int n_max, bool spontaneous) {
  const auto orc = oracle_coefficients(x, params, n_max, spontaneous);
  const auto ana = low_field_coefficients(x, params, spontaneous);
  double dev = family_deviation(orc.drift, ana.drift);
  dev = std::max(dev, family_deviation(orc.friction, ana.friction));
  dev = std::max(dev, family_deviation(orc.diffusion, ana.diffusion));
  dev = std::max(dev, family_deviation(orc.cross, ana.cross));
  return dev;
}

}  // namespace cavcool
