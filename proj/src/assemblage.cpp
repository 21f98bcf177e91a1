#include "hybridsteer/assemblage.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "hybridsteer/homodyne.hpp"

namespace hst {

Eigen::MatrixXcd Assemblage::unconditioned(int theta_index) const {
  return members.at(theta_index)[0] + members.at(theta_index)[1];
}

double Assemblage::signaling_deviation() const {
  double worst = 0.0;
  for (int i = 0; i < n_phases(); ++i)
    for (int j = i + 1; j < n_phases(); ++j) {
      Eigen::MatrixXcd d = unconditioned(i) - unconditioned(j);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d, Eigen::EigenvaluesOnly);
      worst = std::max(worst, 0.5 * es.eigenvalues().cwiseAbs().sum());
    }
  return worst;
}

void Assemblage::check_valid(double psd_floor, double trace_tol) const {
  require(!members.empty() && members.size() == phases.size(), Errc::dimension_mismatch,
          "assemblage: phases and members disagree");
  for (int t = 0; t < n_phases(); ++t) {
    double tr = 0.0;
    for (int s = 0; s < 2; ++s) {
      const Eigen::MatrixXcd& m = members[t][s];
      require(m.rows() == dim() && m.cols() == dim(), Errc::dimension_mismatch,
              "assemblage: inconsistent member dimensions");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
      require(es.eigenvalues().minCoeff() >= psd_floor, Errc::invalid_argument,
              "assemblage: member not PSD");
      tr += m.trace().real();
    }
    require(std::abs(tr - 1.0) <= trace_tol, Errc::invalid_argument,
            "assemblage: conditional traces do not sum to 1");
  }
}

Assemblage compute_assemblage(const DensityMatrix& rho_ab, const std::vector<double>& phases,
                              double phase_noise_sigma) {
  require(rho_ab.n_modes() == 2, Errc::dimension_mismatch, "compute_assemblage: two-mode state");
  require(!phases.empty(), Errc::invalid_argument, "compute_assemblage: empty phase list");
  for (size_t i = 0; i < phases.size(); ++i)
    for (size_t j = i + 1; j < phases.size(); ++j) {
      double d = std::fmod(std::abs(phases[i] - phases[j]), kPi);
      require(std::min(d, kPi - d) > 1e-9, Errc::invalid_argument,
              "compute_assemblage: phases must be distinct modulo pi");
    }

  int da = rho_ab.mode_dims[0], db = rho_ab.mode_dims[1];
  Assemblage out;
  out.phases = phases;
  out.members.resize(phases.size());
  for (size_t t = 0; t < phases.size(); ++t) {
    for (int sign : {+1, -1}) {
      BinnedPovmElement povm =
          halfline_povm_smeared(phases[t], sign, da - 1, phase_noise_sigma);
      // sigma = Tr_A[(M x 1) rho]: sigma_{kl} = sum_{mn} M_{nm} rho_{(m,k),(n,l)}
      Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(db, db);
      for (int m = 0; m < da; ++m)
        for (int n = 0; n < da; ++n) {
          cxd w = povm.op(n, m);
          if (w != cxd(0, 0)) sigma += w * rho_ab.mat.block(m * db, n * db, db, db);
        }
      out.member(int(t), sign) = 0.5 * (sigma + sigma.adjoint().eval());
    }
  }
  return out;
}

Assemblage ideal_assemblage(double R, cxd alpha, const std::vector<double>& phases, int n_max) {
  require(R >= 0.0 && R <= 1.0, Errc::invalid_argument, "ideal_assemblage: R in [0,1]");
  StateVector plus = cat_state(alpha, +1, n_max);
  StateVector minus = (R > 0.0 || std::abs(alpha) >= 1e-6)
                          ? cat_state(alpha, -1, n_max)
                          : fock_basis_state(1, n_max);
  Eigen::MatrixXcd pp = plus.amps * plus.amps.adjoint();
  Eigen::MatrixXcd mm = minus.amps * minus.amps.adjoint();
  Eigen::MatrixXcd mp = minus.amps * plus.amps.adjoint();
  double cross = std::sqrt(2.0 * R * (1.0 - R) / kPi);

  Assemblage out;
  out.phases = phases;
  out.members.resize(phases.size());
  for (size_t t = 0; t < phases.size(); ++t) {
    cxd ph = std::polar(1.0, phases[t]);
    for (int sign : {+1, -1}) {
      Eigen::MatrixXcd cr = (ph * mp);
      cr += cr.adjoint().eval();
      out.member(int(t), sign) =
          0.5 * (R * mm + (1.0 - R) * pp) - sign * 0.5 * cross * cr;
    }
  }
  return out;
}

NonsignalingReport nonsignaling_report(const Assemblage& assemblage) {
  int m = assemblage.n_phases();
  require(m >= 2, Errc::invalid_argument, "nonsignaling_report: need >= 2 phases");
  std::vector<DensityMatrix> states(m);
  for (int t = 0; t < m; ++t) {
    Eigen::MatrixXcd u = assemblage.unconditioned(t);
    states[t].mat = u / u.trace().real();
    states[t].mode_dims = {assemblage.dim()};
  }
  NonsignalingReport rep;
  rep.fidelities = Eigen::MatrixXd::Ones(m, m);
  double acc = 0.0;
  int pairs = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      double f = fidelity(states[i], states[j]);
      rep.fidelities(i, j) = rep.fidelities(j, i) = f;
      acc += f;
      ++pairs;
    }
  rep.mean = pairs ? acc / pairs : 1.0;
  return rep;
}

}  // namespace hst
