#include "qgauge/sum_rules.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "internal/trace_kernels.hpp"

namespace qgauge {

using internal::abs_product_diagonal;
using internal::accumulate_commutator_mean;
using internal::accumulate_pairing;
using internal::force_from_eigenvalues;
using internal::product_diagonal;
using internal::ratio_or_inf;
using internal::to_eig;
using internal::weighted_sum;

namespace {

void require_one_per_sector(const ThermalState& st, std::size_t n,
                            const char* who) {
  if (st.sectors.size() != n) {
    throw std::invalid_argument(std::string(who) +
                                ": one observable per sector is required");
  }
}

}  // namespace

double SumRuleReport::worst_ratio() const {
  double worst = 0.0;
  for (const auto& row : rows) {
    worst = std::max(worst, ratio_or_inf(row.residual, row.scale));
  }
  return worst;
}

const std::vector<double>& shared_eval_points(const ThermalState& st) {
  if (st.sectors.empty()) {
    throw std::invalid_argument("shared_eval_points: state has no sectors");
  }
  const std::vector<double>& first = st.sectors[0].system->eval_points();
  for (const auto& s : st.sectors) {
    if (s.system->eval_points() != first) {
      throw std::invalid_argument(
          "shared_eval_points: sectors disagree on the evaluation grid");
    }
  }
  return first;
}

std::vector<double> strided_points(const std::vector<double>& pts,
                                   std::size_t stride) {
  if (stride == 0) {
    throw std::invalid_argument("strided_points: stride must be positive");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < pts.size(); i += stride) {
    out.push_back(pts[i]);
  }
  return out;
}

SumRuleReport check_force_balance(const ThermalState& st,
                                  const std::vector<double>& rs) {
  SumRuleReport rep{"force_balance", RuleClass::exact_identity, st.beta, {}};
  const std::vector<double>& pts = rs.empty() ? shared_eval_points(st) : rs;

  struct Cache {
    Matrix kin, inter, ext;
    double part_max = 0.0, w_max = 0.0;
  };
  std::vector<Cache> caches;
  for (const auto& s : st.sectors) {
    Cache c{to_eig(s, s.system->kinetic()),
            to_eig(s, s.system->interparticle()),
            to_eig(s, s.system->external())};
    c.part_max = std::max(
        {internal::max_abs(c.kin), internal::max_abs(c.inter),
         internal::max_abs(c.ext)});
    c.w_max = s.weights.maxCoeff();
    caches.push_back(std::move(c));
  }

  for (const double r : pts) {
    Complex mean[3] = {0.0, 0.0, 0.0};
    double tv[3] = {0.0, 0.0, 0.0};
    double floor = 0.0;
    for (std::size_t i = 0; i < st.sectors.size(); ++i) {
      const auto& s = st.sectors[i];
      const double hbar = s.system->basis().constants.hbar;
      const Matrix jt = to_eig(s, s.system->current_operator(r));
      accumulate_commutator_mean(hbar, 1.0, s.weights, caches[i].kin, jt,
                                 mean[0], tv[0]);
      accumulate_commutator_mean(hbar, 1.0, s.weights, caches[i].inter, jt,
                                 mean[1], tv[1]);
      accumulate_commutator_mean(hbar, 1.0, s.weights, caches[i].ext, jt,
                                 mean[2], tv[2]);
      floor = std::max(floor, caches[i].w_max * caches[i].part_max *
                                  internal::max_abs(jt) / hbar);
    }
    double scale = floor / st.z_shifted;
    Complex total = 0.0;
    for (int p = 0; p < 3; ++p) {
      mean[p] /= st.z_shifted;
      tv[p] /= st.z_shifted;
      total += mean[p];
      scale = std::max({scale, std::abs(mean[p]), tv[p]});
    }
    SumRuleRow row;
    row.r = r;
    row.residual = std::abs(total);
    row.scale = scale;
    row.extras = {{"force_kinetic", mean[0].real()},
                  {"force_interparticle", mean[1].real()},
                  {"force_external", mean[2].real()}};
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

SumRuleReport check_hyperforce(const ThermalState& st,
                               const std::vector<OperatorMatrix>& a,
                               const std::string& label,
                               const std::vector<double>& rs) {
  require_one_per_sector(st, a.size(), "check_hyperforce");
  SumRuleReport rep{"hyperforce[" + label + "]", RuleClass::exact_identity,
                    st.beta, {}};
  const std::vector<double>& pts = rs.empty() ? shared_eval_points(st) : rs;

  std::vector<Matrix> at;
  std::vector<double> at_max;
  Complex mean_a = 0.0;
  for (std::size_t i = 0; i < st.sectors.size(); ++i) {
    at.push_back(to_eig(st.sectors[i], a[i]));
    at_max.push_back(internal::max_abs(at.back()));
    for (Index n = 0; n < at.back().rows(); ++n) {
      mean_a += st.sectors[i].weights(n) * at.back()(n, n);
    }
  }
  mean_a /= st.z_shifted;

  for (const double r : pts) {
    Complex mean = 0.0, pairing = 0.0, force_mean = 0.0;
    double tv_mean = 0.0, tv_pairing = 0.0;
    double floor = 0.0;
    for (std::size_t i = 0; i < st.sectors.size(); ++i) {
      const auto& s = st.sectors[i];
      const double hbar = s.system->basis().constants.hbar;
      const Matrix jt = to_eig(s, s.system->current_operator(r));
      accumulate_commutator_mean(hbar, -1.0, s.weights, at[i], jt, mean,
                                 tv_mean);
      const Matrix ft = force_from_eigenvalues(hbar, s.dec.eigenvalues, jt);
      accumulate_pairing(st, s, at[i], ft, pairing, tv_pairing);
      for (Index n = 0; n < ft.rows(); ++n) {
        force_mean += s.weights(n) * ft(n, n);
      }
      const double wmax = s.weights.maxCoeff();
      floor = std::max(
          {floor, wmax * at_max[i] * internal::max_abs(jt) / hbar,
           internal::pair_weight_bound(st, s) * at_max[i] *
               internal::max_abs(ft)});
    }
    mean /= st.z_shifted;
    tv_mean /= st.z_shifted;
    pairing /= st.z_shifted;
    tv_pairing /= st.z_shifted;
    force_mean /= st.z_shifted;

    // Covariance form: cov(A | beta F_0) differs from the pairing by
    // <A^dagger><beta F_0>, which force balance sends to zero.
    const Complex pairing_cov =
        pairing - std::conj(mean_a) * (st.beta * force_mean);

    SumRuleRow row;
    row.r = r;
    row.residual = std::abs(std::conj(mean) + pairing);
    row.scale = std::max({std::abs(mean), tv_mean, std::abs(pairing),
                          tv_pairing, floor / st.z_shifted});
    row.extras = {{"shift_mean", mean.real()},
                  {"pairing", pairing.real()},
                  {"shift_mean_imag", mean.imag()},
                  {"residual_covariance_form",
                   std::abs(std::conj(mean) + pairing_cov)}};
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

SumRuleReport check_product_rule(const ThermalState& st,
                                 const std::vector<OperatorMatrix>& a,
                                 const std::vector<OperatorMatrix>& b,
                                 const std::string& label,
                                 const std::vector<double>& rs) {
  require_one_per_sector(st, a.size(), "check_product_rule");
  require_one_per_sector(st, b.size(), "check_product_rule");
  SumRuleReport rep{"product_rule[" + label + "]", RuleClass::exact_identity,
                    st.beta, {}};
  const std::vector<double>& pts = rs.empty() ? shared_eval_points(st) : rs;

  struct Cache {
    Matrix at, bt, pt;
    double at_max = 0.0, bt_max = 0.0, pt_max = 0.0;
  };
  std::vector<Cache> caches;
  for (std::size_t i = 0; i < st.sectors.size(); ++i) {
    Matrix at = to_eig(st.sectors[i], a[i]);
    Matrix bt = to_eig(st.sectors[i], b[i]);
    Matrix pt = at * bt;
    Cache c{std::move(at), std::move(bt), std::move(pt)};
    c.at_max = internal::max_abs(c.at);
    c.bt_max = internal::max_abs(c.bt);
    c.pt_max = internal::max_abs(c.pt);
    caches.push_back(std::move(c));
  }

  for (const double r : pts) {
    Complex mean_sab = 0.0, mean_asb = 0.0, pairing = 0.0;
    double tv_sab = 0.0, tv_asb = 0.0, tv_pairing = 0.0;
    double leibniz = 0.0, leibniz_scale = 0.0;
    double floor = 0.0;
    for (std::size_t i = 0; i < st.sectors.size(); ++i) {
      const auto& s = st.sectors[i];
      const double hbar = s.system->basis().constants.hbar;
      const Matrix jt = to_eig(s, s.system->current_operator(r));
      const Complex unit(0.0, -1.0 / hbar);
      const Matrix sa = unit * (caches[i].at * jt - jt * caches[i].at);
      const Matrix sb = unit * (caches[i].bt * jt - jt * caches[i].bt);
      const Matrix sp = unit * (caches[i].pt * jt - jt * caches[i].pt);

      // Leibniz identity at the operator level.
      const Matrix leib = sp - sa * caches[i].bt - caches[i].at * sb;
      leibniz = std::max(leibniz, leib.cwiseAbs().maxCoeff());
      leibniz_scale =
          std::max(leibniz_scale, sp.cwiseAbs().maxCoeff());

      mean_sab += weighted_sum(s.weights, product_diagonal(sa, caches[i].bt));
      tv_sab +=
          weighted_sum(s.weights, abs_product_diagonal(sa, caches[i].bt));
      mean_asb += weighted_sum(s.weights, product_diagonal(caches[i].at, sb));
      tv_asb +=
          weighted_sum(s.weights, abs_product_diagonal(caches[i].at, sb));

      const Matrix ft = force_from_eigenvalues(hbar, s.dec.eigenvalues, jt);
      accumulate_pairing(st, s, caches[i].pt, ft, pairing, tv_pairing);

      const double wmax = s.weights.maxCoeff();
      floor = std::max(
          {floor, wmax * internal::max_abs(sa) * caches[i].bt_max,
           wmax * caches[i].at_max * internal::max_abs(sb),
           internal::pair_weight_bound(st, s) * caches[i].pt_max *
               internal::max_abs(ft)});
    }
    mean_sab /= st.z_shifted;
    mean_asb /= st.z_shifted;
    pairing /= st.z_shifted;
    tv_sab /= st.z_shifted;
    tv_asb /= st.z_shifted;
    tv_pairing /= st.z_shifted;

    SumRuleRow row;
    row.r = r;
    row.residual = std::abs(std::conj(mean_sab + mean_asb) + pairing);
    row.scale = std::max({std::abs(mean_sab), tv_sab, std::abs(mean_asb),
                          tv_asb, std::abs(pairing), tv_pairing,
                          floor / st.z_shifted});
    row.extras = {{"shift_a_b", mean_sab.real()},
                  {"a_shift_b", mean_asb.real()},
                  {"pairing", pairing.real()},
                  {"leibniz_defect",
                   leibniz / std::max(1.0, leibniz_scale)}};
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

SumRuleReport check_3g(const ThermalState& st, const std::vector<double>& rs,
                       const std::vector<double>& rs2) {
  SumRuleReport rep{"force_force_correlation", RuleClass::exact_identity,
                    st.beta, {}};
  const std::vector<double>& pts = rs.empty() ? shared_eval_points(st) : rs;
  const std::vector<double>& pts2 = rs2.empty() ? pts : rs2;

  // Kernel-route force matrices per sector per first coordinate.
  struct PerR {
    std::vector<Matrix> ft;  // one per sector
  };
  std::vector<PerR> kernel_forces(pts.size());
  for (std::size_t ri = 0; ri < pts.size(); ++ri) {
    for (const auto& s : st.sectors) {
      const double hbar = s.system->basis().constants.hbar;
      const Matrix jt = to_eig(s, s.system->current_operator(pts[ri]));
      kernel_forces[ri].ft.push_back(
          force_from_eigenvalues(hbar, s.dec.eigenvalues, jt));
    }
  }

  for (const double r2 : pts2) {
    // Site-basis route: F(r2) from the literal Hamiltonian commutator,
    // kept in the site basis for the second shifting action.
    std::vector<Matrix> f_site;
    std::vector<Matrix> f2_eig;
    for (const auto& s : st.sectors) {
      const double hbar = s.system->basis().constants.hbar;
      const Matrix& h = s.system->hamiltonian().entries;
      const Matrix& j2 = s.system->current_operator(r2).entries;
      f_site.push_back(Complex(0.0, 1.0 / hbar) * (h * j2 - j2 * h));
      const Matrix jt2 = to_eig(s, s.system->current_operator(r2));
      f2_eig.push_back(force_from_eigenvalues(hbar, s.dec.eigenvalues, jt2));
    }

    for (std::size_t ri = 0; ri < pts.size(); ++ri) {
      const double r = pts[ri];
      Complex pairing = 0.0, mean_k = 0.0;
      double tv_pairing = 0.0, tv_k = 0.0;
      double floor = 0.0;
      for (std::size_t i = 0; i < st.sectors.size(); ++i) {
        const auto& s = st.sectors[i];
        const double hbar = s.system->basis().constants.hbar;
        accumulate_pairing(st, s, kernel_forces[ri].ft[i], f2_eig[i], pairing,
                           tv_pairing);
        const Matrix& j1 = s.system->current_operator(r).entries;
        const Matrix k_site = Complex(0.0, -1.0 / hbar) *
                              (f_site[i] * j1 - j1 * f_site[i]);
        const Matrix kt =
            s.dec.eigenvectors.adjoint() * k_site * s.dec.eigenvectors;
        for (Index n = 0; n < kt.rows(); ++n) {
          mean_k += s.weights(n) * kt(n, n);
          tv_k += s.weights(n) * std::abs(kt(n, n));
        }
        floor = std::max(
            {floor,
             internal::pair_weight_bound(st, s) *
                 internal::max_abs(kernel_forces[ri].ft[i]) *
                 internal::max_abs(f2_eig[i]),
             s.weights.maxCoeff() * internal::max_abs(kt)});
      }
      // (beta F | beta F') = beta * pairing / z; <K> carries one beta.
      const Complex lhs = st.beta * pairing / st.z_shifted;
      const Complex rhs = st.beta * mean_k / st.z_shifted;
      const double tv_l = st.beta * tv_pairing / st.z_shifted;
      const double tv_r = st.beta * tv_k / st.z_shifted;

      SumRuleRow row;
      row.r = r;
      row.r2 = r2;
      row.residual = std::abs(lhs + rhs);
      row.scale = std::max({std::abs(lhs), tv_l, std::abs(rhs), tv_r,
                            st.beta * floor / st.z_shifted});
      row.extras = {{"pairing", lhs.real()}, {"shift_of_force", rhs.real()}};
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

}  // namespace qgauge
