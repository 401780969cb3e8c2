#include "mrc/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mrc/errors.hpp"

namespace mrc {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidParameter(std::string(name) + " must be positive and finite, got " +
                           std::to_string(v));
  }
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidParameter(std::string(name) + " must be non-negative, got " +
                           std::to_string(v));
  }
}

}  // namespace

void SlaveParams::validate() const {
  require_positive(e_s, "e_s");
  require_positive(p_s, "p_s");
  require_positive(C, "C");
  require_positive(U, "U");
  require_positive(p_cmp, "p_cmp");
  require_nonnegative(p_c, "p_c");
  require_positive(B, "B");
  require_positive(N, "N");
  require_positive(h, "h");
  if (h > 1.0) throw InvalidParameter("h must not exceed 1 (linear gain)");
  require_positive(E_init, "E_init");
}

void MasterParams::validate() const {
  require_positive(C_M, "C_M");
  require_positive(U_M, "U_M");
  require_positive(p_cmp_M, "p_cmp_M");
  require_nonnegative(p_c_M, "p_c_M");
  require_positive(B_M, "B_M");
  require_positive(N_1, "N_1");
  require_positive(h_M, "h_M");
  require_positive(E_init_M, "E_init_M");
}

void TimeBudget::validate() const {
  require_positive(T_s, "T_s");
  require_positive(T_s_cmp, "T_s_cmp");
  require_positive(T_M_cmp, "T_M_cmp");
}

EnergyBreakdown EnergyBreakdown::from_parts(double E_s, double E_cmp, double E_tr,
                                            double E_circ) {
  EnergyBreakdown e;
  e.E_s = E_s;
  e.E_cmp = E_cmp;
  e.E_tr = E_tr;
  e.E_circ = E_circ;
  e.E_tot = E_s + E_cmp + E_tr + E_circ;
  return e;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double sensed_bits(double p_s, double t_s, double e_s) {
  require_positive(p_s, "p_s");
  require_positive(e_s, "e_s");
  require_nonnegative(t_s, "t_s");
  return p_s * t_s / e_s;
}

double min_offload(double D, double U, double C, double T_cmp) {
  require_nonnegative(D, "D");
  require_positive(U, "U");
  require_positive(C, "C");
  require_positive(T_cmp, "T_cmp");
  return D - U * T_cmp / C;
}

double window_cycles_per_bit(double C, LocalWindow window) {
  return window == LocalWindow::kCycleCount ? C : 1.0;
}

double local_capacity_bits(double U, double C, double T_cmp, LocalWindow window) {
  require_positive(U, "U");
  require_positive(C, "C");
  require_positive(T_cmp, "T_cmp");
  return U * T_cmp / window_cycles_per_bit(C, window);
}

double tx_rate(double B, double p, double h, double N) {
  return B * std::log2(1.0 + p * h / N);
}

double f_power(double x, double B, double N) {
  return N * std::expm1(x / B * std::numbers::ln2);
}

double path_gain(double d, double a) {
  if (!(d >= 1.0)) throw InvalidParameter("path_gain: distance must be >= 1 m");
  require_positive(a, "a");
  const double loss_db = 15.0 + a * std::log10(d);
  return std::pow(10.0, -loss_db / 10.0);
}

double transmit_energy(double D_off, double t_off, double B, double N, double h) {
  if (D_off == 0.0) return 0.0;
  if (!(t_off > 0.0)) {
    throw DomainError("transmit_energy: positive offload with zero offload time");
  }
  return t_off / h * f_power(D_off / t_off, B, N);
}

EnergyBreakdown slave_energy(const SlaveParams& params, double t_s, double D,
                             double D_off, double t_off) {
  require_nonnegative(t_s, "t_s");
  require_nonnegative(D, "D");
  require_nonnegative(D_off, "D_off");
  require_nonnegative(t_off, "t_off");
  if (D_off > D) throw InvalidParameter("D_off exceeds D");
  const double t_eff = D_off == 0.0 ? 0.0 : t_off;
  const double E_s = params.p_s * t_s;
  const double E_cmp = (D - D_off) * params.C * params.p_cmp;
  const double E_tr = transmit_energy(D_off, t_eff, params.B, params.N, params.h);
  const double E_circ = params.p_c * (t_s + t_eff);
  return EnergyBreakdown::from_parts(E_s, E_cmp, E_tr, E_circ);
}

EnergyBreakdown master_energy(const MasterParams& params, double D_M, double D_M_off,
                              double t_M_off) {
  require_nonnegative(D_M, "D_M");
  require_nonnegative(D_M_off, "D_M_off");
  require_nonnegative(t_M_off, "t_M_off");
  if (D_M_off > D_M) throw InvalidParameter("D_M_off exceeds D_M");
  const double t_eff = D_M_off == 0.0 ? 0.0 : t_M_off;
  const double E_cmp = (D_M - D_M_off) * params.C_M * params.p_cmp_M;
  const double E_tr = transmit_energy(D_M_off, t_eff, params.B_M, params.N_1, params.h_M);
  const double E_circ = params.p_c_M * t_eff;
  return EnergyBreakdown::from_parts(0.0, E_cmp, E_tr, E_circ);
}

}  // namespace mrc
