#pragma once

// Domain types and closed-form physics of the master/slave offloading system:
// data collection, local computation, Shannon-rate transmission and energy
// accounting. All quantities are SI (bits, s, W, J, Hz, linear gain).

#include <cstddef>
#include <vector>

namespace mrc {

// Static hardware constants of one slave robot (SR).
struct SlaveParams {
  std::size_t id = 0;
  double e_s = 0.0;     // J per sensed bit
  double p_s = 0.0;     // sensing power, W
  double C = 0.0;       // CPU cycles per bit
  double U = 0.0;       // CPU speed, cycles/s
  double p_cmp = 0.0;   // J per CPU cycle
  double p_c = 0.0;     // circuit power, W
  double B = 0.0;       // bandwidth, Hz
  double N = 0.0;       // noise power, W
  double h = 0.0;       // mean channel gain to the master
  double E_init = 0.0;  // initial battery, J

  // Throws InvalidParameter naming the first bad field.
  void validate() const;
};

// Static constants of the master robot (MR); the link is MR -> base station.
struct MasterParams {
  double C_M = 0.0;
  double U_M = 0.0;
  double p_cmp_M = 0.0;
  double p_c_M = 0.0;
  double B_M = 0.0;
  double N_1 = 0.0;
  double h_M = 0.0;
  double E_init_M = 0.0;

  void validate() const;
};

// How the local-compute deadline converts into a bit budget.
//   kCycleCount: bits * C / U <= T   (cycle-accurate)
//   kBitRate:    bits / U <= T       (U read directly as a bit rate)
enum class LocalWindow { kCycleCount, kBitRate };

struct TimeBudget {
  double T_s = 0.0;      // sensing window
  double T_s_cmp = 0.0;  // SR compute/offload window
  double T_M_cmp = 0.0;  // MR compute/offload window
  LocalWindow local_window = LocalWindow::kCycleCount;

  void validate() const;

  bool operator==(const TimeBudget&) const = default;
};

struct SlaveAllocation {
  double t_s = 0.0;
  double D = 0.0;
  double D_off = 0.0;
  double t_off = 0.0;
};

struct MasterAllocation {
  double D_M = 0.0;
  double D_M_off = 0.0;
  double t_M_off = 0.0;
};

struct Allocation {
  std::vector<SlaveAllocation> slaves;
  MasterAllocation master;
};

struct EnergyBreakdown {
  double E_s = 0.0;
  double E_cmp = 0.0;
  double E_tr = 0.0;
  double E_circ = 0.0;
  double E_tot = 0.0;

  static EnergyBreakdown from_parts(double E_s, double E_cmp, double E_tr,
                                    double E_circ);
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

// Bits collected by sensing for t_s seconds at power p_s.
double sensed_bits(double p_s, double t_s, double e_s);

// Raw minimum offload G = D - U*T/C. May be negative; callers clamp at 0.
double min_offload(double D, double U, double C, double T_cmp);

// Cycles charged per bit by the local deadline under `window`.
double window_cycles_per_bit(double C, LocalWindow window);

// Bits a robot can finish locally inside its window.
double local_capacity_bits(double U, double C, double T_cmp, LocalWindow window);

// Shannon rate B*log2(1 + p*h/N).
double tx_rate(double B, double p, double h, double N);

// Received power needed for rate x: N*(2^(x/B) - 1).
double f_power(double x, double B, double N);

// Linear gain for a path loss of 15 + a*log10(d) dB.
double path_gain(double d, double a);

// Transmit energy (t/h)*f(D_off/t), zero when nothing is sent.
double transmit_energy(double D_off, double t_off, double B, double N, double h);

EnergyBreakdown slave_energy(const SlaveParams& params, double t_s, double D,
                             double D_off, double t_off);

EnergyBreakdown master_energy(const MasterParams& params, double D_M,
                              double D_M_off, double t_M_off);

}  // namespace mrc
