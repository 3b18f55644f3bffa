#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "rotor_spectra/oracle.hpp"
#include "rotor_spectra/response.hpp"
#include "rotor_spectra/simulate.hpp"
#include "rotor_spectra/spectra.hpp"
#include "rotor_spectra/zero_noise.hpp"

namespace rotor::io {

// CSV writers. Labels ell, bands and fibres j are written one-based; paths
// and steps stay zero-based (step 0 is the initial state).

inline std::ofstream open(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

/// Short, filesystem-safe spelling of a parameter value.
inline std::string tag(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

inline void write_spectrum(std::ostream& os, const LabelledSpectrum<double>& spec) {
  os << "k,ell,band,re,im,abs,arg,target_re,target_im,dist_to_target,gersh_radius,residual\n";
  for (std::size_t ell = 0; ell < spec.size(); ++ell) {
    const auto& e = spec[ell];
    os << spec.k << ',' << ell + 1 << ',' << e.band + 1 << ',' << e.lambda.real() << ',' << e.lambda.imag() << ','
       << std::abs(e.lambda) << ',' << std::arg(e.lambda) << ',' << e.target.real() << ',' << e.target.imag() << ','
       << e.dist_to_target << ',' << spec.gersh_radius << ',' << e.residual << '\n';
  }
}

inline void write_eigenvectors(std::ostream& os, const LabelledSpectrum<double>& spec) {
  os << "k,ell,j,re,im,abs\n";
  for (std::size_t ell = 0; ell < spec.size(); ++ell) {
    const auto& v = spec[ell].vector;
    for (int j = 0; j < v.size(); ++j)
      os << spec.k << ',' << ell + 1 << ',' << j + 1 << ',' << v(j).real() << ',' << v(j).imag() << ','
         << std::abs(v(j)) << '\n';
  }
}

inline void write_unit_circle(std::ostream& os, int samples = 512) {
  os << "t,re,im\n";
  for (int i = 0; i <= samples; ++i) {
    const double t = two_pi<double> * i / samples;
    os << t << ',' << std::cos(t) << ',' << std::sin(t) << '\n';
  }
}

/// One circle per distinct band target, radius the (scaled) Gershgorin bound.
inline void write_gershgorin_circles(std::ostream& os, const LabelledSpectrum<double>& spec, const BandModel& model,
                                     int samples = 256) {
  os << "k,band,center_re,center_im,radius,t,re,im\n";
  for (int s = 0; s < model.bands(); ++s) {
    const cplx c = spec[static_cast<std::size_t>(model.band_begin(s))].target;
    for (int i = 0; i <= samples; ++i) {
      const double t = two_pi<double> * i / samples;
      os << spec.k << ',' << s + 1 << ',' << c.real() << ',' << c.imag() << ',' << spec.gersh_radius << ',' << t << ','
         << c.real() + spec.gersh_radius * std::cos(t) << ',' << c.imag() + spec.gersh_radius * std::sin(t) << '\n';
    }
  }
}

inline void write_limit(std::ostream& os, const LimitBasis& basis) {
  os << "k,ell,band,lambda_hat_re,lambda_hat_im,j,f_j\n";
  for (std::size_t ell = 0; ell < basis.size(); ++ell) {
    const auto& e = basis[ell];
    for (int j = 0; j < e.f.size(); ++j)
      os << basis.k << ',' << ell + 1 << ',' << e.band + 1 << ',' << e.lambda_hat.real() << ',' << e.lambda_hat.imag()
         << ',' << j + 1 << ',' << e.f(j).real() << '\n';
  }
}

inline void write_convergence(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "k,ell,eps,proj_distance,projector_gap,mass_outside_band\n";
  for (const auto& r : rows)
    os << r.k << ',' << r.ell + 1 << ',' << r.eps << ',' << r.proj_distance << ',' << r.projector_gap << ','
       << r.mass_outside_band << '\n';
}

inline void write_response(std::ostream& os, const ResponseData& data) {
  os << "k,ell,band,lhat_re,lhat_im,lhathat_re,lhathat_im\n";
  for (std::size_t ell = 0; ell < data.size(); ++ell) {
    const auto& e = data[ell];
    os << data.k << ',' << ell + 1 << ',' << e.band + 1 << ',' << e.lambda_hat.real() << ',' << e.lambda_hat.imag()
       << ',' << e.lambda_hathat.real() << ',' << e.lambda_hathat.imag() << '\n';
  }
}

inline void write_fhat(std::ostream& os, const ResponseData& data) {
  os << "k,ell,j,f_re,f_im,fhat_re,fhat_im\n";
  for (std::size_t ell = 0; ell < data.size(); ++ell) {
    const auto& e = data[ell];
    for (int j = 0; j < e.f.size(); ++j)
      os << data.k << ',' << ell + 1 << ',' << j + 1 << ',' << e.f(j).real() << ',' << e.f(j).imag() << ','
         << e.f_hat(j).real() << ',' << e.f_hat(j).imag() << '\n';
  }
}

/// One block of rows per (k, ell), each closed by a footer row whose eps
/// column reads "slope" and whose residual columns hold the fitted orders.
inline void write_order_checks(std::ostream& os, const std::vector<OrderCheck>& checks) {
  os << "k,ell,eps,r0,r1,r2,vec_r\n";
  for (const auto& oc : checks) {
    for (std::size_t i = 0; i < oc.eps_grid.size(); ++i)
      os << oc.k << ',' << oc.ell + 1 << ',' << oc.eps_grid[i] << ',' << oc.residual_0[i] << ',' << oc.residual_1[i]
         << ',' << oc.residual_2[i] << ',' << oc.vec_residual[i] << '\n';
    os << oc.k << ',' << oc.ell + 1 << ",slope," << oc.slope_0 << ',' << oc.slope_1 << ',' << oc.slope_2 << ','
       << oc.slope_vec << '\n';
  }
}

inline void write_oracle(std::ostream& os, const OracleReport& rep) {
  os << "k,ell,band,case,lhat_closed_re,lhat_closed_im,lhat_numeric_re,lhat_numeric_im,abs_diff,vec_proj_dist\n";
  for (const auto& r : rep.rows)
    os << r.k << ',' << r.ell + 1 << ',' << r.band + 1 << ',' << to_string(r.block_case) << ','
       << r.lhat_closed.real() << ',' << r.lhat_closed.imag() << ',' << r.lhat_numeric.real() << ','
       << r.lhat_numeric.imag() << ',' << r.abs_diff << ',' << r.vec_proj_dist << '\n';
}

inline void write_cycles(std::ostream& os, const CycleReport& rep, int bands) {
  os << "cycle,re,im,magnitude,arg,period_steps,band";
  for (int s = 0; s < bands; ++s) os << ",mass_" << s + 1;
  os << '\n';
  for (std::size_t i = 0; i < rep.cycles.size(); ++i) {
    const auto& c = rep.cycles[i];
    os << i + 1 << ',' << c.eigenvalue.real() << ',' << c.eigenvalue.imag() << ',' << c.magnitude << ',' << c.arg << ','
       << c.period_steps << ',' << c.band + 1;
    for (double m : c.band_masses) os << ',' << m;
    os << '\n';
  }
}

inline void write_trajectories(std::ostream& os, const TrajectoryBatch& b) {
  os << "path,step,j,x\n";
  for (int p = 0; p < b.n_paths; ++p)
    for (int t = 0; t <= b.n_steps; ++t) {
      const std::size_t i = b.index(p, t);
      os << p << ',' << t << ',' << b.j[i] + 1 << ',' << b.x[i] << '\n';
    }
}

/// F(j, x) = f(j) e^{2 pi i k x} sampled on x = 0, 1/x_res, ..., for every
/// label. k is not a column; callers put it in the file name.
inline void write_eigenfunction_grid(std::ostream& os, const LabelledSpectrum<double>& spec, int x_res) {
  os << "ell,j,x,abs,arg\n";
  for (std::size_t ell = 0; ell < spec.size(); ++ell) {
    const auto& v = spec[ell].vector;
    for (int j = 0; j < v.size(); ++j)
      for (int i = 0; i < x_res; ++i) {
        const double x = static_cast<double>(i) / x_res;
        const cplx value = v(j) * std::polar(1.0, two_pi<double> * static_cast<double>(spec.k) * x);
        os << ell + 1 << ',' << j + 1 << ',' << x << ',' << std::abs(value) << ',' << std::arg(value)
           << '\n';
      }
  }
}

}  // namespace rotor::io
