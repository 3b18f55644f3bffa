#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <arpack.h>

#include "rotor_spectra/error.hpp"
#include "rotor_spectra/linalg.hpp"

namespace rotor {

struct PartialEigen {
  std::vector<cplx> values;    // descending |value|
  std::vector<VectorC> vectors;  // unit norm
  std::vector<double> residuals;
};

/// Largest-magnitude eigenpairs of a real operator given only its action,
/// via ARPACK's implicitly restarted Arnoldi method (dnaupd/dneupd).
/// Conjugate pairs are returned as two separate entries.
inline PartialEigen arnoldi_largest(int n, const std::function<void(const double*, double*)>& apply, int nev,
                                    int ncv = 0, double tol = 1e-12, int max_restarts = 3000) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "arnoldi_largest needs n >= 3");
  nev = std::clamp(nev, 1, n - 2);
  if (ncv <= 0) ncv = std::max(2 * nev + 1, 20);
  ncv = std::min(ncv, n);
  if (ncv < nev + 2) throw Error(ErrorCode::InvalidArgument, "Krylov dimension too small for the requested count");

  a_int ido = 0;
  a_int info = 1;  // use the deterministic start vector below
  std::vector<double> resid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) resid[static_cast<std::size_t>(i)] = 1.0 + 0.5 * std::sin(1.0 + 0.7 * i);
  std::vector<double> v(static_cast<std::size_t>(n) * static_cast<std::size_t>(ncv));
  a_int iparam[11] = {1, 0, max_restarts, 1, 0, 0, 1, 0, 0, 0, 0};
  a_int ipntr[14] = {};
  std::vector<double> workd(3 * static_cast<std::size_t>(n));
  const a_int lworkl = 3 * static_cast<a_int>(ncv) * ncv + 6 * static_cast<a_int>(ncv);
  std::vector<double> workl(static_cast<std::size_t>(lworkl));

  while (true) {
    dnaupd_c(&ido, "I", n, "LM", nev, tol, resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(),
             workl.data(), lworkl, &info);
    if (ido == -1 || ido == 1) {
      apply(workd.data() + ipntr[0] - 1, workd.data() + ipntr[1] - 1);
      continue;
    }
    break;
  }
  if (info < 0) throw Error(ErrorCode::NoConvergence, "dnaupd failed with info " + std::to_string(info));
  if (info == 1) throw Error(ErrorCode::NoConvergence, "Arnoldi reached the restart limit");

  std::vector<a_int> select(static_cast<std::size_t>(ncv));
  std::vector<double> dr(static_cast<std::size_t>(nev) + 1), di(static_cast<std::size_t>(nev) + 1);
  std::vector<double> z(static_cast<std::size_t>(n) * (static_cast<std::size_t>(nev) + 1));
  std::vector<double> workev(3 * static_cast<std::size_t>(ncv));
  dneupd_c(1, "A", select.data(), dr.data(), di.data(), z.data(), n, 0.0, 0.0, workev.data(), "I", n, "LM", nev, tol,
           resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl, &info);
  if (info != 0) throw Error(ErrorCode::NoConvergence, "dneupd failed with info " + std::to_string(info));

  // A conjugate pair occupies two columns: real part, then imaginary part of
  // the member with positive imaginary part.
  const int nconv = static_cast<int>(iparam[4]);
  PartialEigen out;
  std::vector<double> ax(static_cast<std::size_t>(n)), ay(static_cast<std::size_t>(n));
  for (int i = 0; i < nconv; ++i) {
    const auto col = [&](int c) { return Eigen::Map<const VectorR>(z.data() + static_cast<std::size_t>(c) * n, n); };
    const cplx lambda(dr[static_cast<std::size_t>(i)], di[static_cast<std::size_t>(i)]);
    VectorC vec;
    bool pair = false;
    if (lambda.imag() == 0.0) {
      vec = col(i).cast<cplx>();
    } else if (i + 1 < nconv) {
      vec = col(i).cast<cplx>() + cplx(0, 1) * col(i + 1).cast<cplx>();
      if (lambda.imag() < 0) vec = vec.conjugate();
      pair = true;
    } else {
      break;  // unmatched half of a pair at the end of the buffer
    }
    vec /= vec.norm();
    const VectorR re = vec.real(), im = vec.imag();
    apply(re.data(), ax.data());
    apply(im.data(), ay.data());
    const VectorC av = Eigen::Map<const VectorR>(ax.data(), n).cast<cplx>() +
                       cplx(0, 1) * Eigen::Map<const VectorR>(ay.data(), n).cast<cplx>();
    const double res = (av - lambda * vec).norm();
    out.values.push_back(lambda);
    out.vectors.push_back(vec);
    out.residuals.push_back(res);
    if (pair) {
      out.values.push_back(std::conj(lambda));
      out.vectors.push_back(vec.conjugate());
      out.residuals.push_back(res);
      ++i;
    }
  }

  std::vector<std::size_t> order(out.values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(out.values[a]) > std::abs(out.values[b]); });
  PartialEigen sorted;
  for (std::size_t i : order) {
    sorted.values.push_back(out.values[i]);
    sorted.vectors.push_back(out.vectors[i]);
    sorted.residuals.push_back(out.residuals[i]);
  }
  return sorted;
}

}  // namespace rotor
