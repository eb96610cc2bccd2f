// SPDX-License-Identifier: Apache-2.0
//
// mumimo: link-level MU-MIMO OFDM simulation toolkit
// Copyright (C) 2026 The mumimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MUMIMO_DOWNLINK_HPP
#define MUMIMO_DOWNLINK_HPP

#include "mumimo/chanest.hpp"
#include "mumimo/equalize.hpp"
#include "mumimo/grid.hpp"
#include "mumimo/types.hpp"

#include <vector>

namespace mumimo
{

// Diagonal of C = ((W W^H) .* I)^{-1/2}: c_k = 1 / ||row_k(W)||.
template <typename Derived>
RVector<typename Derived::RealScalar> normalization_matrix(const Eigen::MatrixBase<Derived>& w)
{
    using Real = typename Derived::RealScalar;
    RVector<Real> c(w.rows());
    for (Index k = 0; k < w.rows(); ++k)
    {
        const Real norm = w.row(k).norm();
        if (!(norm > Real(0)))
            throw unobservable_stream_error("normalization_matrix: row " + std::to_string(k + 1) + " of W is zero",
                                            {static_cast<int>(k)});
        c[k] = Real(1) / norm;
    }
    return c;
}

// t = W^H (C s). The product "C W^H s" is not dimension-consistent for K != L; this is
// the reading under which each precoding column has unit energy.
template <typename DerivedS, typename DerivedW, typename DerivedC>
CVector<typename DerivedW::RealScalar> precode(const Eigen::MatrixBase<DerivedS>& s, const Eigen::MatrixBase<DerivedW>& w,
                                               const Eigen::MatrixBase<DerivedC>& c)
{
    if (s.size() != w.rows() || c.size() != w.rows())
        throw dimension_error("precode: stream count mismatch");
    return w.adjoint() * (c.template cast<Complex<typename DerivedW::RealScalar>>().asDiagonal() * s);
}

// G = H^H W^H C, the K x K channel seen by the users: u = G s + q.
template <typename DerivedH, typename DerivedW, typename DerivedC>
CMatrix<typename DerivedW::RealScalar> equivalent_channel(const Eigen::MatrixBase<DerivedH>& h,
                                                          const Eigen::MatrixBase<DerivedW>& w,
                                                          const Eigen::MatrixBase<DerivedC>& c)
{
    if (h.rows() != w.cols() || h.cols() != w.rows() || c.size() != w.rows())
        throw dimension_error("equivalent_channel: inconsistent dimensions");
    return h.adjoint() * w.adjoint() * c.template cast<Complex<typename DerivedW::RealScalar>>().asDiagonal();
}

// tau^2 = (v_kk + ||g_{-k}||^2 + sum_{i != k} v_i + sigma2) / |g_kk|^2
template <typename DerivedG, typename DerivedV>
typename DerivedG::RealScalar dl_post_eq_variance(const Eigen::MatrixBase<DerivedG>& g_hat,
                                                  const Eigen::MatrixBase<DerivedV>& v,
                                                  typename DerivedG::RealScalar sigma2, Index k)
{
    using Real = typename DerivedG::RealScalar;
    if (g_hat.size() != v.size() || k < 0 || k >= g_hat.size())
        throw dimension_error("dl_post_eq_variance: inconsistent dimensions");
    const Real main = std::norm(g_hat[k]);
    if (!(main > Real(0)))
        throw unobservable_stream_error("dl_post_eq_variance: zero main channel estimate", {static_cast<int>(k)});
    Real num = v[k] + sigma2;
    for (Index i = 0; i < g_hat.size(); ++i)
        if (i != k)
            num += std::norm(g_hat[i]) + v[i];
    return num / main;
}

// Per-user receiver output over the downlink slot, indexed m * N + n.
struct DownlinkUserEstimate
{
    std::vector<CVectord> g_hat;  // K equivalent-channel coefficients per RE
    std::vector<RVectord> v;      // K error variances per RE
    std::vector<cdouble> s_hat;   // u / g_hat_kk per RE
};

// Scalar per-coefficient LMMSE receiver: the main coefficient uses Omega, every
// interfering coefficient the shared Psi; pilots of stream i sit on user i's lattice.
class DownlinkReceiver
{
public:
    DownlinkReceiver(const CMatrixd& omega, const CMatrixd& psi, double sigma2, PilotPattern pattern,
                     InterpolationMode mode);

    // `received` is u^(k) over the slot (m * N + n) of the pattern.
    DownlinkUserEstimate estimate_equalize(int user, const std::vector<cdouble>& received) const;

    const PilotPattern& pattern() const { return pattern_; }

private:
    PilotEstimator main_;
    PilotEstimator interference_;
    double sigma2_;
    PilotPattern pattern_;
    InterpolationMode mode_;
    std::vector<std::vector<double>> main_var_;  // per stream: variance map over the slot
    std::vector<std::vector<double>> inter_var_;
};

inline DownlinkUserEstimate dl_estimate_equalize(int user, const std::vector<cdouble>& received, const CMatrixd& omega,
                                                 const CMatrixd& psi, double sigma2, const PilotPattern& pattern,
                                                 InterpolationMode mode)
{
    return DownlinkReceiver(omega, psi, sigma2, pattern, mode).estimate_equalize(user, received);
}

} // namespace mumimo

#endif // MUMIMO_DOWNLINK_HPP
