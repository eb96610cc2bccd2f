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

#ifndef MUMIMO_DETECT_HPP
#define MUMIMO_DETECT_HPP

#include "mumimo/grid.hpp"
#include "mumimo/types.hpp"

#include <vector>

namespace mumimo
{

// Thin QR of the channel: H = Q_A R_A with R_A upper triangular (positive real diagonal)
// and y_bar = Q_A^H y, so that y_bar = R_A x + n_bar with n_bar ~ CN(0, sigma2 I_K).
template <typename Real>
struct QrReduced
{
    CMatrix<Real> q; // L x K, orthonormal columns
    CMatrix<Real> r; // K x K
    CVector<Real> y_bar;
};

template <typename DerivedH, typename DerivedY>
QrReduced<typename DerivedH::RealScalar> qr_reduce(const Eigen::MatrixBase<DerivedH>& h,
                                                   const Eigen::MatrixBase<DerivedY>& y)
{
    using Real = typename DerivedH::RealScalar;
    const Index l = h.rows();
    const Index k = h.cols();
    if (l < k)
        throw dimension_error("qr_reduce: need at least as many antennas as users");
    if (y.size() != l)
        throw dimension_error("qr_reduce: observation length mismatch");
    Eigen::HouseholderQR<CMatrix<Real>> qr(h.eval());
    CMatrix<Real> q = qr.householderQ() * CMatrix<Real>::Identity(l, k);
    CMatrix<Real> r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    const Real tol = Real(1e-10) * std::max(Real(1), h.norm());
    for (Index i = 0; i < k; ++i)
    {
        const Real mag = std::abs(r(i, i));
        if (!(mag > tol))
            throw std::invalid_argument("qr_reduce: channel matrix is rank deficient");
        const Complex<Real> phase = r(i, i) / mag;
        r.row(i) *= std::conj(phase);
        q.col(i) *= phase;
    }
    QrReduced<Real> out{std::move(q), std::move(r), CVector<Real>()};
    out.y_bar = out.q.adjoint() * y;
    return out;
}

// Closed-form (regularized) LMMSE matrix (H^H H + sigma2 I)^{-1} H^H.
template <typename DerivedH>
CMatrix<typename DerivedH::RealScalar> lmmse_matrix(const Eigen::MatrixBase<DerivedH>& h,
                                                    typename DerivedH::RealScalar sigma2)
{
    using Real = typename DerivedH::RealScalar;
    CMatrix<Real> gram = h.adjoint() * h;
    gram.diagonal().array() += sigma2;
    return gram.llt().solve(h.adjoint().eval());
}

// x_hat = (H^H H + sigma2 I)^{-1} H^H y
template <typename DerivedH, typename DerivedY>
CVector<typename DerivedH::RealScalar> lmmse_detect(const Eigen::MatrixBase<DerivedH>& h,
                                                    const Eigen::MatrixBase<DerivedY>& y,
                                                    typename DerivedH::RealScalar sigma2)
{
    if (!(sigma2 > 0))
        throw std::invalid_argument("lmmse_detect: sigma2 must be > 0");
    if (y.size() != h.rows())
        throw dimension_error("lmmse_detect: observation length mismatch");
    return lmmse_matrix(h, sigma2) * y;
}

// Column j of the result is (1 + scale_j) times column j of theta.
template <typename DerivedT, typename DerivedS>
CMatrix<typename DerivedT::RealScalar> expand_shared_params(const Eigen::MatrixBase<DerivedT>& theta,
                                                            const Eigen::MatrixBase<DerivedS>& scale)
{
    using Real = typename DerivedT::RealScalar;
    if (scale.size() != theta.cols())
        throw dimension_error("expand_shared_params: scaling length mismatch");
    return theta * (RVector<Real>::Ones(scale.size()) + scale).template cast<Complex<Real>>().asDiagonal();
}

struct HardDecision
{
    std::vector<int> labels;
    CVectord symbols;
};

// Nearest constellation point per stream; ties go to the lowest label.
HardDecision hard_decision(const CVectord& soft, const Constellation& c);

// Exhaustive argmin over C^K of ||y - H x||^2. Candidates are enumerated lexicographically
// (stream 1 most significant) and the first minimum wins. Requires Q K <= 20.
HardDecision ml_detect(const CMatrixd& h, const CVectord& y, const Constellation& c);

// Posterior mean of x over C under kappa = x + CN(0, tau), with max-shifted exponentials.
// tau <= 0 returns the nearest point.
cdouble gaussian_denoiser(cdouble kappa, double tau, const Constellation& c);

// Shared matrix Theta plus per-iteration column scalings theta^(i) and variance scalings psi^(i).
struct DetectorParams
{
    CMatrixd theta;
    std::vector<RVectord> scalings;
    std::vector<RVectord> psi;

    int users() const { return static_cast<int>(theta.rows()); }
    int iterations() const { return static_cast<int>(scalings.size()); }
    void validate() const;

    // Theta = LMMSE matrix of (R_A, sigma2), zero scalings, constant psi.
    static DetectorParams lmmse_initialized(const CMatrixd& r, double sigma2, int iterations, double psi = 1.0);
};

struct DetectorState
{
    CVectord x_hat;
    CVectord kappa;
    RVectord tau;
};

struct DetectorOptions
{
    // Noise term subtracted from the residual energy. The reference form uses L sigma2 even
    // after QR reduction; set to false to use K sigma2 instead.
    bool residual_uses_antenna_count = true;
    double tau_floor = 1e-12;
};

// kappa = x_hat + Theta_i (y_bar - R x_hat);
// tau = psi/K (||I - Theta_i R||_F^2 / ||R||_F^2 [||y_bar - R x_hat||^2 - n sigma2]^+ + ||Theta_i||_F^2 sigma2);
// x_next = chi(kappa, tau) elementwise.
DetectorState mmnet_iterate(const DetectorState& state, const CMatrixd& r, const CVectord& y_bar,
                            const CMatrixd& theta_i, const RVectord& psi_i, double sigma2, int antennas,
                            const Constellation& c, const DetectorOptions& opts = {});

struct MmnetResult
{
    DetectorState state;
    HardDecision decision;
};

// Full detector: QR reduction, I iterations from x_hat = 0, hard decision.
MmnetResult mmnet_detect(const CMatrixd& h, const CVectord& y, double sigma2, const DetectorParams& params,
                         const Constellation& c, const DetectorOptions& opts = {});

} // namespace mumimo

#endif // MUMIMO_DETECT_HPP
