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

#ifndef MUMIMO_EQUALIZE_HPP
#define MUMIMO_EQUALIZE_HPP

#include "mumimo/types.hpp"

#include <algorithm>
#include <span>
#include <string>
#include <vector>

namespace mumimo
{

// Rectangle of REs sharing one LMMSE operator, half-open in both dimensions.
struct EqualizerGroup
{
    int symbol_begin = 0;
    int symbol_end = 0;
    int subcarrier_begin = 0;
    int subcarrier_end = 0;

    int size() const { return (symbol_end - symbol_begin) * (subcarrier_end - subcarrier_begin); }
};

// Tiles symbols [first, first + count) x subcarriers [0, subcarriers) with groups of
// group_symbols x group_subcarriers REs; edge groups are truncated.
inline std::vector<EqualizerGroup> tile_groups(int first_symbol, int symbol_count, int subcarriers,
                                               int group_symbols, int group_subcarriers)
{
    if (group_symbols < 1 || group_subcarriers < 1)
        throw std::invalid_argument("tile_groups: group dimensions must be >= 1");
    std::vector<EqualizerGroup> groups;
    const int end = first_symbol + symbol_count;
    for (int m = first_symbol; m < end; m += group_symbols)
        for (int n = 0; n < subcarriers; n += group_subcarriers)
            groups.push_back({m, std::min(m + group_symbols, end), n, std::min(n + group_subcarriers, subcarriers)});
    return groups;
}

// W = (sum H^H) (sum (H H^H + E + sigma2 I))^{-1} over the REs of a group. `errors` may be
// empty (perfect CSI). Solved through a Cholesky factorization of the Hermitian sum.
template <typename Real>
CMatrix<Real> grouped_lmmse_matrix(std::span<const CMatrix<Real>> channels, std::span<const CMatrix<Real>> errors,
                                   Real sigma2)
{
    if (channels.empty())
        throw std::invalid_argument("grouped_lmmse_matrix: empty group");
    if (!errors.empty() && errors.size() != channels.size())
        throw dimension_error("grouped_lmmse_matrix: one error covariance per RE expected");
    if (!(sigma2 > Real(0)))
        throw std::invalid_argument("grouped_lmmse_matrix: sigma2 must be > 0");
    const Index l = channels.front().rows();
    const Index k = channels.front().cols();
    CMatrix<Real> gram = CMatrix<Real>::Zero(l, l);
    CMatrix<Real> matched = CMatrix<Real>::Zero(l, k);
    for (std::size_t i = 0; i < channels.size(); ++i)
    {
        const auto& h = channels[i];
        if (h.rows() != l || h.cols() != k)
            throw dimension_error("grouped_lmmse_matrix: inconsistent channel dimensions");
        gram.noalias() += h * h.adjoint();
        if (!errors.empty())
            gram += errors[i];
        matched += h;
    }
    gram.diagonal().array() += sigma2 * Real(channels.size());
    // W = matched^H gram^{-1}  <=>  W^H = gram^{-1} matched (gram Hermitian)
    return gram.llt().solve(matched).adjoint();
}

template <typename Real>
CMatrix<Real> grouped_lmmse_matrix(const std::vector<CMatrix<Real>>& channels,
                                   const std::vector<CMatrix<Real>>& errors, Real sigma2)
{
    return grouped_lmmse_matrix<Real>(std::span<const CMatrix<Real>>(channels),
                                      std::span<const CMatrix<Real>>(errors), sigma2);
}

// Raised when diag(W H) has zero entries; `streams` lists the unobservable streams (0-based).
class unobservable_stream_error : public std::runtime_error
{
public:
    unobservable_stream_error(const std::string& what, std::vector<int> streams)
        : std::runtime_error(what), streams_(std::move(streams))
    {
    }
    const std::vector<int>& streams() const { return streams_; }

private:
    std::vector<int> streams_;
};

// Diagonal of D = ((W H) .* I)^{-1}, so that diag(D W H) = 1.
template <typename DerivedW, typename DerivedH>
CVector<typename DerivedW::RealScalar> rescale_matrix(const Eigen::MatrixBase<DerivedW>& w,
                                                      const Eigen::MatrixBase<DerivedH>& h)
{
    using Real = typename DerivedW::RealScalar;
    if (w.cols() != h.rows() || w.rows() != h.cols())
        throw dimension_error("rescale_matrix: W is " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                              ", H is " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()));
    CVector<Real> d(w.rows());
    std::vector<int> bad;
    for (Index k = 0; k < w.rows(); ++k)
    {
        const Complex<Real> g = (w.row(k) * h.col(k)).value();
        if (g == Complex<Real>(0))
            bad.push_back(static_cast<int>(k));
        else
            d[k] = Real(1) / g;
    }
    if (!bad.empty())
    {
        std::string list;
        for (int b : bad)
            list += (list.empty() ? "" : ", ") + std::to_string(b + 1);
        throw unobservable_stream_error("rescale_matrix: zero effective gain for stream(s) " + list, bad);
    }
    return d;
}

// x_hat = D W y
template <typename DerivedY, typename DerivedW, typename DerivedD>
CVector<typename DerivedY::RealScalar> equalize(const Eigen::MatrixBase<DerivedY>& y,
                                                const Eigen::MatrixBase<DerivedW>& w,
                                                const Eigen::MatrixBase<DerivedD>& d)
{
    return d.asDiagonal() * (w * y);
}

// rho^2 = w^H (H_{-k} H_{-k}^H + E + sigma2 I) w / (w^H h_k h_k^H w) with w the conjugate of
// row k of W. Zero-degree homogeneous in w. Pass an empty `error` for perfect CSI.
template <typename DerivedW, typename DerivedH, typename DerivedE>
typename DerivedW::RealScalar post_eq_variance(const Eigen::MatrixBase<DerivedW>& w,
                                               const Eigen::MatrixBase<DerivedH>& h,
                                               const Eigen::MatrixBase<DerivedE>& error,
                                               typename DerivedW::RealScalar sigma2, Index k)
{
    using Real = typename DerivedW::RealScalar;
    const Index l = h.rows();
    if (w.cols() != l || k < 0 || k >= h.cols())
        throw dimension_error("post_eq_variance: inconsistent dimensions");
    const CVector<Real> wk = w.row(k).adjoint();
    const Complex<Real> gain = wk.dot(h.col(k)); // w^H h_k
    const Real denom = std::norm(gain);
    if (!(denom > Real(0)))
        throw unobservable_stream_error("post_eq_variance: zero signal gain for stream " + std::to_string(k + 1),
                                        {static_cast<int>(k)});
    Real interference = Real(0);
    for (Index j = 0; j < h.cols(); ++j)
        if (j != k)
            interference += std::norm(wk.dot(h.col(j)));
    Real err = Real(0);
    if (error.size() > 0)
        err = std::real(wk.dot(error * wk));
    return (interference + err + sigma2 * wk.squaredNorm()) / denom;
}

} // namespace mumimo

#endif // MUMIMO_EQUALIZE_HPP
