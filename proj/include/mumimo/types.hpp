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

#ifndef MUMIMO_TYPES_HPP
#define MUMIMO_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace mumimo
{

// Dense complex/real types templated on the real scalar, with double aliases.
template <typename Real>
using Complex = std::complex<Real>;
template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using cdouble = std::complex<double>;
using CMatrixd = CMatrix<double>;
using CVectord = CVector<double>;
using RMatrixd = RMatrix<double>;
using RVectord = RVector<double>;
using Index = Eigen::Index;

inline constexpr double pi = std::numbers::pi;

// Eigenvalues of Hermitian matrices are accepted as PSD down to this value.
inline constexpr double psd_tolerance = 1e-9;

// Raised when a matrix/tensor dimension does not match its contract.
class dimension_error : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a numerical model is invalid (e.g. a non-PSD covariance).
class model_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

// SplitMix64 finalizer, used to derive independent per-trial RNG streams.
inline std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic stream for (seed, a, b); distinct tuples give unrelated streams.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
{
    std::uint64_t s = mix_seed(seed);
    s = mix_seed(s ^ mix_seed(a + 0x632be59bd9b4e019ULL));
    s = mix_seed(s ^ mix_seed(b + 0x85157af5ULL));
    std::seed_seq seq{std::uint32_t(s), std::uint32_t(s >> 32)};
    return Rng(seq);
}

// Circularly-symmetric complex Gaussian with the given variance (variance/2 per real dimension).
template <typename Real = double>
std::complex<Real> complex_normal(Rng& rng, Real variance = Real(1))
{
    std::normal_distribution<Real> dist(Real(0), std::sqrt(variance / Real(2)));
    const Real re = dist(rng);
    const Real im = dist(rng);
    return {re, im};
}

template <typename Real = double>
CVector<Real> complex_normal_vector(Rng& rng, Index n, Real variance = Real(1))
{
    CVector<Real> v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = complex_normal<Real>(rng, variance);
    return v;
}

template <typename Real = double>
CMatrix<Real> complex_normal_matrix(Rng& rng, Index rows, Index cols, Real variance = Real(1))
{
    CMatrix<Real> m(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r)
            m(r, c) = complex_normal<Real>(rng, variance);
    return m;
}

// Smallest eigenvalue of a Hermitian matrix.
template <typename Derived>
typename Derived::RealScalar min_eigenvalue(const Eigen::MatrixBase<Derived>& a)
{
    using Plain = typename Derived::PlainObject;
    Eigen::SelfAdjointEigenSolver<Plain> es(a.eval(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& a, typename Derived::RealScalar tol = 1e-12)
{
    if (a.rows() != a.cols())
        return false;
    const auto scale = std::max(typename Derived::RealScalar(1), a.cwiseAbs().maxCoeff());
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

} // namespace mumimo

#endif // MUMIMO_TYPES_HPP
