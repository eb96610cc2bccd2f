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

#ifndef MUMIMO_WAVEFORM_HPP
#define MUMIMO_WAVEFORM_HPP

#include "mumimo/types.hpp"

#include <unsupported/Eigen/FFT>

#include <cstddef>
#include <functional>
#include <queue>
#include <span>
#include <vector>

namespace mumimo
{

// Subcarrier b = 0..N-1 carries frequency index n_b = b - (N-1)/2.
struct WaveformConfig
{
    int subcarriers = 75;
    int oversampling = 5;
    double symbol_duration = 1.0; // T
    double cp_duration = 0.0;     // T^CP

    double subcarrier_spacing() const { return 1.0 / symbol_duration; }
    double cp_spacing() const { return 1.0 / (symbol_duration + cp_duration); }
    int frequency_index(int b) const { return b - (subcarriers - 1) / 2; }
    void validate() const;
};

// z = F^H x with f_{a,b} = exp(j 2 pi a n_b / (N O_S)) / (sqrt(N) O_S).
// Scaling: ||z||^2 = ||x||^2 / O_S. Even N is accepted with n_b = b - (N-2)/2.
// Holds FFT plans, so one instance per thread.
class OfdmModulator
{
public:
    OfdmModulator(int subcarriers, int oversampling);

    int subcarriers() const { return n_; }
    int oversampling() const { return os_; }
    Index samples() const { return Index(n_) * os_; }

    CVectord modulate(const CVectord& x);
    // F z: the adjoint map back to the N subcarriers.
    CVectord adjoint(const CVectord& z);

private:
    int n_;
    int os_;
    Eigen::FFT<double> fft_;
    std::vector<cdouble> freq_;
    std::vector<cdouble> time_;
};

CVectord oversampled_time_signal(const CVectord& x, int oversampling);

// (1-eps)-quantile of |z|^2 / mean(|z|^2), pooled over every sample of the batch, in dB.
// The quantile is the (floor(eps S) + 1)-th largest ratio, so eps = 0 gives the maximum.
double papr_epsilon(const std::vector<CVectord>& batch, double eps);

// Streaming version of papr_epsilon plus a CCDF histogram (0.01 dB bins).
class PowerRatioStatistics
{
public:
    // Exact quantiles are available while floor(eps S) < top_capacity.
    explicit PowerRatioStatistics(std::size_t top_capacity);

    void add(const CVectord& z);
    void merge(const PowerRatioStatistics& other);

    std::size_t count() const { return count_; }
    double mean_power() const;
    double papr_db(double eps) const;
    // P(nu > e) for each threshold e (dB).
    std::vector<double> ccdf(const std::vector<double>& thresholds_db) const;

private:
    void push(double p);

    std::size_t capacity_;
    std::size_t count_ = 0;
    double sum_ = 0.0;
    std::priority_queue<double, std::vector<double>, std::greater<double>> top_;
    std::vector<std::uint64_t> histogram_;
};

// Composite adaptive Simpson; throws model_error when the recursion limit is hit.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth = 48);

// J: in-band energy quadratic form (N x N, real symmetric PSD), quadrature to `tol` absolute.
RMatrixd inband_energy_matrix(const WaveformConfig& cfg, double tol = 1e-8);
// K: total energy quadratic form; the identity for the rectangular window.
RMatrixd total_energy_matrix(const WaveformConfig& cfg);

struct AclrResult
{
    double inband = 0.0;  // E[E_I]
    double outband = 0.0; // E[E_O]
    double total = 0.0;   // E[E_A]
    double linear = 0.0;
    double db = 0.0;
};

// Columns of `x` are the symbols of the batch.
AclrResult aclr(const CMatrixd& x, const RMatrixd& j, const RMatrixd& k);

// Mean |X(f)|^2 of the batch on the frequency grid (units of Delta_f).
RVectord power_spectral_density(const CMatrixd& x, const WaveformConfig& cfg, const RVectord& freqs);

struct WaveformMetrics
{
    double eps = 1e-3;
    double papr_eps_db = 0.0;
    AclrResult aclr;
    std::vector<double> ccdf_db;
    std::vector<double> ccdf_prob;
};

// Subcarrier positions b (0-based); reserved and data sets partition 0..N-1.
struct ToneReservationPlan
{
    std::vector<int> reserved;
    std::vector<int> data;
    double energy_budget = 0.0; // r^H r <= energy_budget

    static ToneReservationPlan from_reserved(int subcarriers, std::vector<int> reserved, double energy_budget);
    static ToneReservationPlan from_reserved(int subcarriers, std::vector<int> reserved);
    int subcarriers() const { return int(reserved.size() + data.size()); }
    void validate() const;
};

struct ToneReservationOptions
{
    double clip_ratio = 0.8; // clip level relative to the best peak amplitude
    double step = 1.0;
};

struct ToneReservationResult
{
    CVectord r;
    double input_peak = 0.0;       // max |F^H d|^2
    double peak = 0.0;             // max |F^H (d + r)|^2
    std::vector<double> best_peak; // after each iteration
};

ToneReservationResult tone_reservation(const CVectord& d, const ToneReservationPlan& plan, OfdmModulator& mod,
                                       int iterations, const ToneReservationOptions& opts = {});
ToneReservationResult tone_reservation(const CVectord& d, const ToneReservationPlan& plan, int oversampling,
                                       int iterations, const ToneReservationOptions& opts = {});

// Uniform R-subset of 0..N-1, sorted. With pilots, R/2 tones are drawn from the non-pilot subcarriers.
std::vector<int> random_prt_placement(int subcarriers, int reserved, Rng& rng, std::span<const int> pilots = {});

} // namespace mumimo

#endif // MUMIMO_WAVEFORM_HPP
