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

#include "mumimo/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mumimo
{

namespace
{

constexpr double hist_floor_db = -150.0;
constexpr double hist_step_db = 0.01;
constexpr int hist_bins = 20000;

double sinc(double x)
{
    if (x == 0.0)
        return 1.0;
    return std::sin(pi * x) / (pi * x);
}

double max_power(const CVectord& z)
{
    return z.size() == 0 ? 0.0 : z.cwiseAbs2().maxCoeff();
}

int histogram_bin(double p)
{
    if (!(p > 0.0))
        return 0;
    const double b = std::floor((10.0 * std::log10(p) - hist_floor_db) / hist_step_db);
    return int(std::clamp(b, 0.0, double(hist_bins - 1)));
}

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b, double fb, double m,
                    double fm, double whole, double tol, int depth)
{
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    if (depth <= 0)
        throw model_error("adaptive_simpson: quadrature did not converge");
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace

void WaveformConfig::validate() const
{
    std::string problems;
    if (subcarriers < 1 || subcarriers % 2 == 0)
        problems += " subcarriers must be odd and >= 1;";
    if (oversampling < 1)
        problems += " oversampling must be >= 1;";
    if (!(symbol_duration > 0.0))
        problems += " symbol_duration must be > 0;";
    if (!(cp_duration >= 0.0))
        problems += " cp_duration must be >= 0;";
    if (!problems.empty())
        throw std::invalid_argument("WaveformConfig:" + problems);
}

OfdmModulator::OfdmModulator(int subcarriers, int oversampling)
    : n_(subcarriers), os_(oversampling)
{
    if (subcarriers < 1)
        throw std::invalid_argument("OfdmModulator: subcarriers must be >= 1");
    if (oversampling < 1)
        throw std::invalid_argument("OfdmModulator: oversampling must be >= 1");
    fft_.SetFlag(Eigen::FFT<double>::Unscaled);
    freq_.resize(std::size_t(samples()));
    time_.resize(std::size_t(samples()));
}

CVectord OfdmModulator::modulate(const CVectord& x)
{
    if (x.size() != n_)
        throw dimension_error("OfdmModulator::modulate: expected " + std::to_string(n_) + " subcarriers");
    const Index s = samples();
    std::fill(freq_.begin(), freq_.end(), cdouble(0.0));
    for (int b = 0; b < n_; ++b)
    {
        const Index idx = ((b - (n_ - 1) / 2) % s + s) % s;
        freq_[std::size_t(idx)] = x[b];
    }
    fft_.inv(time_.data(), freq_.data(), s);
    const double scale = 1.0 / (std::sqrt(double(n_)) * os_);
    CVectord z(s);
    for (Index a = 0; a < s; ++a)
        z[a] = time_[std::size_t(a)] * scale;
    return z;
}

CVectord OfdmModulator::adjoint(const CVectord& z)
{
    const Index s = samples();
    if (z.size() != s)
        throw dimension_error("OfdmModulator::adjoint: expected " + std::to_string(s) + " samples");
    std::copy(z.data(), z.data() + s, time_.begin());
    fft_.fwd(freq_.data(), time_.data(), s);
    const double scale = 1.0 / (std::sqrt(double(n_)) * os_);
    CVectord x(n_);
    for (int b = 0; b < n_; ++b)
    {
        const Index idx = ((b - (n_ - 1) / 2) % s + s) % s;
        x[b] = freq_[std::size_t(idx)] * scale;
    }
    return x;
}

CVectord oversampled_time_signal(const CVectord& x, int oversampling)
{
    OfdmModulator mod(int(x.size()), oversampling);
    return mod.modulate(x);
}

double papr_epsilon(const std::vector<CVectord>& batch, double eps)
{
    if (!(eps >= 0.0 && eps < 1.0))
        throw std::invalid_argument("papr_epsilon: eps must lie in [0, 1)");
    std::vector<double> p;
    for (const auto& z : batch)
        for (Index i = 0; i < z.size(); ++i)
            p.push_back(std::norm(z[i]));
    if (p.empty())
        throw std::invalid_argument("papr_epsilon: empty batch");
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / double(p.size());
    if (!(mean > 0.0))
        throw std::invalid_argument("papr_epsilon: batch has zero power");
    const auto rank = std::size_t(std::floor(eps * double(p.size())));
    std::nth_element(p.begin(), p.begin() + std::ptrdiff_t(rank), p.end(), std::greater<double>());
    return linear_to_db(p[rank] / mean);
}

PowerRatioStatistics::PowerRatioStatistics(std::size_t top_capacity)
    : capacity_(std::max<std::size_t>(top_capacity, 1)), histogram_(hist_bins, 0)
{
}

void PowerRatioStatistics::push(double p)
{
    if (top_.size() < capacity_)
        top_.push(p);
    else if (p > top_.top())
    {
        top_.pop();
        top_.push(p);
    }
}

void PowerRatioStatistics::add(const CVectord& z)
{
    for (Index i = 0; i < z.size(); ++i)
    {
        const double p = std::norm(z[i]);
        sum_ += p;
        ++histogram_[std::size_t(histogram_bin(p))];
        push(p);
    }
    count_ += std::size_t(z.size());
}

void PowerRatioStatistics::merge(const PowerRatioStatistics& other)
{
    auto copy = other.top_;
    while (!copy.empty())
    {
        push(copy.top());
        copy.pop();
    }
    for (std::size_t i = 0; i < histogram_.size(); ++i)
        histogram_[i] += other.histogram_[i];
    sum_ += other.sum_;
    count_ += other.count_;
}

double PowerRatioStatistics::mean_power() const
{
    if (count_ == 0)
        throw std::invalid_argument("PowerRatioStatistics: no samples");
    return sum_ / double(count_);
}

double PowerRatioStatistics::papr_db(double eps) const
{
    if (!(eps >= 0.0 && eps < 1.0))
        throw std::invalid_argument("PowerRatioStatistics::papr_db: eps must lie in [0, 1)");
    const double mean = mean_power();
    if (!(mean > 0.0))
        throw std::invalid_argument("PowerRatioStatistics::papr_db: zero power");
    const auto rank = std::size_t(std::floor(eps * double(count_)));
    if (rank >= top_.size())
        throw std::invalid_argument("PowerRatioStatistics::papr_db: eps exceeds the tracked tail");
    auto copy = top_;
    for (std::size_t i = 0; i + 1 + rank < top_.size(); ++i)
        copy.pop();
    return linear_to_db(copy.top() / mean);
}

std::vector<double> PowerRatioStatistics::ccdf(const std::vector<double>& thresholds_db) const
{
    const double mean_db = linear_to_db(mean_power());
    std::vector<std::uint64_t> above(hist_bins + 1, 0);
    for (int b = hist_bins - 1; b >= 0; --b)
        above[std::size_t(b)] = above[std::size_t(b) + 1] + histogram_[std::size_t(b)];
    std::vector<double> out;
    out.reserve(thresholds_db.size());
    for (double e : thresholds_db)
    {
        const double idx = std::floor((mean_db + e - hist_floor_db) / hist_step_db) + 1.0;
        const auto b = std::size_t(std::clamp(idx, 0.0, double(hist_bins)));
        out.push_back(double(above[b]) / double(count_));
    }
    return out;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth)
{
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

RMatrixd inband_energy_matrix(const WaveformConfig& cfg, double tol)
{
    cfg.validate();
    const int n = cfg.subcarriers;
    const double df = cfg.subcarrier_spacing();
    const double dcp = cfg.cp_spacing();
    const double lo = -0.5 * n * df;
    const double piece_tol = tol / n;
    RMatrixd j(n, n);
    for (int a = 0; a < n; ++a)
    {
        const double fa = cfg.frequency_index(a) * df;
        for (int b = a; b < n; ++b)
        {
            const double fb = cfg.frequency_index(b) * df;
            auto integrand = [&](double f) { return sinc((f - fa) / dcp) * sinc((f - fb) / dcp) / dcp; };
            double sum = 0.0;
            for (int piece = 0; piece < n; ++piece)
                sum += adaptive_simpson(integrand, lo + piece * df, lo + (piece + 1) * df, piece_tol);
            j(a, b) = sum;
            j(b, a) = sum;
        }
    }
    return j;
}

RMatrixd total_energy_matrix(const WaveformConfig& cfg)
{
    cfg.validate();
    // (1/T) int_{-T/2}^{T/2} exp(j 2 pi (a-b) t / T) dt vanishes for every integer a != b.
    return RMatrixd::Identity(cfg.subcarriers, cfg.subcarriers);
}

AclrResult aclr(const CMatrixd& x, const RMatrixd& j, const RMatrixd& k)
{
    if (j.rows() != x.rows() || j.cols() != x.rows() || k.rows() != x.rows() || k.cols() != x.rows())
        throw dimension_error("aclr: J, K and the batch must share N");
    if (x.cols() == 0)
        throw std::invalid_argument("aclr: empty batch");
    const CMatrixd jc = j.cast<cdouble>();
    const CMatrixd kc = k.cast<cdouble>();
    AclrResult out;
    for (Index c = 0; c < x.cols(); ++c)
    {
        out.inband += (x.col(c).adjoint() * jc * x.col(c)).value().real();
        out.total += (x.col(c).adjoint() * kc * x.col(c)).value().real();
    }
    out.inband /= double(x.cols());
    out.total /= double(x.cols());
    if (!(out.inband > 0.0))
        throw std::invalid_argument("aclr: zero in-band energy");
    out.outband = out.total - out.inband;
    out.linear = out.total / out.inband - 1.0;
    out.db = linear_to_db(out.linear);
    return out;
}

RVectord power_spectral_density(const CMatrixd& x, const WaveformConfig& cfg, const RVectord& freqs)
{
    cfg.validate();
    if (x.rows() != cfg.subcarriers)
        throw dimension_error("power_spectral_density: batch rows must equal N");
    const double df = cfg.subcarrier_spacing();
    const double dcp = cfg.cp_spacing();
    RVectord psd = RVectord::Zero(freqs.size());
    CVectord s(cfg.subcarriers);
    for (Index i = 0; i < freqs.size(); ++i)
    {
        for (int b = 0; b < cfg.subcarriers; ++b)
            s[b] = sinc((freqs[i] - cfg.frequency_index(b) * df) / dcp) / std::sqrt(dcp);
        psd[i] = (s.transpose() * x).cwiseAbs2().mean();
    }
    return psd;
}

ToneReservationPlan ToneReservationPlan::from_reserved(int subcarriers, std::vector<int> reserved, double energy_budget)
{
    ToneReservationPlan plan;
    std::sort(reserved.begin(), reserved.end());
    plan.reserved = std::move(reserved);
    std::vector<bool> taken(std::size_t(std::max(subcarriers, 0)), false);
    for (int b : plan.reserved)
    {
        if (b < 0 || b >= subcarriers)
            throw std::invalid_argument("ToneReservationPlan: reserved index out of range");
        taken[std::size_t(b)] = true;
    }
    for (int b = 0; b < subcarriers; ++b)
        if (!taken[std::size_t(b)])
            plan.data.push_back(b);
    plan.energy_budget = energy_budget;
    plan.validate();
    return plan;
}

ToneReservationPlan ToneReservationPlan::from_reserved(int subcarriers, std::vector<int> reserved)
{
    const double budget = double(reserved.size());
    return from_reserved(subcarriers, std::move(reserved), budget);
}

void ToneReservationPlan::validate() const
{
    const int n = subcarriers();
    std::vector<int> seen(std::size_t(n), 0);
    for (const auto* set : {&reserved, &data})
        for (int b : *set)
        {
            if (b < 0 || b >= n)
                throw std::invalid_argument("ToneReservationPlan: index out of range");
            if (seen[std::size_t(b)]++)
                throw std::invalid_argument("ToneReservationPlan: reserved and data sets overlap");
        }
    if (!(energy_budget >= 0.0))
        throw std::invalid_argument("ToneReservationPlan: energy budget must be >= 0");
}

ToneReservationResult tone_reservation(const CVectord& d, const ToneReservationPlan& plan, OfdmModulator& mod,
                                       int iterations, const ToneReservationOptions& opts)
{
    plan.validate();
    if (d.size() != plan.subcarriers() || mod.subcarriers() != plan.subcarriers())
        throw dimension_error("tone_reservation: data vector, plan and modulator must share N");
    const int n = plan.subcarriers();
    const double os = mod.oversampling();

    const CVectord zd = mod.modulate(d);
    ToneReservationResult res;
    res.input_peak = max_power(zd);
    res.r = CVectord::Zero(n);
    double best = res.input_peak;

    if (!plan.reserved.empty() && plan.energy_budget > 0.0)
    {
        CVectord r = CVectord::Zero(n);
        CVectord z = zd;
        double ratio = opts.clip_ratio;
        int stalled = 0;
        for (int it = 0; it < iterations; ++it)
        {
            const double level = ratio * std::sqrt(best);
            CVectord clip = CVectord::Zero(z.size());
            for (Index a = 0; a < z.size(); ++a)
            {
                const double mag = std::abs(z[a]);
                if (mag > level)
                    clip[a] = (level / mag - 1.0) * z[a];
            }
            const CVectord corr = mod.adjoint(clip);
            for (int b : plan.reserved)
                r[b] += opts.step * os * corr[b];
            const double energy = r.squaredNorm();
            if (energy > plan.energy_budget)
                r *= std::sqrt(plan.energy_budget / energy);
            z = zd + mod.modulate(r);
            const double peak = max_power(z);
            if (peak < best)
            {
                best = peak;
                res.r = r;
                stalled = 0;
            }
            else if (++stalled == 3)
            {
                // restart from the best iterate with a gentler clip
                ratio = 1.0 - 0.5 * (1.0 - ratio);
                r = res.r;
                z = zd + mod.modulate(r);
                stalled = 0;
            }
            res.best_peak.push_back(best);
        }
    }
    else
        res.best_peak.assign(std::size_t(std::max(iterations, 0)), best);
    res.peak = best;
    return res;
}

ToneReservationResult tone_reservation(const CVectord& d, const ToneReservationPlan& plan, int oversampling,
                                       int iterations, const ToneReservationOptions& opts)
{
    OfdmModulator mod(plan.subcarriers(), oversampling);
    return tone_reservation(d, plan, mod, iterations, opts);
}

std::vector<int> random_prt_placement(int subcarriers, int reserved, Rng& rng, std::span<const int> pilots)
{
    if (subcarriers < 0 || reserved < 0 || reserved > subcarriers)
        throw std::invalid_argument("random_prt_placement: need 0 <= R <= N");
    std::vector<int> pool;
    std::vector<bool> is_pilot(std::size_t(subcarriers), false);
    for (int p : pilots)
    {
        if (p < 0 || p >= subcarriers)
            throw std::invalid_argument("random_prt_placement: pilot index out of range");
        is_pilot[std::size_t(p)] = true;
    }
    for (int b = 0; b < subcarriers; ++b)
        if (!is_pilot[std::size_t(b)])
            pool.push_back(b);
    const int count = pilots.empty() ? reserved : reserved / 2;
    if (count > int(pool.size()))
        throw std::invalid_argument("random_prt_placement: not enough non-pilot subcarriers");
    for (int i = 0; i < count; ++i)
    {
        std::uniform_int_distribution<int> pick(i, int(pool.size()) - 1);
        std::swap(pool[std::size_t(i)], pool[std::size_t(pick(rng))]);
    }
    pool.resize(std::size_t(count));
    std::sort(pool.begin(), pool.end());
    return pool;
}

} // namespace mumimo
