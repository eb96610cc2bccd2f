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

#include "mumimo/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mumimo
{

namespace
{

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep))
        out.push_back(field);
    return out;
}

double parse_double(const std::string& s, std::size_t line)
{
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && *first == ' ')
        ++first;
    if (first < last && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw io_error("not a number: '" + s + "'", line);
    return v;
}

long parse_int(const std::string& s, std::size_t line)
{
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw io_error("not an integer: '" + s + "'", line);
    return v;
}

// Vectorization order of pilot covariance files: symbol-major, then subcarrier, then antenna.
constexpr const char* pilot_order = "symbol-subcarrier-antenna";

// Reads "key=value" fields of a "# <tag> ..." header line.
std::vector<long> parse_header(const std::string& line, const std::string& tag, const std::vector<std::string>& keys)
{
    std::istringstream ss(line);
    std::string hash, name;
    ss >> hash >> name;
    if (hash != "#" || name != tag)
        throw io_error("expected header '# " + tag + " ...'", 1);
    std::vector<long> values(keys.size(), -1);
    std::string field;
    while (ss >> field)
    {
        const auto eq = field.find('=');
        if (eq == std::string::npos)
            throw io_error("malformed header field '" + field + "'", 1);
        bool known = false;
        if (field.substr(0, eq) == "order")
        {
            if (field.substr(eq + 1) != pilot_order)
                throw io_error("unsupported vectorization order '" + field.substr(eq + 1) + "'", 1);
            known = true;
        }
        for (std::size_t i = 0; i < keys.size(); ++i)
            if (field.substr(0, eq) == keys[i])
            {
                values[i] = parse_int(field.substr(eq + 1), 1);
                known = true;
            }
        if (!known)
            throw io_error("unknown header field '" + field + "'", 1);
    }
    for (std::size_t i = 0; i < keys.size(); ++i)
        if (values[i] < 0)
            throw io_error("header is missing '" + keys[i] + "'", 1);
    return values;
}

void expect_line(std::istream& is, const std::string& expected, std::size_t line)
{
    std::string got;
    if (!std::getline(is, got) || got != expected)
        throw io_error("expected column header '" + expected + "'", line);
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open '" + path + "'");
    return in;
}

} // namespace

io_error::io_error(const std::string& what, std::size_t line)
    : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line)
{
}

std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

std::string format_number(std::uint64_t x) { return std::to_string(x); }

void write_matrix_csv(std::ostream& os, const CMatrixd& m)
{
    os << "# matrix rows=" << m.rows() << " cols=" << m.cols() << " order=" << pilot_order << "\n";
    os << "row,col,re,im\n";
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c)
            os << r << ',' << c << ',' << format_number(m(r, c).real()) << ',' << format_number(m(r, c).imag())
               << '\n';
}

CMatrixd read_matrix_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
        throw io_error("empty matrix file");
    const auto dims = parse_header(line, "matrix", {"rows", "cols"});
    expect_line(is, "row,col,re,im", 2);
    CMatrixd m(dims[0], dims[1]);
    std::vector<bool> seen(std::size_t(dims[0] * dims[1]), false);
    std::size_t lineno = 2;
    while (std::getline(is, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != 4)
            throw io_error("expected 4 fields", lineno);
        const long r = parse_int(f[0], lineno);
        const long c = parse_int(f[1], lineno);
        if (r < 0 || r >= dims[0] || c < 0 || c >= dims[1])
            throw io_error("entry outside the declared dimensions", lineno);
        const std::size_t idx = std::size_t(r * dims[1] + c);
        if (seen[idx])
            throw io_error("duplicate entry", lineno);
        seen[idx] = true;
        m(r, c) = cdouble(parse_double(f[2], lineno), parse_double(f[3], lineno));
    }
    for (bool s : seen)
        if (!s)
            throw io_error("matrix file is missing entries");
    return m;
}

void save_matrix_csv(const std::string& path, const CMatrixd& m)
{
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write '" + path + "'");
    write_matrix_csv(out, m);
}

CMatrixd load_matrix_csv(const std::string& path)
{
    auto in = open_input(path);
    return read_matrix_csv(in);
}

void write_channel_csv(std::ostream& os, const ChannelTensor& h)
{
    os << "# channel symbols=" << h.symbols() << " subcarriers=" << h.subcarriers() << " antennas=" << h.antennas()
       << " users=" << h.users() << "\n";
    os << "m,n,l,k,re,im\n";
    for (int m = 0; m < h.symbols(); ++m)
        for (int n = 0; n < h.subcarriers(); ++n)
            for (int l = 0; l < h.antennas(); ++l)
                for (int k = 0; k < h.users(); ++k)
                    os << m << ',' << n << ',' << l << ',' << k << ',' << format_number(h(m, n, l, k).real()) << ','
                       << format_number(h(m, n, l, k).imag()) << '\n';
}

ChannelTensor read_channel_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
        throw io_error("empty channel file");
    const auto d = parse_header(line, "channel", {"symbols", "subcarriers", "antennas", "users"});
    expect_line(is, "m,n,l,k,re,im", 2);
    ChannelTensor h{int(d[0]), int(d[1]), int(d[2]), int(d[3])};
    std::vector<bool> seen(std::size_t(d[0] * d[1] * d[2] * d[3]), false);
    std::size_t lineno = 2;
    while (std::getline(is, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != 6)
            throw io_error("expected 6 fields", lineno);
        std::array<long, 4> i{};
        for (std::size_t j = 0; j < 4; ++j)
        {
            i[j] = parse_int(f[j], lineno);
            if (i[j] < 0 || i[j] >= d[j])
                throw io_error("index outside the declared dimensions", lineno);
        }
        const std::size_t idx = std::size_t(((i[0] * d[1] + i[1]) * d[2] + i[2]) * d[3] + i[3]);
        if (seen[idx])
            throw io_error("duplicate entry", lineno);
        seen[idx] = true;
        h(int(i[0]), int(i[1]), int(i[2]), int(i[3])) = cdouble(parse_double(f[4], lineno), parse_double(f[5], lineno));
    }
    for (bool s : seen)
        if (!s)
            throw io_error("channel file is missing entries");
    return h;
}

void write_llr_csv(std::ostream& os, const std::vector<RVectord>& llrs, int bits_per_symbol)
{
    os << "user,index,bit,llr\n";
    for (std::size_t k = 0; k < llrs.size(); ++k)
        for (Index i = 0; i < llrs[k].size(); ++i)
            os << k << ',' << i / bits_per_symbol << ',' << i % bits_per_symbol << ',' << format_number(llrs[k][i])
               << '\n';
}

void write_two_column_csv(std::ostream& os, const std::string& first, const std::string& second,
                          const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size())
        throw dimension_error("write_two_column_csv: column lengths differ");
    os << first << ',' << second << '\n';
    for (std::size_t i = 0; i < a.size(); ++i)
        os << format_number(a[i]) << ',' << format_number(b[i]) << '\n';
}

void write_detector_params(std::ostream& os, const DetectorParams& p)
{
    p.validate();
    const int k = p.users();
    os << k << ' ' << p.iterations() << '\n';
    for (int r = 0; r < k; ++r)
    {
        for (int c = 0; c < k; ++c)
            os << (c ? " " : "") << format_number(p.theta(r, c).real()) << ' ' << format_number(p.theta(r, c).imag());
        os << '\n';
    }
    for (const auto* rows : {&p.scalings, &p.psi})
        for (const auto& v : *rows)
        {
            for (Index j = 0; j < v.size(); ++j)
                os << (j ? " " : "") << format_number(v[j]);
            os << '\n';
        }
}

DetectorParams read_detector_params(std::istream& is)
{
    std::vector<std::vector<std::string>> lines;
    std::string line;
    while (std::getline(is, line))
    {
        std::istringstream ss(line);
        std::vector<std::string> tokens;
        std::string t;
        while (ss >> t)
            tokens.push_back(t);
        lines.push_back(std::move(tokens));
    }
    std::size_t cursor = 0;
    auto next = [&](std::size_t count) -> const std::vector<std::string>& {
        while (cursor < lines.size() && lines[cursor].empty())
            ++cursor;
        if (cursor >= lines.size())
            throw io_error("detector parameter file ends early", cursor + 1);
        if (lines[cursor].size() != count)
            throw io_error("expected " + std::to_string(count) + " values", cursor + 1);
        return lines[cursor++];
    };
    const auto& head = next(2);
    const long k = parse_int(head[0], cursor);
    const long iters = parse_int(head[1], cursor);
    if (k < 1 || iters < 1)
        throw io_error("K and I must be >= 1", cursor);
    DetectorParams p;
    p.theta.resize(k, k);
    for (long r = 0; r < k; ++r)
    {
        const auto& row = next(std::size_t(2 * k));
        for (long c = 0; c < k; ++c)
            p.theta(r, c) = cdouble(parse_double(row[std::size_t(2 * c)], cursor),
                                    parse_double(row[std::size_t(2 * c + 1)], cursor));
    }
    for (auto* rows : {&p.scalings, &p.psi})
        for (long i = 0; i < iters; ++i)
        {
            const auto& row = next(std::size_t(k));
            RVectord v(k);
            for (long j = 0; j < k; ++j)
                v[j] = parse_double(row[std::size_t(j)], cursor);
            rows->push_back(v);
        }
    while (cursor < lines.size() && lines[cursor].empty())
        ++cursor;
    if (cursor != lines.size())
        throw io_error("unexpected trailing content", cursor + 1);
    p.validate();
    return p;
}

DetectorParams load_detector_params(const std::string& path, int users, int iterations)
{
    auto in = open_input(path);
    DetectorParams p = read_detector_params(in);
    if (p.users() != users || p.iterations() != iterations)
        throw io_error("detector parameters are for K=" + std::to_string(p.users()) + ", I=" +
                       std::to_string(p.iterations()) + " but K=" + std::to_string(users) +
                       ", I=" + std::to_string(iterations) + " was requested");
    return p;
}

} // namespace mumimo
