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

#ifndef MUMIMO_IO_HPP
#define MUMIMO_IO_HPP

#include "mumimo/channel.hpp"
#include "mumimo/detect.hpp"
#include "mumimo/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mumimo
{

// Raised on malformed input files; carries the 1-based line when known.
class io_error : public std::runtime_error
{
public:
    io_error(const std::string& what, std::size_t line = 0);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Shortest round-trip decimal form.
std::string format_number(double x);
std::string format_number(std::uint64_t x);

// Matrix CSV: "# matrix rows=R cols=C order=symbol-subcarrier-antenna" then "row,col,re,im" lines
// (0-based, row-major). The order field is optional on input.
void write_matrix_csv(std::ostream& os, const CMatrixd& m);
CMatrixd read_matrix_csv(std::istream& is);
void save_matrix_csv(const std::string& path, const CMatrixd& m);
CMatrixd load_matrix_csv(const std::string& path);

// Channel tensor CSV: "# channel symbols=M subcarriers=N antennas=L users=K" then "m,n,l,k,re,im".
void write_channel_csv(std::ostream& os, const ChannelTensor& h);
ChannelTensor read_channel_csv(std::istream& is);

// "user,index,bit,llr" with index the data RE position in slot order.
void write_llr_csv(std::ostream& os, const std::vector<RVectord>& llrs, int bits_per_symbol);

// Two-column table with a header line.
void write_two_column_csv(std::ostream& os, const std::string& first, const std::string& second,
                          const std::vector<double>& a, const std::vector<double>& b);

// Detector parameter file, whitespace separated:
//   K I
//   K lines of Theta (2K numbers each: re im re im ...)
//   I lines of K column scalings theta^(i)
//   I lines of K variance scalings psi^(i)
void write_detector_params(std::ostream& os, const DetectorParams& p);
DetectorParams read_detector_params(std::istream& is);
DetectorParams load_detector_params(const std::string& path, int users, int iterations);

} // namespace mumimo

#endif // MUMIMO_IO_HPP
